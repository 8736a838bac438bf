import numpy as np

#: distance sentinel for "no w-path"; printed as ``INF``
INF = int(np.iinfo(np.int64).max)


class MemoryCapExceeded(MemoryError):
    """An index build would exceed its configured label-entry budget."""

    def __init__(self, what: str, cap_bytes: int, entries: int):
        self.what = what
        self.cap_bytes = cap_bytes
        self.entries = entries
        super().__init__(f"{what}: label entries exceed the {cap_bytes} byte cap "
                         f"after {entries} entries")


def fmt_dist(d: int) -> str:
    return "INF" if d >= INF else str(int(d))
