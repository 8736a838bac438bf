"""Binary index container (``WCIX1``).

Layout, all integers unsigned LEB128 unless noted::

    magic  b"WCIX1"        5 bytes
    version                1 byte
    section tag            1 byte  (wc, naive, wc-path, wc-directed)
    flags                  1 byte  (bit 0: weighted lengths, bit 1: parents stored)
    fingerprint            16 raw bytes
    n, edge_count
    quality table          count, then little-endian float64 values
    order sequence         n values
    payload                section specific arrays, each "count, values"
    crc32                  4 bytes little-endian over everything before it

Label entries store quality ranks; raw qualities live once in the table.
Re-serializing a loaded container gives the same bytes.
"""
from __future__ import annotations

import os
import struct
import zlib

import numpy as np

from .graph import QualityGraph
from .naive import PerThresholdIndex
from .ordering import VertexOrder
from .wcindex.index import LabelStore, StaleIndexError, WcIndex

__all__ = [
    "MAGIC",
    "VERSION",
    "SECTIONS",
    "ContainerError",
    "UnsupportedVersion",
    "FingerprintMismatch",
    "encode_varints",
    "decode_varints",
    "dumps_index",
    "loads_index",
    "save_index",
    "load_index",
    "section_of",
]

MAGIC = b"WCIX1"
VERSION = 1
SECTIONS = {"wc": 0, "naive": 1, "wc-path": 2, "wc-directed": 3}
_SECTION_NAMES = {v: k for k, v in SECTIONS.items()}
_HEADER = len(MAGIC) + 3 + 16


class ContainerError(ValueError):
    """The file is not a readable index container."""


class UnsupportedVersion(ContainerError):
    pass


class FingerprintMismatch(StaleIndexError):
    pass


def encode_varints(values) -> bytes:
    a = np.ascontiguousarray(values, dtype=np.int64)
    if a.size and a.min() < 0:
        raise ValueError("varints must be non-negative")
    a = a.astype(np.uint64)
    nb = np.ones(len(a), np.int64)
    x = a >> np.uint64(7)
    while x.any():
        nb += x > 0
        x >>= np.uint64(7)
    starts = np.cumsum(nb) - nb
    out = np.zeros(int(nb.sum()), np.uint8)
    x = a.copy()
    for k in range(int(nb.max()) if len(nb) else 0):
        m = nb > k
        byte = (x[m] & np.uint64(0x7F)).astype(np.uint8)
        more = (nb[m] > k + 1).astype(np.uint8) << 7
        out[starts[m] + k] = byte | more
        x >>= np.uint64(7)
    return out.tobytes()


def decode_varints(buf: np.ndarray, pos: int, count: int) -> tuple[np.ndarray, int]:
    """Decode ``count`` varints from ``buf[pos:]``; returns ``(values, new_pos)``."""
    if count == 0:
        return np.zeros(0, np.int64), pos
    ends = np.flatnonzero(buf[pos:] < 0x80)
    if len(ends) < count:
        raise ContainerError("truncated varint stream")
    ends = ends[:count] + pos
    starts = np.concatenate([[pos], ends[:-1] + 1])
    width = ends - starts + 1
    if width.max() > 9:
        raise ContainerError("varint too long")
    seg = buf[pos:ends[-1] + 1].astype(np.uint64)
    gid = np.repeat(np.arange(count), width)
    shift = (np.arange(len(seg)) - (starts - pos)[gid]).astype(np.uint64) * np.uint64(7)
    parts = (seg & np.uint64(0x7F)) << shift
    vals = np.bitwise_or.reduceat(parts, starts - pos)
    return vals.astype(np.int64), int(ends[-1] + 1)


def section_of(idx) -> str:
    if isinstance(idx, PerThresholdIndex):
        return "naive"
    if idx.directed:
        return "wc-directed"
    return "wc-path" if idx.path_mode else "wc"


class _Writer:
    def __init__(self):
        self.parts: list[bytes] = []

    def raw(self, b: bytes):
        self.parts.append(b)

    def uint(self, v: int):
        self.parts.append(encode_varints([v]))

    def array(self, a):
        a = np.asarray(a)
        self.uint(len(a))
        self.parts.append(encode_varints(a))

    def getvalue(self) -> bytes:
        body = b"".join(self.parts)
        return body + struct.pack("<I", zlib.crc32(body))


class _Reader:
    def __init__(self, data: bytes, pos: int):
        self.data = data
        self.buf = np.frombuffer(data, np.uint8)
        self.pos = pos

    def raw(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise ContainerError("container truncated")
        b = self.data[self.pos:self.pos + n]
        self.pos += n
        return b

    def uint(self) -> int:
        v, self.pos = decode_varints(self.buf, self.pos, 1)
        return int(v[0])

    def array(self) -> np.ndarray:
        n = self.uint()
        v, self.pos = decode_varints(self.buf, self.pos, n)
        return v


def _write_store(w: _Writer, st: LabelStore, with_parent: bool):
    w.array(np.diff(st.offsets))
    w.array(st.hub)
    w.array(st.dist)
    w.array(st.qual)
    if with_parent:
        w.array(st.parent)


def _read_store(r: _Reader, n: int, with_parent: bool) -> LabelStore:
    sizes = r.array()
    if len(sizes) != n:
        raise ContainerError("label directory does not match vertex count")
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    hub, dist, qual = r.array(), r.array(), r.array()
    parent = r.array().astype(np.int32) if with_parent else None
    E = int(offsets[-1])
    if not (len(hub) == len(dist) == len(qual) == E) or (parent is not None and len(parent) != E):
        raise ContainerError("label arrays have inconsistent lengths")
    if E and (hub.max() >= n or (parent is not None and parent.max() >= n)):
        raise ContainerError("label entry refers to a vertex outside the graph")
    return LabelStore(offsets=offsets, hub=hub.astype(np.int32), dist=dist,
                      qual=qual.astype(np.int32), parent=parent)


def dumps_index(idx) -> bytes:
    sec = section_of(idx)
    w = _Writer()
    flags = int(bool(getattr(idx, "weighted", False)))
    flags |= 2 * int(bool(getattr(idx, "path_mode", False)))
    w.raw(MAGIC + bytes([VERSION, SECTIONS[sec], flags]))
    w.raw(bytes.fromhex(idx.fingerprint))
    w.uint(idx.n)
    w.uint(int(getattr(idx, "edge_count", idx.meta.get("edge_count", 0))))
    qt = np.ascontiguousarray(idx.quality_table, dtype="<f8")
    w.uint(len(qt))
    w.raw(qt.tobytes())
    w.array(idx.order.sequence)
    if sec == "naive":
        w.uint(len(idx.subs))
        for off, hub, dist in idx.subs:
            w.array(np.diff(off))
            w.array(hub)
            w.array(dist)
    else:
        _write_store(w, idx.inn, idx.path_mode)
        if sec == "wc-directed":
            _write_store(w, idx.out, idx.path_mode)
    return w.getvalue()


def loads_index(data: bytes, graph: QualityGraph | None = None):
    """Parse a container; with ``graph`` also check that it was built for it."""
    if len(data) < _HEADER + 4:
        raise ContainerError("container truncated")
    if data[:len(MAGIC)] != MAGIC:
        raise ContainerError("bad magic; not a WCIX1 container")
    version, tag, flags = data[len(MAGIC)], data[len(MAGIC) + 1], data[len(MAGIC) + 2]
    if version != VERSION:
        raise UnsupportedVersion(f"container version {version} is not supported")
    (crc,) = struct.unpack("<I", data[-4:])
    if zlib.crc32(data[:-4]) != crc:
        raise ContainerError("checksum mismatch (corrupt or truncated container)")
    if tag not in _SECTION_NAMES:
        raise ContainerError(f"unknown section tag {tag}")
    sec = _SECTION_NAMES[tag]
    r = _Reader(data[:-4], len(MAGIC) + 3)
    fp = r.raw(16).hex()
    if graph is not None and graph.fingerprint() != fp:
        raise FingerprintMismatch("container was built for a different graph")
    try:
        n = r.uint()
        m = r.uint()
        nq = r.uint()
        qt = np.frombuffer(r.raw(8 * nq), dtype="<f8").astype(np.float64)
        order = VertexOrder.from_sequence(r.array())
        if len(order) != n:
            raise ContainerError("order length does not match vertex count")
        if sec == "naive":
            subs = []
            for _ in range(r.uint()):
                sizes = r.array()
                off = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
                subs.append((off, r.array().astype(np.int32), r.array()))
            idx = PerThresholdIndex(n=n, order=order, quality_table=qt, fingerprint=fp,
                                    subs=subs, meta={"edge_count": m})
        else:
            path_mode = bool(flags & 2)
            inn = _read_store(r, n, path_mode)
            out = _read_store(r, n, path_mode) if sec == "wc-directed" else inn
            idx = WcIndex(n=n, order=order, quality_table=qt, fingerprint=fp,
                          edge_count=m, directed=sec == "wc-directed", inn=inn, out=out,
                          path_mode=path_mode, weighted=bool(flags & 1))
        if r.pos != len(r.data):
            raise ContainerError("trailing bytes after payload")
    except ValueError as exc:
        if isinstance(exc, ContainerError):
            raise
        raise ContainerError(str(exc)) from exc
    return idx


def save_index(idx, path: str | os.PathLike) -> None:
    with open(path, "wb") as fh:
        fh.write(dumps_index(idx))


def load_index(path: str | os.PathLike, graph: QualityGraph | None = None):
    with open(path, "rb") as fh:
        return loads_index(fh.read(), graph)
