"""Quality graphs: ingestion, normalization, threshold views and generators.

Vertices are dense ids in ``[0, n)``. Every edge carries a raw real quality
which is mapped once, at construction, to a dense integer rank by ascending
value; all algorithms compare ranks only. The reserved rank ``top`` (equal to
the number of distinct qualities) exceeds every edge rank and stands for the
infinite quality of a vertex's path to itself.
"""
from __future__ import annotations

import hashlib
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, NamedTuple, Sequence

import numpy as np

__all__ = [
    "GraphFormatError",
    "QualityGraph",
    "QueryTriple",
    "from_edges",
    "load_edge_list",
    "load_dimacs",
    "save_edge_list",
    "save_dimacs",
    "filter_at_threshold",
    "generate_random",
]


class GraphFormatError(ValueError):
    """Raised when an input graph file cannot be parsed."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class QueryTriple(NamedTuple):
    s: int
    t: int
    w: float


def _csr(n: int, src: np.ndarray, dst: np.ndarray, *cols: np.ndarray):
    # rows sorted by (src, dst) so neighbor lists are deterministic
    key = np.lexsort((dst, src))
    src, dst = src[key], dst[key]
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.add.at(indptr, src + 1, 1)
    np.cumsum(indptr, out=indptr)
    return (indptr, dst.astype(np.int32)) + tuple(c[key] for c in cols)


@dataclass(frozen=True, eq=False)
class QualityGraph:
    """Immutable CSR graph with one quality rank (and optional length) per arc.

    For undirected graphs every edge is stored as two arcs with equal rank.
    Directed graphs additionally carry the reverse CSR (``rindptr`` ...),
    used by backward searches.
    """

    n: int
    indptr: np.ndarray
    indices: np.ndarray
    qrank: np.ndarray
    quality_table: np.ndarray
    directed: bool = False
    lengths: np.ndarray | None = None
    original_ids: np.ndarray | None = None
    rindptr: np.ndarray | None = field(default=None, repr=False)
    rindices: np.ndarray | None = field(default=None, repr=False)
    rqrank: np.ndarray | None = field(default=None, repr=False)
    rlengths: np.ndarray | None = field(default=None, repr=False)

    @property
    def edge_count(self) -> int:
        arcs = int(self.indptr[-1])
        return arcs if self.directed else arcs // 2

    m = edge_count

    @property
    def top(self) -> int:
        return len(self.quality_table)

    @property
    def num_qualities(self) -> int:
        return len(self.quality_table)

    def degree(self) -> np.ndarray:
        deg = np.diff(self.indptr)
        if self.directed:
            deg = deg + np.diff(self.rindptr)
        return deg

    def neighbors(self, v: int) -> list[tuple[int, float]]:
        lo, hi = self.indptr[v], self.indptr[v + 1]
        return [(int(u), float(self.quality_table[r]))
                for u, r in zip(self.indices[lo:hi], self.qrank[lo:hi])]

    def arc_lengths(self) -> np.ndarray:
        if self.lengths is None:
            return np.ones(len(self.indices), dtype=np.int64)
        return self.lengths

    def reverse_arc_lengths(self) -> np.ndarray:
        if self.rlengths is None:
            return np.ones(len(self.rindices), dtype=np.int64)
        return self.rlengths

    def threshold_rank(self, w: float) -> int:
        """Smallest rank whose raw quality is >= ``w`` (``top`` if none)."""
        if w == math.inf:
            return self.top
        return int(np.searchsorted(self.quality_table, w, side="left"))

    def quality_of(self, rank: int) -> float:
        return math.inf if rank >= self.top else float(self.quality_table[rank])

    def edges(self) -> list[tuple[int, int, float]]:
        """Edge list with raw qualities; undirected edges reported once (u < v)."""
        src = np.repeat(np.arange(self.n), np.diff(self.indptr))
        keep = np.ones(len(src), dtype=bool) if self.directed else src < self.indices
        q = self.quality_table[self.qrank[keep]]
        return [(int(a), int(b), float(c))
                for a, b, c in zip(src[keep], self.indices[keep], q)]

    def fingerprint(self) -> str:
        h = hashlib.blake2b(digest_size=16)
        h.update(np.array([self.n, int(self.directed)], dtype=np.int64).tobytes())
        for arr in (self.indptr, self.indices, self.qrank, self.quality_table):
            h.update(np.ascontiguousarray(arr).tobytes())
        if self.lengths is not None:
            h.update(self.lengths.astype(np.int64).tobytes())
        return h.hexdigest()

    def same_structure(self, other: "QualityGraph") -> bool:
        return self.fingerprint() == other.fingerprint()


def from_edges(
    edges: Iterable[Sequence],
    n: int | None = None,
    directed: bool = False,
    original_ids: np.ndarray | None = None,
) -> QualityGraph:
    """Normalize ``(u, v, quality[, length])`` tuples into a QualityGraph.

    Self-loops are dropped. Parallel edges collapse to the one with maximum
    quality (shortest length among those).
    """
    rows = [tuple(e) for e in edges]
    has_len = any(len(r) > 3 for r in rows)
    if rows:
        arr = np.array([r[:3] for r in rows], dtype=np.float64)
        u = arr[:, 0].astype(np.int64)
        v = arr[:, 1].astype(np.int64)
        q = arr[:, 2]
        ln = (np.array([r[3] if len(r) > 3 else 1 for r in rows], dtype=np.int64)
              if has_len else None)
    else:
        u = v = np.empty(0, dtype=np.int64)
        q = np.empty(0)
        ln = None
    if len(u) and min(u.min(), v.min()) < 0:
        raise ValueError("negative vertex id")
    if ln is not None and len(ln) and ln.min() <= 0:
        raise ValueError("edge lengths must be positive")
    if n is None:
        n = int(max(u.max(), v.max()) + 1) if len(u) else 0
    elif len(u) and max(u.max(), v.max()) >= n:
        raise ValueError("vertex id out of range")

    loop = u == v
    u, v, q = u[~loop], v[~loop], q[~loop]
    if ln is not None:
        ln = ln[~loop]
    if not directed:
        u, v = np.minimum(u, v), np.maximum(u, v)

    # collapse parallels: best = max quality, then min length
    sec = -ln if ln is not None else np.zeros(len(u), dtype=np.int64)
    key = np.lexsort((sec, q, v, u))[::-1]
    u, v, q, sec = u[key], v[key], q[key], sec[key]
    first = np.ones(len(u), dtype=bool)
    first[1:] = (u[1:] != u[:-1]) | (v[1:] != v[:-1])
    u, v, q = u[first], v[first], q[first]
    ln = (-sec[first]) if ln is not None else None

    table, rank = np.unique(q, return_inverse=True)
    rank = rank.astype(np.int32)
    if directed:
        indptr, indices, qr, *lcol = _csr(n, u, v, rank, *( [ln] if ln is not None else []))
        rindptr, rindices, rqr, *rl = _csr(n, v, u, rank, *( [ln] if ln is not None else []))
        return QualityGraph(
            n=n, indptr=indptr, indices=indices, qrank=qr, quality_table=table,
            directed=True, lengths=lcol[0] if lcol else None, original_ids=original_ids,
            rindptr=rindptr, rindices=rindices, rqrank=rqr, rlengths=rl[0] if rl else None,
        )
    src = np.concatenate([u, v])
    dst = np.concatenate([v, u])
    extra = [np.concatenate([ln, ln])] if ln is not None else []
    indptr, indices, qr, *lcol = _csr(n, src, dst, np.concatenate([rank, rank]), *extra)
    return QualityGraph(
        n=n, indptr=indptr, indices=indices, qrank=qr, quality_table=table,
        directed=False, lengths=lcol[0] if lcol else None, original_ids=original_ids,
    )


_HEADER_N = re.compile(r"#\s*n=(\d+)\b")


def _compact(rows: list[tuple], directed: bool, n_hint: int | None = None) -> QualityGraph:
    if not rows:
        raise GraphFormatError("graph has no edges")
    ids = np.unique(np.array([[r[0], r[1]] for r in rows], dtype=np.int64))
    if n_hint is not None and ids[-1] < n_hint:
        # declared vertex count: keep ids, isolated vertices included
        return from_edges(rows, n=n_hint, directed=directed)
    remap = {int(x): i for i, x in enumerate(ids)}
    dense = [(remap[r[0]], remap[r[1]]) + tuple(r[2:]) for r in rows]
    identity = len(ids) == ids[-1] + 1
    return from_edges(dense, n=len(ids), directed=directed,
                      original_ids=None if identity else ids)


def _parse_int(tok: str, lineno: int) -> int:
    try:
        x = int(tok)
    except ValueError:
        raise GraphFormatError(f"bad vertex id {tok!r}", lineno) from None
    if x < 0:
        raise GraphFormatError(f"negative vertex id {x}", lineno)
    return x


def load_edge_list(path: str | Path, directed: bool = False) -> QualityGraph:
    """Read ``u v q [len]`` lines; ``#`` starts a comment line.

    A ``# n=N`` header (as written by :func:`save_edge_list`) fixes the vertex
    count when every id is below ``N``. Otherwise ids may be sparse; they are
    compacted to ``[0, n)`` in ascending order and the originals are kept in
    ``original_ids``.
    """
    rows = []
    n_hint = None
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                m = _HEADER_N.match(line)
                if m and n_hint is None and not rows:
                    n_hint = int(m.group(1))
                continue
            tok = line.split()
            if len(tok) not in (3, 4):
                raise GraphFormatError("expected 'u v quality [length]'", lineno)
            a, b = _parse_int(tok[0], lineno), _parse_int(tok[1], lineno)
            try:
                q = float(tok[2])
            except ValueError:
                raise GraphFormatError(f"bad quality {tok[2]!r}", lineno) from None
            if not math.isfinite(q):
                raise GraphFormatError("quality must be finite", lineno)
            if len(tok) == 4:
                ln = _parse_int(tok[3], lineno)
                if ln == 0:
                    raise GraphFormatError("edge length must be positive", lineno)
                rows.append((a, b, q, ln))
            else:
                rows.append((a, b, q))
    return _compact(rows, directed, n_hint)


def load_dimacs(path: str | Path, directed: bool = True) -> QualityGraph:
    """Read DIMACS ``.gr`` style files; the arc weight column is the quality.

    DIMACS vertex ids are 1-based; the returned graph is 0-based (compacted).
    """
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            tok = line.split()
            if not tok or tok[0] in ("c", "p"):
                continue
            if tok[0] != "a" or len(tok) != 4:
                raise GraphFormatError("expected 'a u v q'", lineno)
            a, b = _parse_int(tok[1], lineno), _parse_int(tok[2], lineno)
            try:
                q = float(tok[3])
            except ValueError:
                raise GraphFormatError(f"bad quality {tok[3]!r}", lineno) from None
            rows.append((a, b, q))
    return _compact(rows, directed)


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def save_edge_list(g: QualityGraph, path: str | Path) -> None:
    ids = g.original_ids
    lens = None
    if g.lengths is not None:
        src = np.repeat(np.arange(g.n), np.diff(g.indptr))
        keep = np.ones(len(src), dtype=bool) if g.directed else src < g.indices
        lens = g.lengths[keep]
    with open(path, "w") as fh:
        fh.write(f"# n={g.n} m={g.edge_count} directed={int(g.directed)}\n")
        for i, (a, b, q) in enumerate(g.edges()):
            if ids is not None:
                a, b = int(ids[a]), int(ids[b])
            tail = f" {int(lens[i])}" if lens is not None else ""
            fh.write(f"{a} {b} {_fmt(q)}{tail}\n")


def save_dimacs(g: QualityGraph, path: str | Path) -> None:
    """Write ``a u v q`` arc lines with 1-based ids (both arcs if undirected)."""
    ids = g.original_ids
    arcs = []
    for a, b, q in g.edges():
        if ids is not None:
            a, b = int(ids[a]), int(ids[b])
        else:
            a, b = a + 1, b + 1
        arcs.append((a, b, q))
        if not g.directed:
            arcs.append((b, a, q))
    with open(path, "w") as fh:
        fh.write(f"p sp {g.n} {len(arcs)}\n")
        for a, b, q in arcs:
            fh.write(f"a {a} {b} {_fmt(q)}\n")


def filter_at_threshold(g: QualityGraph, w: float) -> QualityGraph:
    """Subgraph on the same vertex set keeping only edges with quality >= w."""
    r = g.threshold_rank(w)
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    keep = g.qrank >= r
    if not g.directed:
        keep &= src < g.indices
    cols = [src[keep], g.indices[keep], g.quality_table[g.qrank[keep]]]
    if g.lengths is not None:
        cols.append(g.lengths[keep])
    return from_edges(zip(*cols), n=g.n, directed=g.directed,
                      original_ids=g.original_ids)


def _gnm_pairs(n: int, m: int, rng: np.random.Generator, connected: bool):
    total = n * (n - 1) // 2
    chosen: set[int] = set()
    if connected and n > 1:
        perm = rng.permutation(n)
        for i in range(1, n):
            a, b = int(perm[i]), int(perm[rng.integers(i)])
            a, b = min(a, b), max(a, b)
            chosen.add(a * n + b)
    need = m - len(chosen)
    if total <= 4_000_000 and need > 0:
        a, b = np.triu_indices(n, 1)
        codes = a * n + b
        if chosen:
            codes = codes[~np.isin(codes, np.fromiter(chosen, np.int64))]
        pick = rng.choice(len(codes), size=need, replace=False)
        chosen.update(int(c) for c in codes[np.sort(pick)])
    while len(chosen) < m:
        a = rng.integers(0, n, size=2 * (m - len(chosen)) + 16)
        b = rng.integers(0, n, size=len(a))
        for x, y in zip(a.tolist(), b.tolist()):
            if x == y:
                continue
            if x > y:
                x, y = y, x
            chosen.add(x * n + y)
            if len(chosen) == m:
                break
    codes = np.sort(np.fromiter(chosen, np.int64))
    return codes // n, codes % n


def generate_random(
    n: int,
    m: int | None,
    k_qualities: int,
    model: str = "gnm",
    seed: int = 0,
    connected: bool = False,
    directed: bool = False,
) -> QualityGraph:
    """Seeded synthetic graph with qualities drawn uniformly from ``1..k``.

    ``gnm`` picks ``m`` distinct non-loop edges uniformly (``connected=True``
    seeds a random spanning tree first). ``grid`` builds the most square
    ``r x c`` lattice with ``r * c == n``; ``m`` must then be ``None`` or the
    lattice edge count. ``directed`` orients each gnm edge at random.
    """
    if k_qualities < 1:
        raise ValueError("k_qualities must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    if model == "gnm":
        if m is None:
            raise ValueError("gnm needs m")
        cap = n * (n - 1) // 2
        if m > cap:
            raise ValueError(f"m={m} exceeds max simple-graph edges ({cap})")
        if connected and m < n - 1:
            raise ValueError("connected gnm needs m >= n - 1")
        a, b = _gnm_pairs(n, m, rng, connected)
        if directed:
            flip = rng.random(len(a)) < 0.5
            a, b = np.where(flip, b, a), np.where(flip, a, b)
    elif model == "grid":
        r = math.isqrt(n)
        while n % r:
            r -= 1
        c = n // r
        ids = np.arange(n).reshape(r, c)
        a = np.concatenate([ids[:, :-1].ravel(), ids[:-1, :].ravel()])
        b = np.concatenate([ids[:, 1:].ravel(), ids[1:, :].ravel()])
        if m is not None and m != len(a):
            raise ValueError(f"a {r}x{c} grid has {len(a)} edges, not {m}")
    else:
        raise ValueError(f"unknown model {model!r}")
    q = rng.integers(1, k_qualities + 1, size=len(a)).astype(np.float64)
    return from_edges(zip(a.tolist(), b.tolist(), q.tolist()), n=n, directed=directed)
