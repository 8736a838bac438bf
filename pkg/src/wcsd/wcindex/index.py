"""WC-INDEX: one 2-hop labeling answering every quality threshold.

Each vertex ``u`` holds entries ``(hub, dist, quality)``: ``dist`` is the
shortest length of a path between ``u`` and ``hub`` whose weakest edge has
``quality``. Entries are grouped by hub (ascending hub priority) and, inside a
group, ``dist`` and ``quality`` increase together.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .._common import INF, MemoryCapExceeded
from ..graph import QualityGraph
from ..ordering import VertexOrder, degree_order
from . import _kernels as K

__all__ = [
    "LabelStore",
    "WcIndex",
    "StaleIndexError",
    "QueryTrace",
    "build",
    "build_directed",
    "query_distance",
    "query_many",
    "trace_query",
    "reconstruct_path",
    "DEFAULT_MEM_CAP",
    "ENTRY_BYTES",
]

DEFAULT_MEM_CAP = 2 * 1024**3
#: bytes charged per label entry by the memory guard (hub, dist, quality)
ENTRY_BYTES = 16


class StaleIndexError(ValueError):
    """The index was built for a different graph."""


@dataclass(eq=False)
class LabelStore:
    """Flat per-vertex label arrays plus a hub-group directory.

    Entries of vertex ``v`` are ``offsets[v]:offsets[v+1]``; hubs are stored
    as positions in the vertex order. Groups of ``v`` are
    ``gptr[v]:gptr[v+1]``; group ``g`` covers entries ``gbeg[g]:gbeg[g+1]``.
    """

    offsets: np.ndarray
    hub: np.ndarray
    dist: np.ndarray
    qual: np.ndarray
    parent: np.ndarray | None = None
    seq: np.ndarray | None = None
    gptr: np.ndarray = field(init=False, repr=False)
    ghub: np.ndarray = field(init=False, repr=False)
    gbeg: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        n = len(self.offsets) - 1
        E = len(self.hub)
        starts = np.ones(E, dtype=bool)
        if E:
            starts[1:] = self.hub[1:] != self.hub[:-1]
            starts[self.offsets[:-1][self.offsets[:-1] < E]] = True
        gidx = np.flatnonzero(starts)
        self.ghub = self.hub[gidx].astype(np.int32)
        self.gbeg = np.concatenate([gidx, [E]]).astype(np.int64)
        self.gptr = np.searchsorted(gidx, self.offsets).astype(np.int64)
        assert len(self.gptr) == n + 1

    @property
    def n(self) -> int:
        return len(self.offsets) - 1

    @property
    def total_entries(self) -> int:
        return len(self.hub)

    def size(self, v: int) -> int:
        return int(self.offsets[v + 1] - self.offsets[v])

    def groups(self, v: int):
        """Yield ``(hub_rank, start, stop)`` for each hub group of ``v``."""
        for g in range(self.gptr[v], self.gptr[v + 1]):
            yield int(self.ghub[g]), int(self.gbeg[g]), int(self.gbeg[g + 1])

    def nbytes(self) -> int:
        arrs = [self.offsets, self.hub, self.dist, self.qual]
        if self.parent is not None:
            arrs.append(self.parent)
        return int(sum(a.nbytes for a in arrs))


@dataclass(eq=False)
class WcIndex:
    n: int
    order: VertexOrder
    quality_table: np.ndarray
    fingerprint: str
    edge_count: int
    directed: bool
    inn: LabelStore
    out: LabelStore
    path_mode: bool = False
    weighted: bool = False
    meta: dict = field(default_factory=dict)

    @property
    def top(self) -> int:
        return len(self.quality_table)

    @property
    def total_entries(self) -> int:
        if self.directed:
            return self.inn.total_entries + self.out.total_entries
        return self.inn.total_entries

    def nbytes(self) -> int:
        if self.directed:
            return self.inn.nbytes() + self.out.nbytes()
        return self.inn.nbytes()

    def threshold_rank(self, w: float) -> int:
        if w == math.inf:
            return self.top
        return int(np.searchsorted(self.quality_table, w, side="left"))

    def quality_of(self, rank: int) -> float:
        return math.inf if rank >= self.top else float(self.quality_table[rank])

    def store(self, family: str) -> LabelStore:
        if family not in ("in", "out"):
            raise ValueError("family must be 'in' or 'out'")
        return self.inn if family == "in" else self.out

    def labels(self, v: int, family: str = "in") -> list[tuple[int, int, float]]:
        """Entries of ``v`` as ``(hub vertex, dist, raw quality)``."""
        st = self.store(family)
        seq = self.order.sequence
        lo, hi = st.offsets[v], st.offsets[v + 1]
        return [(int(seq[h]), int(d), self.quality_of(int(q)))
                for h, d, q in zip(st.hub[lo:hi], st.dist[lo:hi], st.qual[lo:hi])]

    def label_table(self, family: str = "in") -> dict[int, list[tuple[int, int, float]]]:
        return {v: self.labels(v, family) for v in range(self.n)}

    def check_graph(self, g: QualityGraph) -> None:
        if g.n != self.n or g.fingerprint() != self.fingerprint:
            raise StaleIndexError("index fingerprint does not match the graph")

    def query(self, s: int, t: int, w: float) -> int:
        return query_distance(self, (s, t, w))


def _rank_space(g: QualityGraph, order: VertexOrder, reverse: bool = False):
    """CSR of ``g`` relabelled so vertex ``i`` is ``order.sequence[i]``."""
    if reverse:
        indptr, indices, qrank, lens = g.rindptr, g.rindices, g.rqrank, g.reverse_arc_lengths()
    else:
        indptr, indices, qrank, lens = g.indptr, g.indices, g.qrank, g.arc_lengths()
    seq, rank = order.sequence, order.rank
    deg = np.diff(indptr)[seq]
    new_ptr = np.concatenate([[0], np.cumsum(deg)]).astype(np.int64)
    take = np.repeat(indptr[seq] - new_ptr[:-1], deg) + np.arange(new_ptr[-1])
    return (new_ptr, rank[indices[take]].astype(np.int32), qrank[take].astype(np.int32),
            lens[take].astype(np.int64))


def _run_pool(g: QualityGraph, order: VertexOrder, fast: bool, n_sources: int,
              max_entries: int):
    if len(order) != g.n:
        raise ValueError(f"order has {len(order)} vertices, graph has {g.n}")
    ip, ix, iq, il = _rank_space(g, order)
    if g.directed:
        rip, rix, riq, ril = _rank_space(g, order, reverse=True)
    else:
        rip, rix, riq, ril = ip, ix, iq, il
    if g.lengths is None:
        res = K.build_pool(g.n, g.top, ip, ix, iq, rip, rix, riq, g.directed, fast,
                           n_sources, max_entries)
    else:
        res = K.build_pool_weighted(g.n, g.top, ip, ix, iq, il, rip, rix, riq, ril,
                                    g.directed, fast, n_sources, max_entries)
    return res


def _store_from_pool(n, order, hub, dist, qual, par, seq, vstart, vsize, family, path_mode):
    # blocks are indexed by rank; stores are indexed by vertex id
    r = order.rank
    starts = vstart[family][r]
    sizes = vsize[family][r]
    offsets = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
    take = np.repeat(starts - offsets[:-1], sizes) + np.arange(offsets[-1])
    parent = order.sequence[par[take]].astype(np.int32) if path_mode else None
    return LabelStore(offsets=offsets, hub=hub[take].astype(np.int32),
                      dist=dist[take].astype(np.int64), qual=qual[take].astype(np.int32),
                      parent=parent, seq=seq[take].astype(np.int64))


def _build(g: QualityGraph, order: VertexOrder | None, path_mode: bool, fast: bool,
           mem_cap: int | None) -> WcIndex:
    if order is None:
        order = degree_order(g)
    cap = DEFAULT_MEM_CAP if mem_cap is None else mem_cap
    max_entries = max(cap // ENTRY_BYTES, 1)
    t0 = time.perf_counter()
    status, count, hub, dist, qual, par, seq, vstart, vsize = _run_pool(
        g, order, fast, g.n, max_entries)
    if status == K.MEM_EXCEEDED:
        raise MemoryCapExceeded("wc-index", cap, int(count))
    elapsed = time.perf_counter() - t0
    fams = (K.FAM_IN, K.FAM_OUT) if g.directed else (0,)
    stores = [_store_from_pool(g.n, order, hub, dist, qual, par, seq, vstart, vsize, f,
                               path_mode) for f in fams]
    inn = stores[0]
    out = stores[1] if g.directed else inn
    return WcIndex(
        n=g.n, order=order, quality_table=g.quality_table.copy(), fingerprint=g.fingerprint(),
        edge_count=g.edge_count, directed=g.directed, inn=inn, out=out, path_mode=path_mode,
        weighted=g.lengths is not None,
        meta={"build_seconds": elapsed, "prune": "fast" if fast else "naive"},
    )


def build(g: QualityGraph, order: VertexOrder | None = None, *, path_mode: bool = False,
          fast: bool = True, mem_cap: int | None = None) -> WcIndex:
    """Construct the WC-INDEX of an undirected graph.

    ``order`` defaults to degree order. ``fast`` selects the group-wise cover
    test with the per-round result cache; ``fast=False`` uses the
    entry-by-entry test. Both produce identical labels. ``path_mode`` keeps
    a parent vertex per entry for :func:`reconstruct_path`. Graphs with
    ``lengths`` are built with a heap-ordered search instead of BFS rounds.
    """
    if g.directed:
        raise ValueError("graph is directed; use build_directed")
    return _build(g, order, path_mode, fast, mem_cap)


def build_directed(g: QualityGraph, order: VertexOrder | None = None, *,
                   path_mode: bool = False, fast: bool = True,
                   mem_cap: int | None = None) -> WcIndex:
    """Construct in/out label sets of a directed graph.

    Each source runs a forward search (labelling ``L_in`` of reached
    vertices) and a backward search (labelling ``L_out``). A query
    ``(s, t, w)`` merges ``L_out(s)`` with ``L_in(t)``.
    """
    if not g.directed:
        raise ValueError("graph is undirected; use build")
    return _build(g, order, path_mode, fast, mem_cap)


def _check_vertices(idx: WcIndex, s: int, t: int):
    if not (0 <= s < idx.n and 0 <= t < idx.n):
        raise ValueError(f"vertex id out of range for n={idx.n}: ({s}, {t})")


_NO_CAND = np.empty((0, 3), dtype=np.int64)


def _kernel_query(idx: WcIndex, s: int, t: int, r: int, trace: bool = False):
    a, b = idx.out, idx.inn
    cand = np.empty((min(len(a.ghub), len(b.ghub)) + 1, 3), np.int64) if trace else _NO_CAND
    res = K.query_kernel(s, t, r, a.gptr, a.ghub, a.gbeg, a.dist, a.qual,
                         b.gptr, b.ghub, b.gbeg, b.dist, b.qual, INF, trace, cand)
    return res, cand


def query_distance(idx: WcIndex, q, graph: QualityGraph | None = None) -> int:
    """w-constrained distance from the labels alone; ``INF`` if none.

    ``q`` is ``(s, t, w)`` with ``w`` a raw quality. Passing ``graph``
    verifies the index fingerprint first.
    """
    if graph is not None:
        idx.check_graph(graph)
    s, t, w = q
    s, t = int(s), int(t)
    _check_vertices(idx, s, t)
    (best, _, _, _, _), _ = _kernel_query(idx, s, t, idx.threshold_rank(w))
    return int(best)


@dataclass
class QueryTrace:
    distance: int
    touched: int
    label_sizes: int
    #: one ``(hub vertex, d_s, d_t, d_s + d_t)`` per shared hub with qualifying entries
    candidates: list[tuple[int, int, int, int]]


def trace_query(idx: WcIndex, q) -> QueryTrace:
    s, t, w = q
    s, t = int(s), int(t)
    _check_vertices(idx, s, t)
    (best, touched, nc, _, _), cand = _kernel_query(idx, s, t, idx.threshold_rank(w), True)
    seq = idx.order.sequence
    cands = [(int(seq[h]), int(a), int(b), int(a + b)) for h, a, b in cand[:nc]]
    sizes = idx.out.size(s) + idx.inn.size(t)
    return QueryTrace(int(best), int(touched), sizes, cands)


def query_many(idx: WcIndex, S, T, W_rank):
    """Batch query with quality *ranks*; returns ``(dist, touched, sizes)``."""
    S = np.ascontiguousarray(S, dtype=np.int64)
    T = np.ascontiguousarray(T, dtype=np.int64)
    W = np.ascontiguousarray(W_rank, dtype=np.int64)
    out = np.empty(len(S), np.int64)
    touched = np.empty(len(S), np.int64)
    sizes = np.empty(len(S), np.int64)
    a, b = idx.out, idx.inn
    K.query_batch(S, T, W, a.gptr, a.ghub, a.gbeg, a.dist, a.qual,
                  b.gptr, b.ghub, b.gbeg, b.dist, b.qual, INF, out, touched, sizes)
    return out, touched, sizes


def _walk(idx: WcIndex, st: LabelStore, v: int, hub_rank: int, r: int) -> list[int]:
    hub_v = int(idx.order.sequence[hub_rank])
    path = [v]
    x = v
    while x != hub_v:
        lo, hi = st.gptr[x], st.gptr[x + 1]
        g = lo + int(np.searchsorted(st.ghub[lo:hi], hub_rank))
        if g >= hi or st.ghub[g] != hub_rank:
            raise RuntimeError(f"broken parent chain at vertex {x}")
        a, b = st.gbeg[g], st.gbeg[g + 1]
        e = a + int(np.searchsorted(st.qual[a:b], r))
        if e >= b:
            raise RuntimeError(f"broken parent chain at vertex {x}")
        x = int(st.parent[e])
        path.append(x)
        if len(path) > idx.n:
            raise RuntimeError("parent chain does not terminate")
    return path


def reconstruct_path(idx: WcIndex, q) -> list[int] | None:
    """A shortest w-path ``[s, ..., t]`` recovered from parent links, or
    ``None`` when no w-path exists. Requires an index built with
    ``path_mode=True``.
    """
    if not idx.path_mode:
        raise ValueError("index was built without path_mode")
    s, t, w = q
    s, t = int(s), int(t)
    _check_vertices(idx, s, t)
    r = idx.threshold_rank(w)
    (best, _, _, bi, bj), _ = _kernel_query(idx, s, t, r)
    if best >= INF:
        return None
    if s == t:
        return [s]
    hub_rank = int(idx.out.hub[bi])
    head = _walk(idx, idx.out, s, hub_rank, r)
    tail = _walk(idx, idx.inn, t, hub_rank, r)
    return head + tail[-2::-1]
