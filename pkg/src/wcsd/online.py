"""Index-free constrained search: the online baselines and the test oracle."""
from __future__ import annotations

import heapq

import numba as nb
import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from ._common import INF
from .graph import QualityGraph, filter_at_threshold

__all__ = [
    "FrontierState",
    "PartitionCache",
    "wc_bfs",
    "wc_dijkstra",
    "partitioned_bfs",
    "wc_bfs_many",
    "wc_dijkstra_many",
    "partitioned_bfs_many",
    "all_pairs_oracle",
    "ORACLE_MAX_N",
]

ORACLE_MAX_N = 512


class FrontierState:
    """Reusable per-worker search scratch.

    A vertex is marked iff its stamp equals the current epoch, so starting a
    new search is a single counter bump instead of an O(n) clear.
    """

    def __init__(self, n: int):
        self.n = n
        self.visited = np.zeros(n, dtype=np.int64)
        self.settled = np.zeros(n, dtype=np.int64)
        self.dist = np.zeros(n, dtype=np.int64)
        self.queue = np.empty(max(n, 1), dtype=np.int32)
        self.epoch = 0

    def next_epoch(self) -> int:
        self.epoch += 1
        return self.epoch

    def is_visited(self, v: int) -> bool:
        return bool(self.visited[v] == self.epoch)


@nb.njit(cache=True)
def _cbfs(indptr, indices, qrank, s, t, w, visited, epoch, queue, inf):
    if s == t:
        return 0
    visited[s] = epoch
    queue[0] = s
    head = 0
    tail = 1
    dis = 0
    while head < tail:
        size = tail - head
        dis += 1
        for _ in range(size):
            u = queue[head]
            head += 1
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if qrank[e] < w or visited[v] == epoch:
                    continue
                if v == t:
                    return dis
                visited[v] = epoch
                queue[tail] = v
                tail += 1
    return inf


@nb.njit(cache=True)
def _cdijkstra(indptr, indices, qrank, lens, s, t, w, seen, settled, dist, epoch, inf):
    if s == t:
        return 0
    seen[s] = epoch
    dist[s] = 0
    heap = [(np.int64(0), np.int64(s))]
    while len(heap) > 0:
        d, u = heapq.heappop(heap)
        if settled[u] == epoch:
            continue
        if u == t:
            return d
        settled[u] = epoch
        for e in range(indptr[u], indptr[u + 1]):
            if qrank[e] < w:
                continue
            v = indices[e]
            nd = d + lens[e]
            if seen[v] != epoch or nd < dist[v]:
                seen[v] = epoch
                dist[v] = nd
                heapq.heappush(heap, (nd, np.int64(v)))
    return inf


@nb.njit(cache=True)
def _cbfs_batch(indptr, indices, qrank, S, T, W, visited, epoch0, queue, inf, out):
    for i in range(S.shape[0]):
        out[i] = _cbfs(indptr, indices, qrank, S[i], T[i], W[i], visited, epoch0 + i,
                       queue, inf)


@nb.njit(cache=True)
def _cdijkstra_batch(indptr, indices, qrank, lens, S, T, W, seen, settled, dist, epoch0,
                     inf, out):
    for i in range(S.shape[0]):
        out[i] = _cdijkstra(indptr, indices, qrank, lens, S[i], T[i], W[i], seen, settled,
                            dist, epoch0 + i, inf)


def _unpack(g: QualityGraph, q) -> tuple[int, int, int]:
    s, t, w = q
    s, t = int(s), int(t)
    if not (0 <= s < g.n and 0 <= t < g.n):
        raise ValueError(f"vertex id out of range for n={g.n}: ({s}, {t})")
    return s, t, g.threshold_rank(w)


def _scratch(g, scratch):
    if scratch is None:
        return FrontierState(g.n)
    if scratch.n < g.n:
        raise ValueError("scratch is smaller than the graph")
    return scratch


def wc_bfs(g: QualityGraph, q, scratch: FrontierState | None = None) -> int:
    """Constrained BFS: length of the shortest path from ``s`` to ``t`` using
    only edges of quality >= ``w``; ``INF`` when none exists.

    Returns as soon as ``t`` is discovered. Unit edge lengths are assumed.
    """
    s, t, r = _unpack(g, q)
    st = _scratch(g, scratch)
    return int(_cbfs(g.indptr, g.indices, g.qrank, s, t, r, st.visited, st.next_epoch(),
                     st.queue, INF))


def wc_dijkstra(g: QualityGraph, q, scratch: FrontierState | None = None) -> int:
    """Constrained Dijkstra over ``g.lengths`` (unit when absent)."""
    s, t, r = _unpack(g, q)
    st = _scratch(g, scratch)
    lens = g.arc_lengths()
    if len(lens) and lens.min() <= 0:
        raise ValueError("edge lengths must be positive")
    return int(_cdijkstra(g.indptr, g.indices, g.qrank, lens, s, t, r, st.visited,
                          st.settled, st.dist, st.next_epoch(), INF))


class PartitionCache:
    """One filtered graph per distinct quality: partition ``r`` keeps the
    edges whose quality is >= ``quality_table[r]``."""

    def __init__(self, g: QualityGraph):
        self.quality_table = g.quality_table
        self.parts = [filter_at_threshold(g, x) for x in g.quality_table]

    def part_for(self, w: float) -> QualityGraph | None:
        r = int(np.searchsorted(self.quality_table, w, side="left"))
        return self.parts[r] if r < len(self.parts) else None


def partitioned_bfs(g: QualityGraph, q, cache: PartitionCache,
                    scratch: FrontierState | None = None) -> int:
    """Plain BFS on the pre-filtered partition matching the threshold."""
    s, t, _ = _unpack(g, q)
    part = cache.part_for(q[2])
    if part is None:
        return 0 if s == t else INF
    st = _scratch(g, scratch)
    return int(_cbfs(part.indptr, part.indices, part.qrank, s, t, -1, st.visited,
                     st.next_epoch(), st.queue, INF))


def _batch_arrays(S, T, W):
    return (np.ascontiguousarray(S, dtype=np.int64), np.ascontiguousarray(T, dtype=np.int64),
            np.ascontiguousarray(W, dtype=np.int64))


def wc_bfs_many(g: QualityGraph, S, T, W_rank, scratch: FrontierState | None = None):
    """Vectorised :func:`wc_bfs`; thresholds are given as quality ranks."""
    S, T, W = _batch_arrays(S, T, W_rank)
    st = _scratch(g, scratch)
    out = np.empty(len(S), dtype=np.int64)
    e0 = st.epoch + 1
    _cbfs_batch(g.indptr, g.indices, g.qrank, S, T, W, st.visited, e0, st.queue, INF, out)
    st.epoch += len(S)
    return out


def wc_dijkstra_many(g: QualityGraph, S, T, W_rank, scratch: FrontierState | None = None):
    S, T, W = _batch_arrays(S, T, W_rank)
    st = _scratch(g, scratch)
    out = np.empty(len(S), dtype=np.int64)
    e0 = st.epoch + 1
    _cdijkstra_batch(g.indptr, g.indices, g.qrank, g.arc_lengths(), S, T, W, st.visited,
                     st.settled, st.dist, e0, INF, out)
    st.epoch += len(S)
    return out


def partitioned_bfs_many(g: QualityGraph, S, T, W_rank, cache: PartitionCache,
                         scratch: FrontierState | None = None):
    S, T, W = _batch_arrays(S, T, W_rank)
    st = _scratch(g, scratch)
    out = np.empty(len(S), dtype=np.int64)
    for r in np.unique(W):
        sel = np.flatnonzero(W == r)
        if r >= len(cache.parts):
            out[sel] = np.where(S[sel] == T[sel], 0, INF)
            continue
        part = cache.parts[r]
        res = np.empty(len(sel), dtype=np.int64)
        _cbfs_batch(part.indptr, part.indices, part.qrank, S[sel], T[sel],
                    np.full(len(sel), -1, np.int64), st.visited, st.epoch + 1, st.queue,
                    INF, res)
        st.epoch += len(sel)
        out[sel] = res
    return out


def all_pairs_oracle(g: QualityGraph, max_n: int = ORACLE_MAX_N) -> np.ndarray:
    """Exhaustive table ``D[s, t, r]`` of constrained distances for every
    ordered pair and every quality rank ``r`` (threshold ``quality_table[r]``).

    Computed with scipy's graph shortest paths on each filtered graph, i.e.
    independently of the search kernels it is used to check.
    """
    if g.n > max_n:
        raise ValueError(f"oracle guard: n={g.n} exceeds {max_n}")
    R = g.num_qualities
    out = np.full((g.n, g.n, max(R, 0)), INF, dtype=np.int64)
    weighted = g.lengths is not None
    for r in range(R):
        keep = g.qrank >= r
        indptr = np.concatenate([[0], np.cumsum(keep)])[g.indptr]
        data = (g.lengths[keep] if weighted else np.ones(int(keep.sum()))).astype(np.float64)
        mat = csr_matrix((data, g.indices[keep], indptr), shape=(g.n, g.n))
        D = shortest_path(mat, method="D", directed=g.directed, unweighted=not weighted)
        fin = np.isfinite(D)
        out[:, :, r] = np.where(fin, np.where(fin, D, 0).astype(np.int64), INF)
    return out
