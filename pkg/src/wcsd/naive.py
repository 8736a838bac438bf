"""Per-threshold baseline: one pruned landmark labeling per distinct quality.

Sub-index ``r`` labels the graph filtered to edges of quality >= the
``r``-th distinct quality. All sub-indices share one vertex order.
"""
from __future__ import annotations

import heapq
import time
from dataclasses import dataclass, field

import numba as nb
import numpy as np

from ._common import INF, MemoryCapExceeded
from .graph import QualityGraph
from .ordering import VertexOrder, degree_order
from .wcindex._kernels import _grow
from .wcindex.index import DEFAULT_MEM_CAP, LabelStore, WcIndex, _rank_space

__all__ = ["PerThresholdIndex", "build_naive", "query_naive", "query_naive_many",
           "flatten_naive", "NAIVE_ENTRY_BYTES"]

#: bytes charged per (hub, dist) entry by the memory guard
NAIVE_ENTRY_BYTES = 12


@nb.njit(cache=True)
def _pll(n, indptr, indices, qrank, lens, thr, weighted, max_entries, used):
    """Pruned landmark labeling on arcs with ``qrank >= thr`` (rank space).

    Returns ``(ok, count, hub, dist, owner)`` in append order.
    """
    cap = 2 * n + 16
    hub = np.empty(cap, np.int32)
    dist = np.empty(cap, np.int64)
    owner = np.empty(cap, np.int32)
    nxt = np.empty(cap, np.int64)
    head = np.full(n, -1, np.int64)
    tail = np.full(n, -1, np.int64)
    count = 0
    T = np.full(n, -1, np.int64)
    dv = np.zeros(n, np.int64)
    stamp = np.full(n, -1, np.int64)
    done = np.full(n, -1, np.int64)
    queue = np.empty(n, np.int32)
    for k in range(n):
        e = head[k]
        while e != -1:
            T[hub[e]] = dist[e]
            e = nxt[e]
        T[k] = 0
        heap = [(np.int64(0), np.int64(k))]
        qh = 0
        qt = 0
        if not weighted:
            queue[qt] = k
            qt += 1
        stamp[k] = k
        dv[k] = 0
        while True:
            if weighted:
                if len(heap) == 0:
                    break
                d, u = heapq.heappop(heap)
                if done[u] == k:
                    continue
                done[u] = k
            else:
                if qh == qt:
                    break
                u = queue[qh]
                qh += 1
                d = dv[u]
            covered = False
            if u != k:
                e = head[u]
                while e != -1:
                    h = hub[e]
                    if T[h] >= 0 and T[h] + dist[e] <= d:
                        covered = True
                        break
                    e = nxt[e]
            if covered:
                continue
            if count >= max_entries - used:
                return False, count, hub, dist, owner
            if count == hub.shape[0]:
                hub = _grow(hub, count + 1)
                dist = _grow(dist, count + 1)
                owner = _grow(owner, count + 1)
                nxt = _grow(nxt, count + 1)
            hub[count] = k
            dist[count] = d
            owner[count] = u
            nxt[count] = -1
            if tail[u] == -1:
                head[u] = count
            else:
                nxt[tail[u]] = count
            tail[u] = count
            count += 1
            for a in range(indptr[u], indptr[u + 1]):
                v = indices[a]
                if v <= k or qrank[a] < thr:
                    continue
                if weighted:
                    nd = d + lens[a]
                    if stamp[v] != k or nd < dv[v]:
                        stamp[v] = k
                        dv[v] = nd
                        heapq.heappush(heap, (nd, np.int64(v)))
                elif stamp[v] != k:
                    stamp[v] = k
                    dv[v] = d + 1
                    queue[qt] = v
                    qt += 1
        e = head[k]
        while e != -1:
            T[hub[e]] = -1
            e = nxt[e]
        T[k] = -1
    return True, count, hub, dist, owner


@dataclass(eq=False)
class PerThresholdIndex:
    n: int
    order: VertexOrder
    quality_table: np.ndarray
    fingerprint: str
    #: one flat label set per threshold rank: (offsets, hub ranks, dists)
    subs: list[tuple[np.ndarray, np.ndarray, np.ndarray]]
    meta: dict = field(default_factory=dict)

    @property
    def thresholds(self) -> list[int]:
        return list(range(len(self.subs)))

    @property
    def total_entries(self) -> int:
        return int(sum(len(h) for _, h, _ in self.subs))

    def sub_sizes(self) -> list[int]:
        return [len(h) for _, h, _ in self.subs]

    def labels(self, r: int, v: int) -> list[tuple[int, int]]:
        off, hub, dist = self.subs[r]
        seq = self.order.sequence
        return [(int(seq[h]), int(d)) for h, d in
                zip(hub[off[v]:off[v + 1]], dist[off[v]:off[v + 1]])]

    def nbytes(self) -> int:
        return int(sum(o.nbytes + h.nbytes + d.nbytes for o, h, d in self.subs))


def build_naive(g: QualityGraph, order: VertexOrder | None = None,
                mem_cap: int | None = None) -> PerThresholdIndex:
    """Build ``|w|`` pruned landmark labelings, one per distinct quality.

    Raises :class:`MemoryCapExceeded` once the combined entry count would
    pass ``mem_cap`` bytes (default 2 GiB).
    """
    if g.directed:
        raise ValueError("the per-threshold baseline supports undirected graphs only")
    if order is None:
        order = degree_order(g)
    if len(order) != g.n:
        raise ValueError(f"order has {len(order)} vertices, graph has {g.n}")
    cap = DEFAULT_MEM_CAP if mem_cap is None else mem_cap
    max_entries = max(cap // NAIVE_ENTRY_BYTES, 1)
    ip, ix, iq, il = _rank_space(g, order)
    weighted = g.lengths is not None
    subs = []
    used = 0
    t0 = time.perf_counter()
    for r in range(g.num_qualities):
        ok, count, hub, dist, owner = _pll(g.n, ip, ix, iq, il, r, weighted, max_entries, used)
        if not ok:
            raise MemoryCapExceeded("naive", cap, used + int(count))
        used += int(count)
        key = np.argsort(owner[:count], kind="stable")
        offsets = np.searchsorted(owner[:count][key], np.arange(g.n + 1)).astype(np.int64)
        # owners are rank positions; keep rank-space rows
        subs.append((offsets, hub[key].copy(), dist[key].copy()))
    # reindex rows from rank space to vertex ids
    fixed = []
    for offsets, hub, dist in subs:
        sizes = np.diff(offsets)[order.rank]
        new_off = np.concatenate([[0], np.cumsum(sizes)]).astype(np.int64)
        take = np.repeat(offsets[order.rank] - new_off[:-1], sizes) + np.arange(new_off[-1])
        fixed.append((new_off, hub[take], dist[take]))
    return PerThresholdIndex(n=g.n, order=order, quality_table=g.quality_table.copy(),
                             fingerprint=g.fingerprint(), subs=fixed,
                             meta={"build_seconds": time.perf_counter() - t0})


@nb.njit(cache=True)
def _merge(off, hub, dist, s, t, inf):
    i, ie = off[s], off[s + 1]
    j, je = off[t], off[t + 1]
    best = inf
    while i < ie and j < je:
        if hub[i] < hub[j]:
            i += 1
        elif hub[i] > hub[j]:
            j += 1
        else:
            x = dist[i] + dist[j]
            if x < best:
                best = x
            i += 1
            j += 1
    return best


@nb.njit(cache=True)
def _merge_batch(off, hub, dist, S, T, inf, out):
    for q in range(S.shape[0]):
        out[q] = _merge(off, hub, dist, S[q], T[q], inf)


def query_naive(idx: PerThresholdIndex, q) -> int:
    """Hub-merge on the sub-index of the smallest threshold >= ``w``."""
    s, t, w = q
    s, t = int(s), int(t)
    if not (0 <= s < idx.n and 0 <= t < idx.n):
        raise ValueError(f"vertex id out of range for n={idx.n}: ({s}, {t})")
    if s == t:
        return 0
    r = int(np.searchsorted(idx.quality_table, w, side="left"))
    if r >= len(idx.subs):
        return INF
    off, hub, dist = idx.subs[r]
    return int(_merge(off, hub, dist, s, t, INF))


def query_naive_many(idx: PerThresholdIndex, S, T, W_rank):
    S = np.ascontiguousarray(S, dtype=np.int64)
    T = np.ascontiguousarray(T, dtype=np.int64)
    W = np.ascontiguousarray(W_rank, dtype=np.int64)
    out = np.where(S == T, 0, INF).astype(np.int64)
    for r in np.unique(W):
        if r >= len(idx.subs):
            continue
        sel = np.flatnonzero((W == r) & (S != T))
        res = np.empty(len(sel), np.int64)
        off, hub, dist = idx.subs[r]
        _merge_batch(off, hub, dist, S[sel], T[sel], INF, res)
        out[sel] = res
    return out


def flatten_naive(idx: PerThresholdIndex, g: QualityGraph) -> WcIndex:
    """Union of all sub-indices as ``(hub, dist, threshold)`` triples.

    Self entries keep the infinite quality. The result is a valid (but
    redundant) label set that answers every query correctly.
    """
    top = len(idx.quality_table)
    own = np.arange(idx.n)
    # self entries also cover graphs with no edges, hence no sub-indices
    rows = [np.stack([own, idx.order.rank[own], np.zeros(idx.n, np.int64),
                      np.full(idx.n, top)], axis=1)]
    for r, (off, hub, dist) in enumerate(idx.subs):
        owner = np.repeat(np.arange(idx.n), np.diff(off))
        q = np.where(dist == 0, top, r)
        rows.append(np.stack([owner, hub, dist, q], axis=1))
    allr = np.unique(np.concatenate(rows).astype(np.int64), axis=0)  # drops repeated self entries
    key = np.lexsort((allr[:, 3], allr[:, 2], allr[:, 1], allr[:, 0]))
    allr = allr[key]
    offsets = np.searchsorted(allr[:, 0], np.arange(idx.n + 1)).astype(np.int64)
    st = LabelStore(offsets=offsets, hub=allr[:, 1].astype(np.int32),
                    dist=allr[:, 2].astype(np.int64), qual=allr[:, 3].astype(np.int32))
    return WcIndex(n=idx.n, order=idx.order, quality_table=idx.quality_table,
                   fingerprint=idx.fingerprint, edge_count=g.edge_count, directed=False,
                   inn=st, out=st, meta={"flattened": True})
