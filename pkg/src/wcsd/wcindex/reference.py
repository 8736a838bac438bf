"""Plain-Python construction used for tracing and differential testing.

Mirrors the compiled builder step by step but keeps every intermediate
state inspectable: the per-round frontier and R vector, each candidate with
its cover-test verdict, and the labels as they grow. Much slower, so meant
for small graphs.

Inside this module vertices are vertex ids and qualities are ranks
(``top`` marks a self entry).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from ..graph import QualityGraph
from ..ordering import VertexOrder, degree_order
from . import _kernels as K
from .index import LabelStore, WcIndex

__all__ = [
    "RoundEvent",
    "CandidateEvent",
    "ConstructionState",
    "SourceContext",
    "reference_build",
    "prune_query",
    "prune_query_fast",
]


@dataclass
class RoundEvent:
    source: int
    family: str
    dist: int
    #: ``(vertex, quality rank)`` popped in this round
    frontier: list[tuple[int, int]]
    #: R vector (quality ranks, ``-1`` = unreached) as the round starts
    R: dict[int, int]


@dataclass
class CandidateEvent:
    source: int
    family: str
    vertex: int
    dist: int
    qual: int
    covered: bool


@dataclass
class ConstructionState:
    """Labels as they stand partway through construction.

    ``labels[f][v]`` is a list of ``(hub, dist, qual_rank, parent)`` with
    ``f`` = 0 for in-labels (the only family when undirected) and 1 for
    out-labels. Every vertex carries its self entry from the start.
    """

    g: QualityGraph
    order: VertexOrder
    labels: list[list[list[tuple[int, int, int, int]]]]
    append_seq: list[list[list[int]]]
    processed: int = 0
    appended: int = 0

    @classmethod
    def initial(cls, g: QualityGraph, order: VertexOrder) -> ConstructionState:
        nfam = 2 if g.directed else 1
        labels = [[[(v, 0, g.top, v)] for v in range(g.n)] for _ in range(nfam)]
        seqs = [[[-1] for _ in range(g.n)] for _ in range(nfam)]
        return cls(g, order, labels, seqs)

    @property
    def top(self) -> int:
        return self.g.top

    def family_index(self, family: str) -> int:
        if not self.g.directed:
            return 0
        return 0 if family == "in" else 1

    def append(self, f: int, v: int, hub: int, d: int, w: int, parent: int):
        self.labels[f][v].append((hub, d, w, parent))
        self.append_seq[f][v].append(self.appended)
        self.appended += 1

    def to_index(self, path_mode: bool = True) -> WcIndex:
        """Freeze the current labels into a queryable index."""
        g, order = self.g, self.order
        rank = order.rank
        stores = []
        for f in range(len(self.labels)):
            hubs, dists, quals, pars, seqs, offs = [], [], [], [], [], [0]
            for v in range(g.n):
                rows = sorted(zip(self.labels[f][v], self.append_seq[f][v]),
                              key=lambda r: (rank[r[0][0]], r[0][1]))
                for (h, d, w, p), s in rows:
                    hubs.append(rank[h])
                    dists.append(d)
                    quals.append(w)
                    pars.append(p)
                    seqs.append(s)
                offs.append(len(hubs))
            stores.append(LabelStore(
                offsets=np.array(offs, np.int64), hub=np.array(hubs, np.int32),
                dist=np.array(dists, np.int64), qual=np.array(quals, np.int32),
                parent=np.array(pars, np.int32) if path_mode else None,
                seq=np.array(seqs, np.int64)))
        inn = stores[0]
        out = stores[1] if g.directed else inn
        return WcIndex(n=g.n, order=order, quality_table=g.quality_table.copy(),
                       fingerprint=g.fingerprint(), edge_count=g.edge_count,
                       directed=g.directed, inn=inn, out=out, path_mode=path_mode,
                       meta={"prune": "reference"})


def prune_query(state: ConstructionState, s: int, t: int, w: int, d: int,
                family: str = "in") -> bool:
    """Entry-by-entry cover test.

    True iff some hub ``h`` with priority not above ``s`` has entries in both
    the source-side labels of ``s`` and the labels of ``t`` with qualities
    ``>= w`` whose distances sum to at most ``d``.
    """
    f = state.family_index(family)
    sf = 1 - f if state.g.directed else f
    rank = state.order.rank
    ks = rank[s]
    src = state.labels[sf][s]
    for h, dt, wt, _ in state.labels[f][t]:
        if rank[h] > ks or wt < w:
            continue
        for h2, ds, ws, _ in src:
            if h2 == h and ws >= w and ds + dt <= d:
                return True
    return False


class SourceContext:
    """Scratch for fast cover tests against one source.

    Wraps the compiled group-wise test: the source's labels are expanded to
    the direct-addressed table once, and positive verdicts are cached per
    ``(vertex, round)``. Call :meth:`next_round` when a BFS round ends.
    """

    def __init__(self, state: ConstructionState, s: int, family: str = "in"):
        g = state.g
        self.state = state
        self.f = state.family_index(family)
        sf = 1 - self.f if g.directed else self.f
        self.rank = state.order.rank
        self.k = int(self.rank[s])
        n = g.n
        self.tbits = np.zeros((n >> 6) + 1, np.uint64)
        self.toff = np.zeros(n, np.int32)
        self.tlen = np.zeros(n, np.int32)
        self.tmind = np.zeros(n, np.int64)
        hub, dist, qual = self._block(state.labels[sf][s], skip_hub=s)
        self._src = (hub, dist, qual)
        self.src_d = np.empty(len(hub) + 1, np.int64)
        self.src_q = np.empty(len(hub) + 1, np.int32)
        self.smax, _ = K.load_source_table(self.k, g.top, 0, len(hub), hub, dist, qual,
                                           self.tbits, np.empty(n + 1, np.int32), 0,
                                           self.toff, self.tlen, self.tmind, self.src_d,
                                           self.src_q)
        self.cache_round = np.full(n, -1, np.int64)
        self.cache_q = np.zeros(n, np.int32)
        self.round_id = 0
        self.cache_hits = 0
        self.scans = 0

    def _block(self, rows, skip_hub=None):
        rank = self.rank
        rows = sorted((int(rank[h]), d, w) for h, d, w, _ in rows if h != skip_hub)
        hub = np.array([r[0] for r in rows], np.int32)
        dist = np.array([r[1] for r in rows], np.int64)
        qual = np.array([r[2] for r in rows], np.int32)
        return hub, dist, qual

    def next_round(self):
        self.round_id += 1

    def cached(self, t: int, w: int) -> bool:
        return self.cache_round[t] == self.round_id and self.cache_q[t] >= w

    def covers(self, t: int, w: int, d: int) -> bool:
        if self.cached(t, w):
            self.cache_hits += 1
            return True
        self.scans += 1
        hub, dist, qual = self._block(self.state.labels[self.f][t])
        last = int(np.searchsorted(hub, hub[-1])) if len(hub) else 0
        return bool(K.prune_fast(t, w, d, 0, len(hub), last, self.smax, hub, dist, qual,
                                 self.tbits, self.toff, self.tlen, self.tmind, self.src_d,
                                 self.src_q, self.cache_round, self.cache_q,
                                 self.round_id))

    def covers_naive(self, t: int, w: int, d: int) -> bool:
        """Compiled entry-by-entry list merge (no table, no cache)."""
        th, td, tq = self._block(self.state.labels[self.f][t])
        sh, sd, sq = self._src
        n = len(th)
        hub = np.concatenate([th, sh])
        dist = np.concatenate([td, sd])
        qual = np.concatenate([tq, sq])
        return bool(K.prune_naive(self.k, w, d, 0, n, n, len(hub), hub, dist, qual))


def prune_query_fast(ctx: SourceContext, t: int, w: int, d: int) -> bool:
    """Group-wise cover test for the source held by ``ctx``."""
    return ctx.covers(t, w, d)


def reference_build(g: QualityGraph, order: VertexOrder | None = None, *,
                    fast: bool = True, n_sources: int | None = None,
                    on_round: Callable[[RoundEvent], None] | None = None,
                    on_candidate: Callable[[ConstructionState, CandidateEvent], None]
                    | None = None) -> ConstructionState:
    """Run construction in Python and return the final (or partial) state.

    ``n_sources`` stops after that many sources. ``on_candidate`` is invoked
    *before* the candidate is applied, with the verdict already decided, so
    it sees the exact state the cover test saw.
    """
    if order is None:
        order = degree_order(g)
    if len(order) != g.n:
        raise ValueError(f"order has {len(order)} vertices, graph has {g.n}")
    if g.lengths is not None:
        raise ValueError("reference builder handles unit lengths only")
    state = ConstructionState.initial(g, order)
    rank = order.rank
    top = g.top
    stop = g.n if n_sources is None else n_sources
    passes = [("in", g.indptr, g.indices, g.qrank)]
    if g.directed:
        passes.append(("out", g.rindptr, g.rindices, g.rqrank))
    for k in range(stop):
        s = int(order.sequence[k])
        for family, ip, ix, iq in passes:
            f = state.family_index(family)
            ctx = SourceContext(state, s, family) if fast else None
            R = {s: top}
            parent: dict[int, int] = {}
            frontier = [(s, top, s)]
            d = 0
            while frontier:
                if on_round is not None:
                    on_round(RoundEvent(s, family, d, [(u, w) for u, w, _ in frontier],
                                        dict(R)))
                vec: list[int] = []
                in_vec: set[int] = set()
                for u, w, pu in frontier:
                    if u == s:
                        covered = False
                    elif fast:
                        covered = ctx.covers(u, w, d)
                    else:
                        covered = prune_query(state, s, u, w, d, family)
                    if on_candidate is not None:
                        on_candidate(state, CandidateEvent(s, family, u, d, w, covered))
                    if covered:
                        continue
                    if u != s:
                        state.append(f, u, s, d, w, pu)
                    for e in range(ip[u], ip[u + 1]):
                        v = int(ix[e])
                        if rank[v] <= k:
                            continue
                        w2 = min(int(iq[e]), w)
                        if w2 <= R.get(v, -1):
                            continue
                        if v not in in_vec:
                            in_vec.add(v)
                            vec.append(v)
                        R[v] = w2
                        parent[v] = u
                frontier = [(v, R[v], parent[v]) for v in vec]
                if ctx is not None:
                    ctx.next_round()
                d += 1
        state.processed = k + 1
    return state
