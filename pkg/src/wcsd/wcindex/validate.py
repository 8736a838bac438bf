"""Correctness checks of a built index against exhaustive ground truth.

All checks that consult the oracle need the graph to be small enough for
:func:`wcsd.online.all_pairs_oracle`. Checks return a
:class:`ValidationReport` rather than raising.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .._common import INF
from ..graph import QualityGraph
from ..online import all_pairs_oracle
from .index import LabelStore, WcIndex, query_many

__all__ = [
    "ValidationReport",
    "validate_sound",
    "validate_complete",
    "validate_minimal",
    "check_monotone",
    "check_append_order",
    "check_hub_rank",
    "check_size_bound",
    "constrained_diameter",
    "edit_index",
]

_MAX_LISTED = 50


@dataclass
class ValidationReport:
    kind: str
    checked: int = 0
    violations: list[str] = field(default_factory=list)
    count: int = 0

    @property
    def ok(self) -> bool:
        return self.count == 0

    def flag(self, msg: str):
        self.count += 1
        if len(self.violations) < _MAX_LISTED:
            self.violations.append(msg)

    def summary(self) -> str:
        status = "ok" if self.ok else f"{self.count} violation(s)"
        return f"{self.kind}: {self.checked} checked, {status}"


def _families(idx: WcIndex):
    return [("in", idx.inn), ("out", idx.out)] if idx.directed else [("in", idx.inn)]


def _owners(st: LabelStore) -> np.ndarray:
    return np.repeat(np.arange(st.n), np.diff(st.offsets))


def _oracle(g: QualityGraph, oracle):
    return all_pairs_oracle(g) if oracle is None else oracle


def validate_sound(idx: WcIndex, g: QualityGraph, oracle=None) -> ValidationReport:
    """Every entry must state a real shortest constrained distance.

    An in-label ``(h, d, w)`` of ``v`` claims ``dist^w(h, v) = d``; an
    out-label claims ``dist^w(v, h) = d``. Self entries must be
    ``(v, 0, top)``.
    """
    orc = _oracle(g, oracle)
    rep = ValidationReport("sound")
    seq = idx.order.sequence
    top = idx.top
    for fam, st in _families(idx):
        own = _owners(st)
        hv = seq[st.hub]
        d, q = st.dist, st.qual
        rep.checked += len(own)
        self_e = hv == own
        bad_self = self_e & ((d != 0) | (q != top))
        bad_top = ~self_e & ((q >= top) | (q < 0))
        for i in np.flatnonzero(bad_self | bad_top):
            rep.flag(f"{fam} L({own[i]}): malformed entry ({hv[i]}, {d[i]}, rank {q[i]})")
        ok = ~self_e & ~bad_top
        src, dst = (hv, own) if fam == "in" else (own, hv)
        truth = np.full(len(own), INF, np.int64)
        truth[ok] = orc[src[ok], dst[ok], q[ok]]
        for i in np.flatnonzero(ok & (truth != d)):
            t = "INF" if truth[i] >= INF else str(truth[i])
            rep.flag(f"{fam} L({own[i]}): entry ({hv[i]}, {d[i]}, {idx.quality_of(q[i])}) "
                     f"but constrained distance is {t}")
    return rep


def _all_triples(n: int, top: int):
    S, T, W = np.meshgrid(np.arange(n), np.arange(n), np.arange(top), indexing="ij")
    return S.ravel(), T.ravel(), W.ravel()


def validate_complete(idx: WcIndex, g: QualityGraph, oracle=None) -> ValidationReport:
    """Every ``(s, t, rank)`` answer must equal the oracle."""
    orc = _oracle(g, oracle)
    rep = ValidationReport("complete")
    S, T, W = _all_triples(idx.n, idx.top)
    got, _, _ = query_many(idx, S, T, W)
    want = orc.ravel()
    rep.checked = len(S)
    for i in np.flatnonzero(got != want):
        rep.flag(f"query ({S[i]}, {T[i]}, {idx.quality_of(W[i])}): index "
                 f"{_fmt(got[i])} != oracle {_fmt(want[i])}")
    return rep


def _fmt(d) -> str:
    return "INF" if d >= INF else str(int(d))


def _dense(st: LabelStore, top: int, skip: int | None = None) -> np.ndarray:
    """``D[v, h, r]``: shortest stored distance of ``v`` to hub rank ``h``
    over entries with quality rank >= ``r`` (``inf`` if none)."""
    n = st.n
    D = np.full((n, n, top), np.inf)
    own = _owners(st)
    keep = np.ones(len(own), bool)
    if skip is not None:
        keep[skip] = False
    for r in range(top):
        m = keep & (st.qual >= r)
        np.minimum.at(D[:, :, r], (own[m], st.hub[m]), st.dist[m].astype(float))
    return D


def _row_dense(st: LabelStore, v: int, top: int, skip: int) -> np.ndarray:
    lo, hi = st.offsets[v], st.offsets[v + 1]
    D = np.full((st.n, top), np.inf)
    for e in range(lo, hi):
        if e == skip:
            continue
        D[st.hub[e], : st.qual[e] + 1] = np.minimum(D[st.hub[e], : st.qual[e] + 1],
                                                   st.dist[e])
    return D


def validate_minimal(idx: WcIndex, g: QualityGraph | None = None,
                     necessity: bool = True) -> ValidationReport:
    """No entry may be dominated inside its group, and (``necessity``)
    deleting any non-self entry must change at least one query answer.

    The necessity sweep compares against the index's own answers, so run
    :func:`validate_complete` as well to tie those to ground truth. It is
    ``O(entries * n^2 * |w|)``; keep it to small graphs.
    """
    rep = ValidationReport("minimal")
    seq = idx.order.sequence
    for fam, st in _families(idx):
        for v in range(st.n):
            for h, a, b in st.groups(v):
                for i in range(a, b):
                    for j in range(a, b):
                        if i != j and st.dist[j] <= st.dist[i] and st.qual[j] >= st.qual[i]:
                            rep.flag(f"{fam} L({v}): entry ({seq[h]}, {st.dist[i]}, "
                                     f"{idx.quality_of(st.qual[i])}) dominated by "
                                     f"({seq[h]}, {st.dist[j]}, {idx.quality_of(st.qual[j])})")
    if not necessity:
        return rep
    top = idx.top
    Dout = _dense(idx.out, top)
    Din = Dout if not idx.directed else _dense(idx.inn, top)
    # A[s, t, r] = min_h Dout[s, h, r] + Din[t, h, r]
    A = np.min(Dout[:, None, :, :] + Din[None, :, :, :], axis=2)
    for fam, st in _families(idx):
        own = _owners(st)
        for e in range(st.total_entries):
            v = int(own[e])
            if seq[st.hub[e]] == v:
                continue
            rep.checked += 1
            Dv = _row_dense(st, v, top, skip=e)
            if fam == "out" or not idx.directed:
                row = np.min(Dv[None, :, :] + Din, axis=1)
                changed = not np.array_equal(row, A[v])
            else:
                col = np.min(Dout + Dv[None, :, :], axis=1)
                changed = not np.array_equal(col, A[:, v])
            if not changed:
                rep.flag(f"{fam} L({v}): entry ({seq[st.hub[e]]}, {st.dist[e]}, "
                         f"{idx.quality_of(st.qual[e])}) is redundant")
    return rep


def check_monotone(idx: WcIndex) -> ValidationReport:
    """Inside each group, distance and quality strictly increase together."""
    rep = ValidationReport("monotone")
    for fam, st in _families(idx):
        rep.checked += st.total_entries
        same = np.zeros(st.total_entries, bool)
        if st.total_entries > 1:
            same[1:] = st.hub[1:] == st.hub[:-1]
            same[st.offsets[:-1][st.offsets[:-1] < st.total_entries]] = False
        i = np.flatnonzero(same)
        bad = (st.dist[i] <= st.dist[i - 1]) | (st.qual[i] <= st.qual[i - 1])
        own = _owners(st)
        for e in i[bad]:
            rep.flag(f"{fam} L({own[e]}): group of hub rank {st.hub[e]} not strictly "
                     f"co-increasing at entry {e - st.offsets[own[e]]}")
    return rep


def check_append_order(idx: WcIndex) -> ValidationReport:
    """No entry is dominated by an entry of its group appended later."""
    rep = ValidationReport("append-order")
    for fam, st in _families(idx):
        if st.seq is None:
            raise ValueError("index carries no append order")
        for v in range(st.n):
            for _, a, b in st.groups(v):
                for i in range(a, b):
                    rep.checked += 1
                    for j in range(a, b):
                        if (st.seq[j] > st.seq[i] and st.dist[j] <= st.dist[i]
                                and st.qual[j] >= st.qual[i]):
                            rep.flag(f"{fam} L({v}): later entry {j - a} dominates "
                                     f"earlier entry {i - a} of hub rank {st.hub[a]}")
    return rep


def check_hub_rank(idx: WcIndex) -> ValidationReport:
    """Non-self entries have hubs of strictly higher priority than the owner."""
    rep = ValidationReport("hub-rank")
    rank = idx.order.rank
    for fam, st in _families(idx):
        own = _owners(st)
        orank = rank[own]
        rep.checked += len(own)
        self_e = st.hub == orank
        bad = ~self_e & (st.hub >= orank)
        for e in np.flatnonzero(bad):
            rep.flag(f"{fam} L({own[e]}): hub rank {st.hub[e]} not below owner rank "
                     f"{orank[e]}")
        has_self = np.zeros(st.n, bool)
        has_self[own[self_e]] = True
        for v in np.flatnonzero(~has_self):
            rep.flag(f"{fam} L({v}): missing self entry")
    return rep


def constrained_diameter(oracle: np.ndarray) -> int:
    """Largest finite constrained distance over all pairs and thresholds."""
    fin = oracle[oracle < INF]
    return int(fin.max()) if fin.size else 0


def check_size_bound(idx: WcIndex, g: QualityGraph, oracle=None) -> ValidationReport:
    """Each (vertex, hub) group holds at most ``min(D, |w|)`` entries, where
    ``D`` is :func:`constrained_diameter`; self groups hold exactly one."""
    orc = _oracle(g, oracle)
    bound = min(constrained_diameter(orc), idx.top)
    rep = ValidationReport("size-bound")
    for fam, st in _families(idx):
        own = _owners(st)
        sizes = np.diff(st.gbeg)
        gown = own[st.gbeg[:-1]] if len(sizes) else own[:0]
        is_self = st.ghub == idx.order.rank[gown]
        lim = np.where(is_self, 1, bound)
        rep.checked += len(sizes)
        for gi in np.flatnonzero(sizes > lim):
            rep.flag(f"{fam} L({gown[gi]}): group of hub rank {st.ghub[gi]} has "
                     f"{sizes[gi]} entries, bound {lim[gi]}")
    total_bound = idx.n * idx.n * max(bound, 1)
    if idx.total_entries > total_bound * (2 if idx.directed else 1):
        rep.flag(f"total entries {idx.total_entries} exceed {total_bound}")
    return rep


def edit_index(idx: WcIndex, add=(), remove=(), family: str = "in") -> WcIndex:
    """Copy of ``idx`` with entries added or removed, for fault injection.

    Entries are ``(vertex, hub_vertex, dist, quality)`` with raw qualities.
    """
    rank = idx.order.rank
    st = idx.store(family)
    rows = []
    for v in range(st.n):
        lo, hi = st.offsets[v], st.offsets[v + 1]
        rows.append([(int(st.hub[e]), int(st.dist[e]), int(st.qual[e]),
                      -1 if st.parent is None else int(st.parent[e]),
                      -1 if st.seq is None else int(st.seq[e])) for e in range(lo, hi)])
    for v, h, d, w in remove:
        key = (int(rank[h]), int(d), idx.threshold_rank(w))
        before = len(rows[v])
        rows[v] = [r for r in rows[v] if r[:3] != key]
        if len(rows[v]) == before:
            raise KeyError(f"no entry {(h, d, w)} in L({v})")
    for v, h, d, w in add:
        rows[v].append((int(rank[h]), int(d), idx.threshold_rank(w), v, -1))
        rows[v].sort(key=lambda r: (r[0], r[1]))
    flat = [r for rs in rows for r in rs]
    offsets = np.concatenate([[0], np.cumsum([len(rs) for rs in rows])]).astype(np.int64)
    col = lambda i, dt: np.array([r[i] for r in flat], dt)  # noqa: E731
    new = LabelStore(offsets=offsets, hub=col(0, np.int32), dist=col(1, np.int64),
                     qual=col(2, np.int32),
                     parent=col(3, np.int32) if st.parent is not None else None,
                     seq=col(4, np.int64) if st.seq is not None else None)
    inn, out = idx.inn, idx.out
    if not idx.directed:
        inn = out = new
    elif family == "in":
        inn = new
    else:
        out = new
    return WcIndex(n=idx.n, order=idx.order, quality_table=idx.quality_table,
                   fingerprint=idx.fingerprint, edge_count=idx.edge_count,
                   directed=idx.directed, inn=inn, out=out, path_mode=idx.path_mode,
                   weighted=idx.weighted, meta=dict(idx.meta))
