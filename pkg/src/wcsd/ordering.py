"""Vertex orders for index construction.

Position 0 of a :class:`VertexOrder` is the highest priority: it is the first
BFS source and becomes the most widely shared hub.
"""
from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .graph import QualityGraph

__all__ = [
    "VertexOrder",
    "TreeDecomposition",
    "identity_order",
    "degree_order",
    "random_order",
    "mde_order",
    "hybrid_order",
    "default_delta",
    "make_order",
    "check_tree_decomposition",
    "read_order",
    "write_order",
]


@dataclass(frozen=True, eq=False)
class VertexOrder:
    sequence: np.ndarray
    rank: np.ndarray = field(repr=False)

    @classmethod
    def from_sequence(cls, seq) -> "VertexOrder":
        seq = np.asarray(seq, dtype=np.int64)
        n = len(seq)
        rank = np.full(n, -1, dtype=np.int64)
        if n and (seq.min() < 0 or seq.max() >= n):
            raise ValueError("order is not a permutation of [0, n)")
        rank[seq] = np.arange(n)
        if (rank < 0).any():
            raise ValueError("order is not a permutation of [0, n)")
        return cls(seq, rank)

    def __len__(self) -> int:
        return len(self.sequence)

    def __eq__(self, other) -> bool:
        return isinstance(other, VertexOrder) and np.array_equal(self.sequence, other.sequence)

    def tolist(self) -> list[int]:
        return self.sequence.tolist()


@dataclass
class TreeDecomposition:
    bags: list[frozenset]
    elimination_sequence: list[int]
    parent: list[int]  # bag index of the parent bag, -1 for roots

    @property
    def width(self) -> int:
        return max((len(b) for b in self.bags), default=1) - 1


def identity_order(g: QualityGraph) -> VertexOrder:
    return VertexOrder.from_sequence(np.arange(g.n))


def random_order(g: QualityGraph, seed: int = 0) -> VertexOrder:
    return VertexOrder.from_sequence(np.random.default_rng(seed).permutation(g.n))


def degree_order(g: QualityGraph) -> VertexOrder:
    """Non-ascending degree; ties go to the smaller vertex id."""
    deg = g.degree()
    return VertexOrder.from_sequence(np.lexsort((np.arange(g.n), -deg)))


def _undirected_sets(g: QualityGraph, vertices=None) -> dict[int, set[int]]:
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    keep = None
    if vertices is not None:
        mask = np.zeros(g.n, dtype=bool)
        mask[list(vertices)] = True
        keep = mask[src] & mask[g.indices]
    a, b = (src, g.indices) if keep is None else (src[keep], g.indices[keep])
    verts = range(g.n) if vertices is None else sorted(vertices)
    adj: dict[int, set[int]] = {v: set() for v in verts}
    for x, y in zip(a.tolist(), b.tolist()):
        adj[x].add(y)
        adj[y].add(x)
    return adj


def _eliminate(adj: dict[int, set[int]]) -> TreeDecomposition:
    heap = [(len(nb), v) for v, nb in adj.items()]
    heapq.heapify(heap)
    gone: set[int] = set()
    seq: list[int] = []
    bags: list[frozenset] = []
    while heap:
        deg, v = heapq.heappop(heap)
        if v in gone or deg != len(adj[v]):
            continue  # stale entry
        nbrs = adj.pop(v)
        gone.add(v)
        seq.append(v)
        bags.append(frozenset(nbrs | {v}))
        for x in nbrs:
            s = adj[x]
            s.discard(v)
            s.update(nbrs)
            s.discard(x)
            heapq.heappush(heap, (len(s), x))
    pos = {v: i for i, v in enumerate(seq)}
    parent = []
    for i, v in enumerate(seq):
        later = [pos[x] for x in bags[i] if x != v]
        parent.append(min(later) if later else -1)
    return TreeDecomposition(bags, seq, parent)


def mde_order(g: QualityGraph) -> tuple[VertexOrder, TreeDecomposition]:
    """Minimum degree elimination. Ties eliminate the smallest id first.

    Qualities are ignored. The vertex order is the reverse elimination
    sequence, so the roots of the elimination hierarchy come first.
    """
    td = _eliminate(_undirected_sets(g))
    return VertexOrder.from_sequence(td.elimination_sequence[::-1]), td


def default_delta(g: QualityGraph, percentile: float = 99.0) -> float:
    deg = g.degree()
    return float(np.percentile(deg, percentile)) if len(deg) else 0.0


def hybrid_order(g: QualityGraph, delta: float | None = None) -> VertexOrder:
    """Core vertices (degree > delta) by degree, then the periphery by MDE.

    MDE runs on the subgraph induced by the periphery. ``delta`` defaults to
    the 99th percentile of the degree distribution.
    """
    if delta is None:
        delta = default_delta(g)
    deg = g.degree()
    ids = np.arange(g.n)
    core_mask = deg > delta
    core = ids[core_mask]
    core = core[np.lexsort((core, -deg[core]))]
    periphery = ids[~core_mask].tolist()
    td = _eliminate(_undirected_sets(g, periphery))
    return VertexOrder.from_sequence(np.concatenate([core, td.elimination_sequence[::-1]]))


def make_order(g: QualityGraph, strategy: str, delta: float | None = None,
               seed: int = 0) -> VertexOrder:
    if strategy == "identity":
        return identity_order(g)
    if strategy == "degree":
        return degree_order(g)
    if strategy == "mde":
        return mde_order(g)[0]
    if strategy == "hybrid":
        return hybrid_order(g, delta)
    if strategy == "random":
        return random_order(g, seed)
    raise ValueError(f"unknown ordering strategy {strategy!r}")


def check_tree_decomposition(g: QualityGraph, td: TreeDecomposition) -> list[str]:
    """Return the violated tree-decomposition conditions (empty if valid)."""
    problems = []
    covered = set().union(*td.bags) if td.bags else set()
    if covered != set(range(g.n)):
        problems.append("bags do not cover every vertex")
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    holder: dict[int, list[int]] = {}
    for i, bag in enumerate(td.bags):
        for v in bag:
            holder.setdefault(v, []).append(i)
    for a, b in zip(src.tolist(), g.indices.tolist()):
        if not set(holder.get(a, ())) & set(holder.get(b, ())):
            problems.append(f"edge ({a},{b}) not inside any bag")
            break
    for v, idx in holder.items():
        members = set(idx)
        # connected iff exactly one member's parent lies outside the set
        roots = [i for i in idx if td.parent[i] not in members]
        if len(roots) != 1:
            problems.append(f"bags holding {v} are not connected")
            break
    return problems


def write_order(order: VertexOrder, path: str | Path) -> None:
    Path(path).write_text("".join(f"{v}\n" for v in order.sequence.tolist()))


def read_order(path: str | Path, n: int | None = None) -> VertexOrder:
    seq = [int(x) for x in Path(path).read_text().split()]
    order = VertexOrder.from_sequence(seq)
    if n is not None and len(order) != n:
        raise ValueError(f"order has {len(order)} vertices, graph has {n}")
    return order
