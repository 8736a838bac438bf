"""Shortest distances under a minimum edge-quality constraint.

A query ``(s, t, w)`` asks for the fewest hops (or least total length) from
``s`` to ``t`` using only edges of quality ``>= w``. Besides online searches
and a per-threshold labeling baseline, the package builds one 2-hop label
index whose entries carry a quality bound, so any threshold is answered by a
single label merge.
"""
from ._common import INF, MemoryCapExceeded, fmt_dist
from .graph import (GraphFormatError, QualityGraph, QueryTriple, filter_at_threshold,
                    from_edges, generate_random, load_dimacs, load_edge_list, save_dimacs,
                    save_edge_list)
from .naive import PerThresholdIndex, build_naive, flatten_naive, query_naive
from .online import (PartitionCache, all_pairs_oracle, partitioned_bfs, wc_bfs,
                     wc_dijkstra)
from .ordering import (TreeDecomposition, VertexOrder, degree_order, hybrid_order,
                       identity_order, make_order, mde_order, random_order)
from .wcindex import (WcIndex, build, build_directed, query_distance, reconstruct_path,
                      trace_query)

__version__ = "0.1.0"

__all__ = [
    "INF",
    "MemoryCapExceeded",
    "fmt_dist",
    "GraphFormatError",
    "QualityGraph",
    "QueryTriple",
    "filter_at_threshold",
    "from_edges",
    "generate_random",
    "load_dimacs",
    "load_edge_list",
    "save_dimacs",
    "save_edge_list",
    "PerThresholdIndex",
    "build_naive",
    "flatten_naive",
    "query_naive",
    "PartitionCache",
    "all_pairs_oracle",
    "partitioned_bfs",
    "wc_bfs",
    "wc_dijkstra",
    "TreeDecomposition",
    "VertexOrder",
    "degree_order",
    "hybrid_order",
    "identity_order",
    "make_order",
    "mde_order",
    "random_order",
    "WcIndex",
    "build",
    "build_directed",
    "query_distance",
    "reconstruct_path",
    "trace_query",
]
