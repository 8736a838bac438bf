"""Build an index for a small graph and look inside one query.

Run: python3 demos/quickstart.py
"""
from __future__ import annotations

from wcsd import INF, build, fmt_dist, from_edges, identity_order, query_distance
from wcsd import reconstruct_path, trace_query
from wcsd.online import wc_bfs

# (u, v, quality); 0-1-5 is the shortest route but 1-5 is weak, and raising
# the threshold pushes the answer onto longer, stronger routes
edges = [(0, 1, 3), (1, 5, 1), (0, 3, 4), (3, 4, 4), (4, 5, 2), (1, 4, 2), (3, 2, 3),
         (2, 5, 4)]
g = from_edges(edges)
idx = build(g, identity_order(g), path_mode=True)

print(f"{g.n} vertices, {g.edge_count} edges, {idx.total_entries} label entries")
for v, entries in idx.label_table().items():
    print(f"  L({v}) = " + " ".join(f"({h},{d},{w:g})" for h, d, w in entries))

print()
for w in g.quality_table.tolist():
    d = query_distance(idx, (0, 5, w))
    assert d == wc_bfs(g, (0, 5, w))
    path = reconstruct_path(idx, (0, 5, w)) if d != INF else None
    print(f"dist(0, 5 | quality >= {w}) = {fmt_dist(d)}  path {path}")

tr = trace_query(idx, (0, 5, 2))
print()
print(f"query (0, 5, 2) touched {tr.touched} of {tr.label_sizes} entries")
for hub, ds, dt, total in tr.candidates:
    print(f"  via hub {hub}: {ds} + {dt} = {total}")
