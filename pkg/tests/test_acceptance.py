"""Acceptance criteria, one test per criterion.

Each test records a ``criterion N: PASS|FAIL ...`` line that is echoed in the
terminal summary. Run alone with ``pytest tests/test_acceptance.py -v``.
"""
from __future__ import annotations

import gc
import math
import time

import numpy as np
import pytest

from wcsd._common import INF
from wcsd.bench import gen_workload, workload_arrays
from wcsd.graph import from_edges, generate_random
from wcsd.naive import build_naive, flatten_naive, query_naive_many
from wcsd.online import (PartitionCache, all_pairs_oracle, partitioned_bfs_many, wc_bfs_many,
                         wc_dijkstra_many)
from wcsd.ordering import degree_order, identity_order, make_order
from wcsd.wcindex import (build, build_directed, check_append_order, check_hub_rank,
                          check_monotone, check_size_bound, query_distance, query_many,
                          reconstruct_path, trace_query, validate_complete, validate_minimal,
                          validate_sound)

from conftest import ACCEPTANCE_LINES, GSTAR_TABLE

ORDERS = ("degree", "mde", "hybrid", "random")
KS = (1, 2, 3, 5, 9)

# desk-scale graph for the query bound and the performance ordering
BIG_N, BIG_M, BIG_K, BIG_SEED = 90_000, 100_000, 5, 1
BIG_QUERIES = 10_000


def record(num: int, title: str, ok: bool, detail: str) -> None:
    ACCEPTANCE_LINES.append(f"criterion {num} [{title}]: {'PASS' if ok else 'FAIL'} ({detail})")


def _random_graph(i: int, max_n: int, directed: bool = False):
    rng = np.random.default_rng(10_000 + i)
    n = int(rng.integers(2, max_n + 1))
    m = int(rng.integers(0, min(4 * n, n * (n - 1) // 2) + 1))
    k = KS[i % len(KS)]
    if m == 0:
        return from_edges([], n=n, directed=directed)
    return generate_random(n, m, k, seed=i, directed=directed)


def _all_triples(g):
    S, T, W = np.meshgrid(np.arange(g.n), np.arange(g.n), np.arange(g.top), indexing="ij")
    return S.ravel(), T.ravel(), W.ravel()


@pytest.fixture(scope="module")
def small_fixtures():
    """(graph, order) pairs with n <= 32 shared by the property criteria."""
    out = []
    for i in range(300):
        g = _random_graph(i, 32, directed=i % 5 == 4)
        out.append((g, make_order(g, ORDERS[i % 4], seed=i)))
    return out


def test_criterion_1_golden_table(gstar):
    build(gstar, identity_order(gstar))  # compile kernels outside the timed run
    t0 = time.perf_counter()
    idx = build(gstar, identity_order(gstar))
    elapsed = time.perf_counter() - t0
    got = idx.label_table()
    diff = sum(got[v] != GSTAR_TABLE[v] for v in range(6))
    ok = diff == 0 and idx.total_entries == 32 and elapsed < 1.0
    record(1, "golden table", ok, f"{idx.total_entries} entries, {diff} differing vertices, "
                                  f"{elapsed * 1e3:.2f} ms")
    assert ok


def test_criterion_2_worked_query(gstar):
    idx = build(gstar, identity_order(gstar))
    tr = trace_query(idx, (2, 5, 2))
    cands = {h: total for h, _, _, total in tr.candidates}
    ok = query_distance(idx, (2, 5, 2)) == 2 and tr.distance == 2 and cands == {0: 5, 1: 3,
                                                                               2: 2}
    record(2, "worked query", ok, f"distance {tr.distance}, candidates {cands}")
    assert ok


def test_criterion_3_oracle_equivalence():
    t0 = time.perf_counter()
    graphs = mismatches = triples = 0
    for i in range(1000):
        g = _random_graph(i, 64)
        S, T, W = _all_triples(g)
        want = all_pairs_oracle(g).ravel()
        online = [wc_bfs_many(g, S, T, W), wc_dijkstra_many(g, S, T, W),
                  partitioned_bfs_many(g, S, T, W, PartitionCache(g))]
        for strategy in ORDERS:
            o = make_order(g, strategy, seed=i)
            answers = online + [query_naive_many(build_naive(g, o), S, T, W),
                                query_many(build(g, o), S, T, W)[0]]
            mismatches += sum(int(np.count_nonzero(a != want)) for a in answers)
            triples += len(S)
        graphs += 1
    elapsed = time.perf_counter() - t0
    ok = graphs >= 1000 and mismatches == 0 and elapsed < 300
    record(3, "oracle equivalence", ok, f"{graphs} graphs x {len(ORDERS)} orders, "
                                        f"{triples} triples x 5 methods, {mismatches} "
                                        f"mismatches, {elapsed:.0f} s")
    assert ok


def test_criterion_4_properties(small_fixtures, gstar):
    fixtures = [(gstar, identity_order(gstar))] + small_fixtures
    counts = dict.fromkeys(("monotone", "dominance", "append", "hub", "necessity"), 0)
    checked = 0
    for g, o in fixtures:
        idx = (build_directed if g.directed else build)(g, o)
        counts["monotone"] += check_monotone(idx).count
        counts["dominance"] += validate_minimal(idx, necessity=False).count
        counts["append"] += check_append_order(idx).count
        counts["hub"] += check_hub_rank(idx).count
        if g.n <= 32:
            rep = validate_minimal(idx, g)
            counts["necessity"] += rep.count
            checked += rep.checked
    ok = sum(counts.values()) == 0
    record(4, "property suite", ok, f"{len(fixtures)} indexes, {checked} entries "
                                    f"leave-one-out, violations {counts}")
    assert ok


def test_criterion_5_size(small_fixtures, gstar):
    fixtures = [(gstar, identity_order(gstar))] + [(g, o) for g, o in small_fixtures
                                                   if not g.directed]
    dominated = bound_fail = 0
    ratio = []
    for g, o in fixtures:
        idx = build(g, o)
        flat = flatten_naive(build_naive(g, o), g)
        dominated += idx.total_entries > flat.total_entries
        ratio.append(idx.total_entries / flat.total_entries)
        if g.n <= 32:
            bound_fail += not check_size_bound(idx, g).ok
    ok = dominated == 0 and bound_fail == 0
    record(5, "size dominance", ok, f"{len(fixtures)} fixtures, wc <= naive on "
                                    f"{len(fixtures) - dominated}, bound failures "
                                    f"{bound_fail}, mean wc/naive {np.mean(ratio):.2f}")
    assert ok


@pytest.fixture(scope="module")
def big():
    # warm the compiled kernels on a small graph so the timed builds measure work only
    warm = generate_random(300, 400, BIG_K, seed=0, connected=True)
    for fast in (True, False):
        build(warm, degree_order(warm), fast=fast)
    query_many(build(warm), [0], [1], [0])
    wc_bfs_many(warm, [0], [1], [0])
    g = generate_random(BIG_N, BIG_M, BIG_K, "gnm", seed=BIG_SEED, connected=True)
    order = degree_order(g)
    idx = build(g, order, fast=True)
    S, T, W = workload_arrays(g, gen_workload(g, BIG_QUERIES, seed=7))
    return {"g": g, "order": order, "plus": idx, "S": S, "T": T, "W": W}


@pytest.mark.slow
def test_criterion_6_query_work_bound(big):
    g, idx = big["g"], big["plus"]
    dist, touched, sizes = query_many(idx, big["S"], big["T"], big["W"])
    bad = int(np.count_nonzero(touched > sizes))
    ok = g.edge_count >= 100_000 and len(dist) == BIG_QUERIES and bad == 0
    record(6, "query work bound", ok, f"m={g.edge_count}, {len(dist)} queries, max "
                                      f"touched/size {np.max(touched / sizes):.3f}, "
                                      f"{bad} over the bound")
    assert ok


def _mean_latency(fn, S, T, W, repeats=1):
    fn(S[:10], T[:10], W[:10])
    best = math.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(S, T, W)
        best = min(best, time.perf_counter() - t0)
    return out, best / len(S) * 1e6


def _runs(times):
    return "[" + ", ".join(f"{t:.1f}" for t in times) + "]"


@pytest.mark.slow
def test_criterion_7_performance_ordering(big):
    t_start = time.perf_counter()
    g, order, plus = big["g"], big["order"], big["plus"]
    S, T, W = big["S"], big["T"], big["W"]
    # best of two builds per prune, interleaved naive / fast / naive so slow
    # drift in machine speed hits both sides alike
    plain = build(g, order, fast=False)
    same = (np.array_equal(plain.inn.hub, plus.inn.hub)
            and np.array_equal(plain.inn.dist, plus.inn.dist)
            and np.array_equal(plain.inn.qual, plus.inn.qual))
    plain_times = [plain.meta["build_seconds"]]
    plus_times = [plus.meta["build_seconds"]]
    del plain
    gc.collect()
    for fast, times in ((True, plus_times), (False, plain_times)):
        times.append(build(g, order, fast=fast).meta["build_seconds"])
        gc.collect()
    t_plain, t_plus = min(plain_times), min(plus_times)
    wc_ans, wc_us = _mean_latency(lambda a, b, c: query_many(plus, a, b, c)[0], S, T, W, 3)
    bfs_ans, bfs_us = _mean_latency(lambda a, b, c: wc_bfs_many(g, a, b, c), S, T, W)
    agree = np.array_equal(wc_ans, bfs_ans)
    elapsed = time.perf_counter() - t_start + plus_times[0]
    ok = (agree and same and wc_us * 100 <= bfs_us and t_plus <= t_plain and elapsed < 600)
    record(7, "performance ordering", ok,
           f"gnm n={g.n} m={g.edge_count} |w|={g.num_qualities}, query {wc_us:.2f} us vs "
           f"C-BFS {bfs_us:.1f} us (x{bfs_us / wc_us:.0f}), build best-of-2 fast "
           f"{t_plus:.1f} s {_runs(plus_times)} vs entry-by-entry {t_plain:.1f} s "
           f"{_runs(plain_times)}, {plus.total_entries} entries, {elapsed:.0f} s")
    assert ok


def _edge_quality(g):
    q = {}
    for u, v, w in g.edges():
        q[(u, v)] = w
        if not g.directed:
            q[(v, u)] = w
    return q


def test_criterion_8_extensions(gstar):
    finite = bad_paths = 0
    fixtures = [gstar] + [_random_graph(i, 24) for i in range(60)]
    fixtures += [_random_graph(500 + i, 24, directed=True) for i in range(40)]
    for g in fixtures:
        idx = (build_directed if g.directed else build)(g, path_mode=True)
        qual = _edge_quality(g)
        for s in range(g.n):
            for t in range(g.n):
                for r in range(g.top):
                    w = g.quality_of(r)
                    d = query_distance(idx, (s, t, w))
                    if d == INF:
                        continue
                    finite += 1
                    p = reconstruct_path(idx, (s, t, w))
                    valid = (p is not None and p[0] == s and p[-1] == t and len(p) - 1 == d
                             and all(qual.get(e, -math.inf) >= w for e in zip(p, p[1:])))
                    bad_paths += not valid
    digraphs = directed_fail = 0
    for i in range(200):
        g = _random_graph(2000 + i, 32, directed=True)
        orc = all_pairs_oracle(g)
        idx = build_directed(g, make_order(g, ORDERS[i % 4], seed=i))
        directed_fail += not (validate_complete(idx, g, orc).ok
                              and validate_sound(idx, g, orc).ok)
        digraphs += 1
    ok = bad_paths == 0 and finite > 0 and directed_fail == 0
    record(8, "extensions", ok, f"{finite} finite path queries, {bad_paths} invalid; "
                                f"{digraphs} digraphs, {directed_fail} failing the oracle")
    assert ok
