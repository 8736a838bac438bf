"""Benchmark harness: build every method, replay one workload, compare.

Latency is taken two ways. ``mean_us`` divides a whole batched pass by the
query count, so it reflects the search itself. The per-query distribution
(``median_us``, ``p99_us``) times each query as its own call and therefore
includes a few microseconds of call overhead.
"""
from __future__ import annotations

import csv
import json
import os
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from ._common import MemoryCapExceeded, fmt_dist
from .graph import QualityGraph, QueryTriple
from .naive import build_naive, query_naive_many
from .online import FrontierState, PartitionCache, partitioned_bfs_many, wc_bfs_many, \
    wc_dijkstra_many
from .ordering import make_order
from .wcindex.index import DEFAULT_MEM_CAP, build, build_directed, query_many

__all__ = [
    "ALGORITHMS",
    "BenchMismatch",
    "AlgoResult",
    "BenchReport",
    "gen_workload",
    "workload_arrays",
    "mem_cap_from_env",
    "parse_size",
    "run_bench",
    "summary_lines",
]

ALGORITHMS = ("wbfs", "dijkstra", "cbfs", "naive", "wcindex", "wcindex+")


class BenchMismatch(RuntimeError):
    """Two methods disagreed on some query."""


def parse_size(text: str) -> int:
    """``"2G"``, ``"512M"``, ``"4096"`` -> bytes."""
    t = text.strip().upper().removesuffix("B")
    mult = {"K": 1024, "M": 1024**2, "G": 1024**3, "T": 1024**4}
    if t and t[-1] in mult:
        return int(float(t[:-1]) * mult[t[-1]])
    return int(t)


def mem_cap_from_env(default: int = DEFAULT_MEM_CAP) -> int:
    raw = os.environ.get("WCSD_MEM_CAP")
    return parse_size(raw) if raw else default


def gen_workload(g: QualityGraph, count: int, seed: int = 0) -> list[QueryTriple]:
    """Uniform random endpoints, thresholds drawn from the graph's qualities."""
    if count < 1:
        raise ValueError("count must be >= 1")
    if g.num_qualities == 0:
        raise ValueError("graph has no edge qualities to draw thresholds from")
    rng = np.random.default_rng(seed)
    S = rng.integers(0, g.n, count)
    T = rng.integers(0, g.n, count)
    W = g.quality_table[rng.integers(0, g.num_qualities, count)]
    return [QueryTriple(int(s), int(t), float(w)) for s, t, w in zip(S, T, W)]


def workload_arrays(g: QualityGraph, workload):
    """``(S, T, W_rank)`` int64 arrays for the batched query functions."""
    S = np.array([q[0] for q in workload], np.int64)
    T = np.array([q[1] for q in workload], np.int64)
    W = np.searchsorted(g.quality_table, np.array([q[2] for q in workload], float),
                        side="left").astype(np.int64)
    return S, T, W


@dataclass
class AlgoResult:
    name: str
    feasible: bool = True
    note: str = ""
    order_seconds: float = 0.0
    build_seconds: float = 0.0
    entries: int = 0
    bytes: int = 0
    mean_us: float = float("nan")
    median_us: float = float("nan")
    p99_us: float = float("nan")
    per_query_mean_us: float = float("nan")

    @property
    def total_build_seconds(self) -> float:
        return self.order_seconds + self.build_seconds


@dataclass
class BenchReport:
    graph: dict
    seed: int | None
    query_count: int
    results: dict[str, AlgoResult] = field(default_factory=dict)

    def to_dict(self) -> dict:
        algs = {}
        for k, r in self.results.items():
            d = asdict(r)
            d["total_build_seconds"] = r.total_build_seconds
            algs[k] = {x: (None if isinstance(y, float) and y != y else y) for x, y in d.items()}
        return {"graph": self.graph, "seed": self.seed, "query_count": self.query_count,
                "algorithms": algs}

    def write(self, out: str | Path) -> tuple[Path, Path]:
        out = Path(out)
        jp, cp = out.with_suffix(".json"), out.with_suffix(".csv")
        jp.parent.mkdir(parents=True, exist_ok=True)
        data = self.to_dict()
        jp.write_text(json.dumps(data, indent=2) + "\n")
        cols = ["name", "feasible", "note", "order_seconds", "build_seconds",
                "total_build_seconds", "entries", "bytes", "mean_us", "median_us",
                "p99_us", "per_query_mean_us"]
        with open(cp, "w", newline="") as fh:
            wr = csv.DictWriter(fh, fieldnames=cols)
            wr.writeheader()
            for row in data["algorithms"].values():
                wr.writerow({c: row[c] for c in cols})
        return jp, cp


def _time_batch(fn, S, T, W):
    fn(S, T, W)  # warmup pass
    t0 = time.perf_counter()
    ans = fn(S, T, W)
    return ans, (time.perf_counter() - t0) / max(len(S), 1) * 1e6


def _time_each(fn, S, T, W):
    lat = np.empty(len(S))
    clock = time.perf_counter_ns
    for i in range(len(S)):
        a, b, c = S[i:i + 1], T[i:i + 1], W[i:i + 1]
        t0 = clock()
        fn(a, b, c)
        lat[i] = (clock() - t0) / 1e3
    return lat


def run_bench(g: QualityGraph, algorithms=ALGORITHMS, workload=None, out=None, *,
              count: int = 10_000, seed: int = 0, order: str = "degree",
              plus_order: str = "hybrid", mem_cap: int | None = None,
              per_query: bool = True, log=None) -> BenchReport:
    """Build, replay and cross-check the requested methods.

    ``wcindex`` uses the entry-by-entry cover test with ``order``;
    ``wcindex+`` uses the group-wise test with ``plus_order``. An index that
    would pass ``mem_cap`` is recorded as infeasible instead of aborting the
    run. Any disagreement between methods raises :class:`BenchMismatch`
    before a report is written.
    """
    unknown = set(algorithms) - set(ALGORITHMS)
    if unknown:
        raise ValueError(f"unknown algorithm(s): {sorted(unknown)}")
    cap = mem_cap_from_env() if mem_cap is None else mem_cap
    say = log or (lambda msg: None)
    if workload is None:
        workload = gen_workload(g, count, seed)
    else:
        seed = None
    S, T, W = workload_arrays(g, workload)
    if len(S) and (S.min() < 0 or max(S.max(), T.max()) >= g.n or T.min() < 0):
        raise ValueError("workload refers to vertices outside the graph")
    report = BenchReport(
        graph={"n": g.n, "m": g.edge_count, "directed": g.directed,
               "num_qualities": g.num_qualities, "weighted": g.lengths is not None,
               "fingerprint": g.fingerprint()},
        seed=seed, query_count=len(S))
    answers: dict[str, np.ndarray] = {}
    scratch = FrontierState(g.n)
    orders = {}

    def get_order(strategy):
        if strategy not in orders:
            t0 = time.perf_counter()
            o = make_order(g, strategy)
            orders[strategy] = (o, time.perf_counter() - t0)
        return orders[strategy]

    for name in algorithms:
        res = AlgoResult(name)
        report.results[name] = res
        say(f"[{name}] preparing")
        try:
            if name in ("cbfs", "wbfs") and g.lengths is not None:
                raise _Infeasible("BFS ignores edge lengths")
            if name == "cbfs":
                fn = lambda a, b, c: wc_bfs_many(g, a, b, c, scratch)  # noqa: E731
            elif name == "dijkstra":
                fn = lambda a, b, c: wc_dijkstra_many(g, a, b, c, scratch)  # noqa: E731
            elif name == "wbfs":
                t0 = time.perf_counter()
                cache = PartitionCache(g)
                res.build_seconds = time.perf_counter() - t0
                res.entries = int(sum(p.edge_count for p in cache.parts))
                res.bytes = int(sum(p.indptr.nbytes + p.indices.nbytes for p in cache.parts))
                fn = lambda a, b, c: partitioned_bfs_many(g, a, b, c, cache, scratch)  # noqa: E731
            elif name == "naive":
                if g.directed:
                    raise _Infeasible("per-threshold baseline is undirected only")
                o, res.order_seconds = get_order(order)
                nv = build_naive(g, o, mem_cap=cap)
                res.build_seconds = nv.meta["build_seconds"]
                res.entries, res.bytes = nv.total_entries, nv.nbytes()
                fn = lambda a, b, c, nv=nv: query_naive_many(nv, a, b, c)  # noqa: E731
            else:
                plus = name == "wcindex+"
                o, res.order_seconds = get_order(plus_order if plus else order)
                builder = build_directed if g.directed else build
                idx = builder(g, o, fast=plus, mem_cap=cap)
                res.build_seconds = idx.meta["build_seconds"]
                res.entries, res.bytes = idx.total_entries, idx.nbytes()
                fn = lambda a, b, c, idx=idx: query_many(idx, a, b, c)[0]  # noqa: E731
        except (MemoryCapExceeded, _Infeasible) as exc:
            res.feasible = False
            res.note = str(exc)
            say(f"[{name}] infeasible: {exc}")
            continue
        say(f"[{name}] querying")
        ans, res.mean_us = _time_batch(fn, S, T, W)
        answers[name] = ans
        if per_query:
            lat = _time_each(fn, S, T, W)
            res.median_us = float(np.median(lat))
            res.p99_us = float(np.percentile(lat, 99))
            res.per_query_mean_us = float(lat.mean())
    _check_agreement(answers, S, T, W, g)
    if out is not None:
        report.write(out)
    return report


class _Infeasible(Exception):
    pass


def _check_agreement(answers: dict[str, np.ndarray], S, T, W, g: QualityGraph):
    if len(answers) < 2:
        return
    names = list(answers)
    ref = answers[names[0]]
    for other in names[1:]:
        bad = np.flatnonzero(answers[other] != ref)
        if len(bad):
            i = int(bad[0])
            detail = ", ".join(f"{k}={fmt_dist(v[i])}" for k, v in answers.items())
            raise BenchMismatch(
                f"{len(bad)} disagreement(s) between {names[0]} and {other}; first at query "
                f"#{i} (s={S[i]}, t={T[i]}, w={g.quality_of(int(W[i]))}): {detail}")


def summary_lines(report: BenchReport) -> list[str]:
    lines = [f"graph n={report.graph['n']} m={report.graph['m']} "
             f"|w|={report.graph['num_qualities']} queries={report.query_count}"]
    for r in report.results.values():
        if not r.feasible:
            lines.append(f"  {r.name:9s} infeasible ({r.note})")
            continue
        lines.append(f"  {r.name:9s} build {r.total_build_seconds:8.3f}s  entries {r.entries:>10d}"
                     f"  mean {r.mean_us:10.2f}us  p99 {r.p99_us:10.2f}us")
    return lines

