"""Command line entry point: ``wcsd <subcommand> ...``.

Exit codes: 0 success, 1 validation failure (or a method disagreement in
``bench``), 2 usage or input errors.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

from ._common import MemoryCapExceeded, fmt_dist
from .graph import (GraphFormatError, QualityGraph, generate_random, load_dimacs,
                    load_edge_list, save_dimacs, save_edge_list)
from .ordering import default_delta, make_order, read_order, write_order

EXIT_OK, EXIT_INVALID, EXIT_USAGE = 0, 1, 2
STRATEGIES = ("identity", "degree", "mde", "hybrid", "random")
MODES = ("wc", "naive", "wc-path", "wc-directed")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _load_graph(args, directed: bool | None = None) -> QualityGraph:
    d = args.directed if directed is None else directed
    fmt = getattr(args, "format", "edges")
    if fmt == "dimacs":
        return load_dimacs(args.graph, directed=d)
    return load_edge_list(args.graph, directed=d)


def _threshold(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    return float(t)


def _order_for(g: QualityGraph, spec: str, delta_percentile: float | None, seed: int):
    if spec in STRATEGIES:
        delta = default_delta(g, delta_percentile) if (spec == "hybrid" and
                                                       delta_percentile is not None) else None
        return make_order(g, spec, delta=delta, seed=seed)
    if Path(spec).is_file():
        return read_order(spec, n=g.n)
    raise UsageError(f"--order must be one of {', '.join(STRATEGIES)} or an order file")


def cmd_gen(args) -> int:
    g = generate_random(args.n, args.m, args.k, model=args.model, seed=args.seed,
                        connected=args.connected, directed=args.directed)
    (save_dimacs if args.format == "dimacs" else save_edge_list)(g, args.out)
    print(f"wrote {args.out}: n={g.n} m={g.edge_count} |w|={g.num_qualities}")
    return EXIT_OK


def cmd_order(args) -> int:
    g = _load_graph(args)
    order = _order_for(g, args.strategy, args.delta_percentile, args.seed)
    write_order(order, args.out)
    print(f"wrote {args.out}: {len(order)} vertices ({args.strategy})")
    return EXIT_OK


def _build_index(args, g: QualityGraph):
    from .naive import build_naive
    from .bench import mem_cap_from_env, parse_size
    from .wcindex.index import build, build_directed

    cap = parse_size(args.mem_cap) if args.mem_cap else mem_cap_from_env()
    order = _order_for(g, args.order, args.delta_percentile, args.seed)
    if args.mode == "naive":
        return build_naive(g, order, mem_cap=cap)
    if args.mode == "wc-directed":
        return build_directed(g, order, fast=args.prune == "fast", mem_cap=cap)
    return build(g, order, path_mode=args.mode == "wc-path", fast=args.prune == "fast",
                 mem_cap=cap)


def cmd_build(args) -> int:
    from .io import save_index

    directed = args.mode == "wc-directed"
    if args.directed and not directed:
        raise UsageError("--directed graphs need --mode wc-directed")
    g = _load_graph(args, directed=directed)
    idx = _build_index(args, g)
    save_index(idx, args.out)
    print(f"wrote {args.out}: {args.mode} index, {idx.total_entries} entries, "
          f"{idx.meta.get('build_seconds', 0.0):.3f}s")
    return EXIT_OK


def _read_batch(path: str):
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            tok = line.split()
            if len(tok) != 3:
                raise UsageError(f"{path}:{lineno}: expected 's t w'")
            try:
                rows.append((int(tok[0]), int(tok[1]), _threshold(tok[2])))
            except ValueError:
                raise UsageError(f"{path}:{lineno}: bad query line {line!r}") from None
    return rows


def cmd_query(args) -> int:
    from .io import load_index
    from .naive import PerThresholdIndex, query_naive
    from .wcindex.index import query_distance, reconstruct_path

    graph = _load_graph(args) if args.graph else None
    idx = load_index(args.index, graph)
    if args.batch:
        queries = _read_batch(args.batch)
    elif args.s is None or args.t is None or args.w is None:
        raise UsageError("query needs --s --t --w or --batch FILE")
    else:
        queries = [(args.s, args.t, _threshold(args.w))]
    naive = isinstance(idx, PerThresholdIndex)
    for q in queries:
        if args.path:
            if naive:
                raise UsageError("--path needs an index built with --mode wc-path")
            p = reconstruct_path(idx, q)
            print("NONE" if p is None else " ".join(map(str, p)))
        else:
            d = query_naive(idx, q) if naive else query_distance(idx, q)
            print(fmt_dist(d))
    return EXIT_OK


def cmd_bench(args) -> int:
    from .bench import ALGORITHMS, BenchMismatch, parse_size, run_bench, summary_lines

    if args.graph:
        g = _load_graph(args)
    elif args.gen:
        n, m, k = args.gen
        g = generate_random(n, m, k, seed=args.seed, directed=args.directed)
    else:
        raise UsageError("bench needs --graph FILE or --gen N M K")
    algs = tuple(a.strip() for a in args.algorithms.split(",")) if args.algorithms \
        else ALGORITHMS
    bad = [a for a in algs if a not in ALGORITHMS]
    if bad:
        raise UsageError(f"unknown algorithm(s) {bad}; choose from {', '.join(ALGORITHMS)}")
    log = (lambda msg: print(msg, file=sys.stderr)) if args.verbose else None
    try:
        rep = run_bench(g, algs, count=args.count, seed=args.seed, order=args.order,
                        plus_order=args.plus_order, out=args.out,
                        mem_cap=parse_size(args.mem_cap) if args.mem_cap else None,
                        per_query=not args.no_per_query, log=log)
    except BenchMismatch as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    print("\n".join(summary_lines(rep)))
    if args.out:
        print(f"wrote {Path(args.out).with_suffix('.json')} and "
              f"{Path(args.out).with_suffix('.csv')}")
    return EXIT_OK


def cmd_validate(args) -> int:
    from .io import load_index
    from .naive import PerThresholdIndex, flatten_naive
    from .online import all_pairs_oracle
    from .wcindex import validate as V

    g = _load_graph(args)
    idx = load_index(args.index, g)
    if isinstance(idx, PerThresholdIndex):
        idx = flatten_naive(idx, g)
    orc = all_pairs_oracle(g)
    modes = ("sound", "complete", "minimal") if args.mode == "all" else (args.mode,)
    reports = []
    for mode in modes:
        if mode == "sound":
            reports.append(V.validate_sound(idx, g, orc))
        elif mode == "complete":
            reports.append(V.validate_complete(idx, g, orc))
        else:
            reports.append(V.validate_minimal(idx, g))
    failed = False
    for rep in reports:
        print(rep.summary())
        for line in rep.violations:
            print(f"  {line}")
        failed |= not rep.ok
    if args.json:
        Path(args.json).write_text(json.dumps(
            [{"kind": r.kind, "checked": r.checked, "violations": r.count,
              "examples": r.violations} for r in reports], indent=2) + "\n")
    return EXIT_INVALID if failed else EXIT_OK


def cmd_convert(args) -> int:
    src_fmt = args.from_format
    if src_fmt == "index":
        from .io import load_index
        from .naive import PerThresholdIndex

        idx = load_index(args.input)
        if args.to_format != "labels":
            raise UsageError("an index converts only --to labels")
        with open(args.out, "w") as fh:
            if isinstance(idx, PerThresholdIndex):
                for r in idx.thresholds:
                    for v in range(idx.n):
                        fh.write(f"w={idx.quality_table[r]:g} {v}: {idx.labels(r, v)}\n")
            else:
                fams = ("in", "out") if idx.directed else ("in",)
                for fam in fams:
                    for v in range(idx.n):
                        ents = " ".join(f"({h},{d},{q:g})" for h, d, q in idx.labels(v, fam))
                        prefix = f"{fam} " if idx.directed else ""
                        fh.write(f"{prefix}{v}: {ents}\n")
        return EXIT_OK
    load = load_dimacs if src_fmt == "dimacs" else load_edge_list
    g = load(args.input, directed=args.directed)
    if args.to_format == "dimacs":
        save_dimacs(g, args.out)
    elif args.to_format == "edges":
        save_edge_list(g, args.out)
    else:
        raise UsageError("graphs convert to 'edges' or 'dimacs'")
    print(f"wrote {args.out}: n={g.n} m={g.edge_count}")
    return EXIT_OK


def _add_graph_args(p, required=True):
    p.add_argument("--graph", required=required, help="graph file")
    p.add_argument("--format", choices=("edges", "dimacs"), default="edges")
    p.add_argument("--directed", action="store_true")


def make_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="wcsd", description="Quality-constrained shortest distance toolkit.")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a seeded random graph")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int)
    p.add_argument("--k", type=int, default=3, help="number of distinct qualities")
    p.add_argument("--model", choices=("gnm", "grid"), default="gnm")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--connected", action="store_true")
    p.add_argument("--directed", action="store_true")
    p.add_argument("--format", choices=("edges", "dimacs"), default="edges")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_gen)

    p = sub.add_parser("order", help="compute a vertex order file")
    _add_graph_args(p)
    p.add_argument("--strategy", choices=STRATEGIES, default="degree")
    p.add_argument("--delta-percentile", type=float, default=None,
                   help="hybrid core threshold as a degree percentile (default 99)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_order)

    p = sub.add_parser("build", help="build an index container")
    _add_graph_args(p)
    p.add_argument("--order", default="degree", help="strategy name or order file")
    p.add_argument("--delta-percentile", type=float, default=None)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--mode", choices=MODES, default="wc")
    p.add_argument("--prune", choices=("fast", "naive"), default="fast")
    p.add_argument("--mem-cap", default=None, help="e.g. 2G (default: $WCSD_MEM_CAP or 2G)")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_build)

    p = sub.add_parser("query", help="answer constrained distance queries")
    p.add_argument("--index", required=True)
    p.add_argument("--s", type=int)
    p.add_argument("--t", type=int)
    p.add_argument("--w")
    p.add_argument("--batch", help="file of 's t w' lines")
    p.add_argument("--path", action="store_true", help="print a shortest path instead")
    _add_graph_args(p, required=False)
    p.set_defaults(fn=cmd_query)

    p = sub.add_parser("bench", help="benchmark all methods on one workload")
    _add_graph_args(p, required=False)
    p.add_argument("--gen", type=int, nargs=3, metavar=("N", "M", "K"))
    p.add_argument("--algorithms", help="comma list (default: all)")
    p.add_argument("--count", type=int, default=10_000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--order", default="degree", choices=STRATEGIES)
    p.add_argument("--plus-order", default="hybrid", choices=STRATEGIES)
    p.add_argument("--mem-cap", default=None)
    p.add_argument("--no-per-query", action="store_true")
    p.add_argument("--out", help="report path prefix (.json and .csv are written)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(fn=cmd_bench)

    p = sub.add_parser("validate", help="check an index against the exhaustive oracle")
    _add_graph_args(p)
    p.add_argument("--index", required=True)
    p.add_argument("--mode", choices=("sound", "complete", "minimal", "all"), default="all")
    p.add_argument("--json", help="also write the reports as JSON")
    p.set_defaults(fn=cmd_validate)

    p = sub.add_parser("convert", help="convert graph files or dump an index")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--from", dest="from_format", choices=("edges", "dimacs", "index"),
                   default="edges")
    p.add_argument("--to", dest="to_format", choices=("edges", "dimacs", "labels"),
                   required=True)
    p.add_argument("--directed", action="store_true")
    p.set_defaults(fn=cmd_convert)
    return ap


def main(argv=None) -> int:
    from .io import ContainerError
    from .wcindex.index import StaleIndexError

    ap = make_parser()
    try:
        args = ap.parse_args(argv)
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GraphFormatError, ContainerError, StaleIndexError, MemoryCapExceeded,
            FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
