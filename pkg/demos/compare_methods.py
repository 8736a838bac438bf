"""Benchmark every query method on one seeded random graph.

Run: python3 demos/compare_methods.py [n] [m] [k]
"""
from __future__ import annotations

import sys

from wcsd.bench import run_bench, summary_lines
from wcsd.graph import generate_random


def main(argv: list[str]) -> None:
    n, m, k = (int(a) for a in argv[:3]) if len(argv) >= 3 else (3000, 9000, 4)
    g = generate_random(n, m, k, seed=11, connected=True)
    # one order for both index variants, so their build times differ only by the prune
    rep = run_bench(g, count=2000, seed=3, plus_order="degree")
    print("\n".join(summary_lines(rep)))
    plain, plus = rep.results["wcindex"], rep.results["wcindex+"]
    print(f"wcindex+ / wcindex build time: {plus.build_seconds / plain.build_seconds:.2f}")


if __name__ == "__main__":
    main(sys.argv[1:])
