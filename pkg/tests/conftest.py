from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from wcsd.graph import from_edges, generate_random

settings.register_profile(
    "default", deadline=None, max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.data_too_large],
)
settings.load_profile("default")

# six-vertex running example; the expected index below is the published one
GSTAR_EDGES = [(0, 1, 3), (0, 3, 1), (1, 2, 5), (1, 3, 2), (2, 3, 4), (3, 4, 4), (3, 5, 2),
               (4, 5, 3)]
INF_Q = math.inf
GSTAR_TABLE = {
    0: [(0, 0, INF_Q)],
    1: [(0, 1, 3), (1, 0, INF_Q)],
    2: [(0, 2, 3), (1, 1, 5), (2, 0, INF_Q)],
    3: [(0, 1, 1), (0, 2, 2), (0, 3, 3), (1, 1, 2), (1, 2, 4), (2, 1, 4), (3, 0, INF_Q)],
    4: [(0, 2, 1), (0, 3, 2), (0, 4, 3), (1, 2, 2), (1, 3, 4), (2, 2, 4), (3, 1, 4),
        (4, 0, INF_Q)],
    5: [(0, 2, 1), (0, 3, 2), (0, 5, 3), (1, 2, 2), (1, 4, 3), (2, 2, 2), (2, 3, 3),
        (3, 1, 2), (3, 2, 3), (4, 1, 3), (5, 0, INF_Q)],
}


@pytest.fixture(scope="session")
def gstar():
    return from_edges(GSTAR_EDGES)


@pytest.fixture
def gstar_file(tmp_path):
    p = tmp_path / "gstar.txt"
    p.write_text("".join(f"{u} {v} {q}\n" for u, v, q in GSTAR_EDGES))
    return p


@st.composite
def small_graphs(draw, max_n=24, directed=False, weighted=False, ks=(1, 2, 3, 5, 9)):
    """Random simple graphs with ``m <= 4n`` and ``k`` drawn from ``ks``."""
    n = draw(st.integers(1, max_n))
    cap = n * (n - 1) // 2
    m = draw(st.integers(0, min(4 * n, cap)))
    k = draw(st.sampled_from(ks))
    seed = draw(st.integers(0, 2**31 - 1))
    if m == 0:
        return from_edges([], n=n, directed=directed)
    g = generate_random(n, m, k, seed=seed, directed=directed)
    if weighted:
        rng = np.random.default_rng(seed)
        edges = [(u, v, q, int(rng.integers(1, 6))) for u, v, q in g.edges()]
        g = from_edges(edges, n=n, directed=directed)
    return g


#: one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
