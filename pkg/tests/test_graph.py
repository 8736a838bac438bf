from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from wcsd.graph import (GraphFormatError, filter_at_threshold, from_edges, generate_random,
                        load_dimacs, load_edge_list, save_dimacs, save_edge_list)

from conftest import GSTAR_EDGES, small_graphs


def _edge_set(g):
    return {(u, v, q) for u, v, q in g.edges()}


def test_load_gstar(gstar_file):
    g = load_edge_list(gstar_file)
    assert (g.n, g.edge_count, g.num_qualities) == (6, 8, 5)
    assert g.quality_table.tolist() == [1, 2, 3, 4, 5]
    assert _edge_set(g) == {(u, v, float(q)) for u, v, q in GSTAR_EDGES}


def test_single_edge_file(tmp_path):
    p = tmp_path / "one.txt"
    p.write_text("0 1 2.5\n")
    g = load_edge_list(p)
    assert (g.n, g.edge_count, g.num_qualities) == (2, 1, 1)


def test_parallel_edges_keep_max(tmp_path):
    p = tmp_path / "par.txt"
    p.write_text("0 1 3\n1 0 5\n")
    g = load_edge_list(p)
    assert g.edges() == [(0, 1, 5.0)]


def test_comments_and_self_loops(tmp_path):
    p = tmp_path / "c.txt"
    p.write_text("# header\n0 1 1\n\n2 2 7\n1 2 4\n")
    g = load_edge_list(p)
    assert _edge_set(g) == {(0, 1, 1.0), (1, 2, 4.0)}
    assert g.quality_table.tolist() == [1, 4]


@pytest.mark.parametrize("body,line", [("0 1 3\n0 x 2\n", 2), ("0 1\n", 1), ("0 -1 2\n", 1),
                                       ("0 1 q\n", 1)])
def test_parse_errors_carry_line(tmp_path, body, line):
    p = tmp_path / "bad.txt"
    p.write_text(body)
    with pytest.raises(GraphFormatError) as exc:
        load_edge_list(p)
    assert exc.value.line == line


def test_negative_id_message(tmp_path):
    p = tmp_path / "neg.txt"
    p.write_text("0 -3 1\n")
    with pytest.raises(GraphFormatError, match="negative"):
        load_edge_list(p)


def test_empty_file_is_an_error(tmp_path):
    p = tmp_path / "empty.txt"
    p.write_text("# nothing\n")
    with pytest.raises(GraphFormatError, match="no edges"):
        load_edge_list(p)


def test_sparse_ids_are_compacted(tmp_path):
    p = tmp_path / "sparse.txt"
    p.write_text("10 30 1\n30 20 2\n")
    g = load_edge_list(p)
    assert g.n == 3
    assert g.original_ids.tolist() == [10, 20, 30]
    out = tmp_path / "back.txt"
    save_edge_list(g, out)
    assert load_edge_list(out).same_structure(g)
    assert "10 30 1" in out.read_text()


def test_filter_examples(gstar):
    assert _edge_set(filter_at_threshold(gstar, 4)) == {(1, 2, 5.0), (2, 3, 4.0), (3, 4, 4.0)}
    assert filter_at_threshold(gstar, 1).edge_count == 8
    f = filter_at_threshold(gstar, 6)
    assert f.edge_count == 0 and f.n == 6


def test_generate_examples():
    g = generate_random(6, 8, 5, "gnm", seed=1)
    assert g.edge_count == 8 and g.num_qualities <= 5 and g.n == 6
    grid = generate_random(9, 12, 3, "grid", seed=0)
    assert grid.edge_count == 12
    assert sorted(grid.degree().tolist()) == [2, 2, 2, 2, 3, 3, 3, 3, 4]
    with pytest.raises(ValueError, match=r"exceeds max simple-graph edges \(10\)"):
        generate_random(5, 11, 2, "gnm", seed=0)


def test_generate_is_deterministic():
    a = generate_random(200, 600, 4, seed=11)
    b = generate_random(200, 600, 4, seed=11)
    c = generate_random(200, 600, 4, seed=12)
    assert a.fingerprint() == b.fingerprint() != c.fingerprint()


def test_connected_gnm_is_connected():
    from scipy.sparse import csr_matrix
    from scipy.sparse.csgraph import connected_components

    g = generate_random(500, 520, 2, seed=3, connected=True)
    mat = csr_matrix((np.ones(len(g.indices)), g.indices, g.indptr), shape=(g.n, g.n))
    assert connected_components(mat)[0] == 1


def test_dimacs_round_trip(tmp_path, gstar):
    p = tmp_path / "g.gr"
    save_dimacs(gstar, p)
    back = load_dimacs(p, directed=False)
    assert _edge_set(back) == _edge_set(gstar)


def test_lengths_and_directed():
    g = from_edges([(0, 1, 2, 7), (1, 0, 2, 3), (1, 2, 1, 4)], directed=True)
    assert g.edge_count == 3
    assert g.arc_lengths().tolist() == [7, 3, 4]
    assert g.degree().tolist() == [2, 3, 1]
    with pytest.raises(ValueError, match="positive"):
        from_edges([(0, 1, 1, 0)])


def test_threshold_rank_between_values(gstar):
    assert gstar.threshold_rank(2.5) == gstar.threshold_rank(3) == 2
    assert gstar.threshold_rank(0) == 0
    assert gstar.threshold_rank(float("inf")) == gstar.top


@given(small_graphs())
def test_undirected_adjacency_is_symmetric(g):
    src = np.repeat(np.arange(g.n), np.diff(g.indptr))
    fwd = set(zip(src.tolist(), g.indices.tolist(), g.qrank.tolist()))
    assert fwd == {(b, a, q) for a, b, q in fwd}
    assert not any(a == b for a, b, _ in fwd)


@given(small_graphs())
def test_rank_mapping_is_order_preserving(g):
    raw = g.quality_table[g.qrank]
    order_r = np.argsort(g.qrank, kind="stable")
    assert np.all(np.diff(raw[order_r]) >= 0)
    assert len(np.unique(raw)) == g.num_qualities
    assert np.all(np.diff(g.quality_table) > 0)


@given(small_graphs(), st.floats(0, 10), st.floats(0, 10))
def test_filter_nesting(g, w1, w2):
    lo, hi = min(w1, w2), max(w1, w2)
    assert _edge_set(filter_at_threshold(g, hi)) <= _edge_set(filter_at_threshold(g, lo))


@given(small_graphs(weighted=True))
def test_load_save_load_is_identity(tmp_path_factory, g):
    if g.edge_count == 0:
        return
    d = tmp_path_factory.mktemp("rt")
    save_edge_list(g, d / "a.txt")
    first = load_edge_list(d / "a.txt")
    save_edge_list(first, d / "b.txt")
    second = load_edge_list(d / "b.txt")
    assert second.fingerprint() == first.fingerprint()
    assert (d / "a.txt").read_text() == (d / "b.txt").read_text() or first.original_ids is not None


def test_header_keeps_trailing_isolated_vertex(tmp_path):
    g = from_edges([(0, 1, 2.0)], n=4)
    p = tmp_path / "iso.txt"
    save_edge_list(g, p)
    back = load_edge_list(p)
    assert back.n == 4 and back.original_ids is None
    assert back.fingerprint() == g.fingerprint()
    # without the header the ids are compacted
    p.write_text("0 1 2\n")
    assert load_edge_list(p).n == 2
