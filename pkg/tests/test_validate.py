from __future__ import annotations

from hypothesis import given
from hypothesis import strategies as st

from wcsd.graph import from_edges
from wcsd.naive import build_naive, flatten_naive
from wcsd.online import all_pairs_oracle
from wcsd.ordering import identity_order, make_order
from wcsd.wcindex import (build, build_directed, check_append_order, check_hub_rank,
                          check_monotone, check_size_bound, validate_complete, validate_minimal,
                          validate_sound)
from wcsd.wcindex.validate import constrained_diameter, edit_index

from conftest import small_graphs

ORDERS = st.sampled_from(["degree", "mde", "hybrid", "random"])


def test_gstar_passes_everything(gstar):
    idx = build(gstar, identity_order(gstar))
    sound = validate_sound(idx, gstar)
    assert sound.ok and sound.checked == 32
    comp = validate_complete(idx, gstar)
    assert comp.ok and comp.checked == 6 * 6 * 5
    mini = validate_minimal(idx, gstar)
    assert mini.ok and mini.checked == 32 - 6
    for check in (check_monotone, check_append_order, check_hub_rank):
        assert check(idx).ok
    assert check_size_bound(idx, gstar).ok


def test_injected_entry_is_unsound(gstar):
    idx = build(gstar, identity_order(gstar))
    bad = edit_index(idx, add=[(2, 0, 1, 5)])
    rep = validate_sound(bad, gstar)
    assert rep.count == 1
    assert "L(2)" in rep.violations[0]


def test_removed_entry_breaks_completeness(gstar):
    idx = build(gstar, identity_order(gstar))
    bad = edit_index(idx, remove=[(5, 2, 2, 2)])
    rep = validate_complete(bad, gstar)
    assert not rep.ok
    assert any("query (2, 5, 2.0): index 3 != oracle 2" in v for v in rep.violations)
    assert validate_sound(bad, gstar).ok


def test_self_only_index_is_sound():
    g = from_edges([], n=4)
    idx = build(g)
    assert validate_sound(idx, g).ok and idx.total_entries == 4


def test_single_edge_is_complete():
    g = from_edges([(0, 1, 3)])
    assert validate_complete(build(g), g).ok


def test_flattened_naive_is_redundant(gstar):
    flat = flatten_naive(build_naive(gstar, identity_order(gstar)), gstar)
    assert validate_complete(flat, gstar).ok
    rep = validate_minimal(flat, gstar)
    assert rep.count > 0
    assert any("dominated" in v for v in rep.violations)


def test_dominance_detected_without_necessity(gstar):
    idx = build(gstar, identity_order(gstar))
    bad = edit_index(idx, add=[(5, 0, 6, 1)])
    rep = validate_minimal(bad, necessity=False)
    # one reported pair per dominating entry of hub v0 in L(5)
    assert rep.count == 3
    assert all(v.startswith("in L(5): entry (0, 6, 1.0) dominated") for v in rep.violations)
    assert not check_monotone(bad).ok


def test_hub_rank_flags_low_priority_hub(gstar):
    idx = build(gstar, identity_order(gstar))
    bad = edit_index(idx, add=[(1, 4, 3, 4)])
    assert not check_hub_rank(bad).ok


def test_diameter_of_gstar(gstar):
    D = all_pairs_oracle(gstar)
    assert constrained_diameter(D) == 5


@given(small_graphs(max_n=16), ORDERS)
def test_index_invariants(g, strategy):
    idx = build(g, make_order(g, strategy, seed=9))
    orc = all_pairs_oracle(g)
    assert validate_sound(idx, g, orc).ok
    assert validate_complete(idx, g, orc).ok
    assert validate_minimal(idx, g).ok
    assert check_monotone(idx).ok
    assert check_append_order(idx).ok
    assert check_hub_rank(idx).ok
    assert check_size_bound(idx, g, orc).ok


@given(small_graphs(max_n=14, directed=True))
def test_directed_properties(g):
    idx = build_directed(g, make_order(g, "random", seed=4))
    orc = all_pairs_oracle(g)
    for check in (validate_sound, validate_complete):
        assert check(idx, g, orc).ok
    assert validate_minimal(idx, g).ok
    assert check_monotone(idx).ok and check_hub_rank(idx).ok and check_append_order(idx).ok


@given(small_graphs(max_n=20), ORDERS)
def test_size_dominance_over_naive(g, strategy):
    o = make_order(g, strategy, seed=1)
    wc = build(g, o)
    nv = build_naive(g, o)
    assert wc.total_entries <= flatten_naive(nv, g).total_entries


@given(small_graphs(max_n=16, weighted=True))
def test_weighted_index_is_sound_and_complete(g):
    idx = build(g)
    orc = all_pairs_oracle(g)
    assert validate_sound(idx, g, orc).ok and validate_complete(idx, g, orc).ok
    assert check_monotone(idx).ok and check_append_order(idx).ok


def test_report_summary_lists_at_most_fifty():
    from wcsd.wcindex import ValidationReport

    rep = ValidationReport("x")
    for i in range(80):
        rep.flag(str(i))
    assert rep.count == 80 and len(rep.violations) == 50
    assert rep.summary() == "x: 0 checked, 80 violation(s)"
