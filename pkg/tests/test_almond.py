from collections import Counter

import pytest
from hypothesis import assume, given, settings

from junctionc import oracle
from junctionc.almond import build_almond_tree, contract, marginalization_budget
from junctionc.errors import BoundExceededError
from junctionc.graph_model import Universe, cliques
from junctionc.junction_core import (
    Separator,
    build_junction_graph,
    kruskal_min_cost_tree,
    make_cliques,
    separator_multiset,
)

from .conftest import chordal_graphs

U6 = Universe.from_cardinalities([2] * 6)  # A..F


def _tree(var_sets, u=U6):
    return kruskal_min_cost_tree(build_junction_graph(var_sets, u))


def _almond(jt):
    return build_almond_tree(jt.cliques, separator_multiset(jt))


def test_star_folds_into_one_node():
    # {A,B}, {A,C}, {A,D} with separator {A} twice
    a = build_almond_tree(make_cliques(U6, [{0, 1}, {0, 2}, {0, 3}]), {Separator((0,), 2): 2})
    assert len(a.separator_nodes) == 1
    (s,) = a.separator_nodes
    assert a.nodes[s].vars == (0,) and a.nodes[s].multiplicity == 2
    assert sorted((l.sub, l.sup) for l in a.links) == [(s, 0), (s, 1), (s, 2)]
    assert a.degree(s) == 3


def test_star_all_valid_trees_coincide():
    cs = make_cliques(U6, [{0, 1}, {0, 2}, {0, 3}])
    valid = [t for t, ok in oracle.enumerate_almond_trees(cs, {Separator((0,), 2): 2}) if ok]
    assert len(valid) == 1
    assert valid[0].links == _almond(_tree([{0, 1}, {0, 2}, {0, 3}])).links


def test_chain_gets_no_extra_separator():
    jt = _tree([{0, 1, 2}, {1, 2, 3}, {2, 3, 4}])
    a = _almond(jt)
    assert [a.nodes[i].vars for i in a.separator_nodes] == [(1, 2), (2, 3)]
    assert all(a.degree(i) == 2 for i in a.separator_nodes)


def test_subset_separator_hangs_off_larger_separator():
    # {A,B,C}, {A,B,D}, {A,E}, {A,F}: separators {A,B} once and {A} twice
    jt = _tree([{0, 1, 2}, {0, 1, 3}, {0, 4}, {0, 5}])
    assert separator_multiset(jt) == Counter({Separator((0, 1), 4): 1, Separator((0,), 2): 2})
    a = _almond(jt)
    ab, a_ = a.separator_nodes
    assert a.nodes[ab].vars == (0, 1) and a.nodes[a_].vars == (0,)
    assert (a_, ab) in [(l.sub, l.sup) for l in a.links]
    assert a.has_running_intersection()


def test_single_clique_unchanged():
    jt = _tree([{0, 1, 2}])
    for a in (_almond(jt), contract(jt)):
        assert a.links == () and a.n_cliques == 1 and list(a.separator_nodes) == []


def test_contract_star_of_three_links():
    # four cliques meeting only in A: three {A} links fold into one node of degree 4
    jt = _tree([{0, 1}, {0, 2}, {0, 3}, {0, 4}])
    a = contract(jt)
    (s,) = a.separator_nodes
    assert a.nodes[s].multiplicity == 3
    assert a.degree(s) == 4
    assert a.is_tree() and a.has_running_intersection()


def test_contract_chain_inserts_degree_two_nodes():
    jt = _tree([{0, 1, 2}, {1, 2, 3}, {2, 3, 4}])
    a = contract(jt)
    assert [a.degree(i) for i in a.separator_nodes] == [2, 2]
    assert sorted((l.sub, l.sup) for l in a.links) == [(3, 0), (3, 1), (4, 1), (4, 2)]


def test_star_budget():
    # derived by counting the operations of both propagations on this instance
    jt = _tree([{0, 1}, {0, 2}, {0, 3}, {0, 4}])
    jb, ab = marginalization_budget(jt), marginalization_budget(_almond(jt))
    assert (jb.marginalizations, jb.stored_tables, jb.marginalization_work) == (6, 3, 24)
    assert (ab.marginalizations, ab.stored_tables, ab.marginalization_work) == (4, 3, 16)
    assert ab.stored_per_separator == (3,)


@pytest.mark.parametrize("sets", [[{0, 1}, {1, 2}], [{0, 1, 2}, {1, 2, 3}, {2, 3, 4}]])
def test_budgets_equal_without_repeats(sets):
    jt = _tree(sets)
    jb, ab = marginalization_budget(jt), marginalization_budget(_almond(jt))
    assert jb.marginalizations == ab.marginalizations
    assert jb.stored_tables == ab.stored_tables


@settings(max_examples=40)
@given(chordal_graphs())
def test_almond_structure(g):
    jt = kruskal_min_cost_tree(build_junction_graph(cliques(g), g.universe))
    for a in (_almond(jt), contract(jt)):
        assert a.is_tree() and a.has_running_intersection()
        for l in a.links:
            assert set(a.nodes[l.sub].vars) < set(a.nodes[l.sup].vars)
        for i in a.separator_nodes:
            upward = sum(1 for l in a.links if l.sub == i)
            assert upward == a.nodes[i].multiplicity + 1


@settings(max_examples=40)
@given(chordal_graphs())
def test_almond_saves_marginalizations(g):
    jt = kruskal_min_cost_tree(build_junction_graph(cliques(g), g.universe))
    a = _almond(jt)
    jb, ab = marginalization_budget(jt), marginalization_budget(a)
    repeated = sum(a.nodes[i].multiplicity - 1 for i in a.separator_nodes)
    assert jb.marginalizations - ab.marginalizations == repeated
    assert ab.marginalization_work <= jb.marginalization_work
    assert ab.stored_per_separator == tuple(a.degree(i) - 1 for i in a.separator_nodes)


@settings(max_examples=30)
@given(chordal_graphs(max_cliques=6))
def test_greedy_almond_cost_is_minimal(g):
    jt = kruskal_min_cost_tree(build_junction_graph(cliques(g), g.universe))
    try:
        valid = [t for t, ok in oracle.enumerate_almond_trees(jt.cliques, separator_multiset(jt)) if ok]
    except BoundExceededError:
        assume(False)
    assert _almond(jt).total_cost == min(t.total_cost for t in valid)
