import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from junctionc import oracle
from junctionc.almond import build_almond_tree, contract
from junctionc.errors import ContractViolation, ImpossibleEvidenceError, InconsistencyError
from junctionc.graph_model import Universe, cliques, triangulate_heuristic
from junctionc.junction_core import build_junction_graph, kruskal_min_cost_tree, separator_multiset
from junctionc.propagation import (
    Evidence,
    Potential,
    assign_factors,
    divide,
    make_schedule,
    marginalize,
    multiply,
    propagate,
    query_marginal,
)

from .conftest import models

U3 = Universe.from_cardinalities([2, 2, 2])


def _tree(var_sets, u=U3):
    return kruskal_min_cost_tree(build_junction_graph(var_sets, u))


def _chain_factors():
    # P(A) P(B|A) P(C|B)
    pa = Potential((0,), (2,), [0.3, 0.7])
    pba = Potential((0, 1), (2, 2), [0.9, 0.1, 0.2, 0.8])
    pcb = Potential((1, 2), (2, 2), [0.6, 0.4, 0.25, 0.75])
    return [pa, pba, pcb]


def _compile(model):
    tri = triangulate_heuristic(model.markov_graph())
    return kruskal_min_cost_tree(build_junction_graph(cliques(tri.graph), model.universe))


# table operations

def test_multiply_broadcasts_last_fastest():
    p = Potential((0, 1), (2, 2))
    q = Potential((1,), (2,), [2, 3])
    assert multiply(p, q).flat.tolist() == [2, 3, 2, 3]


def test_multiply_by_ones_is_identity():
    p = Potential((0, 1), (2, 2), [1, 2, 3, 4])
    assert multiply(p, Potential((0,), (2,))) == p


def test_multiply_zero_absorbs():
    p = Potential((0, 1), (2, 2), [1, 2, 3, 4])
    assert multiply(p, Potential((1,), (2,), [0, 1])).flat.tolist() == [0, 2, 0, 4]


def test_multiply_needs_subscope():
    with pytest.raises(ContractViolation):
        multiply(Potential((0,), (2,)), Potential((1,), (2,)))


def test_marginalize_fixes_index_convention():
    p = Potential((0, 1), (2, 2), [1, 2, 3, 4])
    assert marginalize(p, (0,)).flat.tolist() == [3, 7]
    assert marginalize(p, (1,)).flat.tolist() == [4, 6]
    assert marginalize(p, (0, 1)) == p
    empty = marginalize(p, ())
    assert empty.scope == () and empty.flat.tolist() == [10]


def test_divide():
    assert divide(Potential((0,), (2,), [2, 4]), Potential((0,), (2,), [1, 2])).flat.tolist() == [2, 2]
    assert divide(Potential((0,), (2,), [0, 3]), Potential((0,), (2,), [0, 3])).flat.tolist() == [0, 1]


def test_divide_positive_by_zero():
    with pytest.raises(InconsistencyError) as info:
        divide(Potential((0,), (2,), [1, 0]), Potential((0,), (2,), [0, 1]))
    assert info.value.configuration == 0


def test_potential_rejects_bad_tables():
    with pytest.raises(ContractViolation):
        Potential((1, 0), (2, 2))
    with pytest.raises(ContractViolation):
        Potential((0,), (2,), [1, -1])
    with pytest.raises(ContractViolation):
        Potential((0,), (2,), [1, 2, 3])


@given(hnp.arrays(float, (2, 3, 2), elements=st.floats(0, 10)), st.sets(st.sampled_from([0, 1, 2])))
def test_marginalize_preserves_total(arr, target):
    p = Potential((0, 1, 2), (2, 3, 2), arr)
    assert np.isclose(marginalize(p, target).total(), p.total())


# assignment and propagation

def test_no_factors_leaves_ones():
    state = assign_factors([], _tree([{0, 1}, {1, 2}]))
    assert all(np.all(p.table == 1) for p in state.node_potentials)


def test_factors_go_to_lowest_containing_clique():
    tree = _tree([{0, 1}, {1, 2}])
    f, g = Potential((0, 1), (2, 2), [1, 2, 3, 4]), Potential((1,), (2,), [5, 6])
    state = assign_factors([f, g], tree)
    assert state.node_potentials[0] == multiply(f, g)
    assert np.all(state.node_potentials[1].table == 1)


def test_factor_outside_every_clique():
    with pytest.raises(ContractViolation):
        assign_factors([Potential((0, 2), (2, 2))], _tree([{0, 1}, {1, 2}]))


def test_single_clique_unchanged():
    f = Potential((0, 1), (2, 2), [1, 2, 3, 4])
    tree = kruskal_min_cost_tree(build_junction_graph([{0, 1}], U3))
    out = propagate(assign_factors([f], tree))
    assert out.node_potentials[0] == f
    assert out.stats.marginalizations == 0


def test_chain_matches_joint():
    tree = _tree([{0, 1}, {1, 2}])
    state = propagate(assign_factors(_chain_factors(), tree))
    joint = oracle.joint_from_factors(U3, _chain_factors())
    np.testing.assert_allclose(state.node_potentials[1].flat, oracle.oracle_marginal(joint, (1, 2)).flat, rtol=1e-12)
    # P(C=1) = sum_b P(b) P(C=1|b) with P(B=1) = 0.3*0.1 + 0.7*0.8 = 0.59
    np.testing.assert_allclose(query_marginal(state, 2), [0.41 * 0.6 + 0.59 * 0.25, 0.41 * 0.4 + 0.59 * 0.75])


def test_chain_with_evidence():
    tree = _tree([{0, 1}, {1, 2}])
    state = propagate(assign_factors(_chain_factors(), tree), {2: 1})
    joint = oracle.joint_from_factors(U3, _chain_factors() + [Potential((2,), (2,), [0, 1])])
    want = oracle.oracle_marginal(joint, (0,)).flat
    np.testing.assert_allclose(query_marginal(state, 0), want / want.sum(), rtol=1e-12)
    assert query_marginal(state, 2).tolist() == [0.0, 1.0]


def test_uniform_model():
    tree = _tree([{0, 1}, {1, 2}])
    state = propagate(assign_factors([], tree))
    for v in range(3):
        assert query_marginal(state, v).tolist() == [0.5, 0.5]


def test_soft_evidence():
    tree = _tree([{0, 1}, {1, 2}])
    state = propagate(assign_factors(_chain_factors(), tree), Evidence(soft={0: [1.0, 3.0]}))
    np.testing.assert_allclose(query_marginal(state, 0), [0.3 / 2.4, 2.1 / 2.4])


def test_impossible_evidence():
    tree = _tree([{0, 1}, {1, 2}])
    hard_no = [Potential((0, 1), (2, 2), [1, 0, 0, 1])]
    with pytest.raises(ImpossibleEvidenceError):
        propagate(assign_factors(hard_no, tree), {0: 0, 1: 1})
    almond = build_almond_tree(tree.cliques, separator_multiset(tree))
    with pytest.raises(ImpossibleEvidenceError):
        propagate(assign_factors(hard_no, almond), {0: 0, 1: 1})


def test_query_needs_calibration():
    with pytest.raises(ContractViolation):
        query_marginal(assign_factors([], _tree([{0, 1}, {1, 2}])), 0)


def test_schedule_collects_before_distributing():
    s = make_schedule([[1], [0, 2], [1]], 1)
    assert s.messages == ((2, 1), (0, 1), (1, 0), (1, 2))


def test_propagate_leaves_input_untouched():
    tree = _tree([{0, 1}, {1, 2}])
    state = assign_factors(_chain_factors(), tree)
    before = [p.copy() for p in state.node_potentials]
    propagate(state, {0: 1})
    assert state.node_potentials == before and not state.calibrated


# properties on random models

@settings(max_examples=40)
@given(models())
def test_marginals_match_oracle(model):
    state = propagate(assign_factors(model.factors, _compile(model)))
    joint = oracle.joint_from_factors(model.universe, model.factors)
    for v in range(len(model.universe)):
        want = oracle.oracle_marginal(joint, (v,)).flat
        np.testing.assert_allclose(query_marginal(state, v), want / want.sum(), rtol=1e-9)


@settings(max_examples=40)
@given(models(), st.data())
def test_almond_and_contracted_match_hugin(model, data):
    jt = _compile(model)
    n = len(model.universe)
    ev = data.draw(st.dictionaries(st.integers(0, n - 1), st.integers(0, 1), max_size=3))
    hugin = propagate(assign_factors(model.factors, jt), ev)
    z = hugin.node_potentials[0].total()
    for other in (build_almond_tree(jt.cliques, separator_multiset(jt)), contract(jt)):
        state = propagate(assign_factors(model.factors, other), ev)
        for a, b in zip(state.clique_potentials, hugin.node_potentials):
            assert np.max(np.abs(a.flat - b.flat)) <= 1e-12 * z


@settings(max_examples=40)
@given(models())
def test_calibration_and_stability(model):
    jt = _compile(model)
    state = propagate(assign_factors(model.factors, jt))
    z = state.node_potentials[0].total()
    for l, sep in zip(jt.links, state.separator_potentials):
        for end in (l.u, l.v):
            assert np.max(np.abs(marginalize(state.node_potentials[end], sep.scope).flat - sep.flat)) <= 1e-12 * z
    again = propagate(state)
    for a, b in zip(again.node_potentials, state.node_potentials):
        assert np.max(np.abs(a.flat - b.flat)) <= 1e-12 * z


@settings(max_examples=40)
@given(models())
def test_almond_stored_tables_are_degree_minus_one(model):
    jt = _compile(model)
    almond = build_almond_tree(jt.cliques, separator_multiset(jt))
    state = propagate(assign_factors(model.factors, almond))
    for i in almond.separator_nodes:
        assert state.stats.stored_tables[i] == almond.degree(i) - 1
