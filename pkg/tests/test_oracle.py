import itertools

import numpy as np
import pytest

from junctionc import oracle
from junctionc.errors import BoundExceededError
from junctionc.graph_model import Universe, eliminate
from junctionc.junction_core import build_junction_graph
from junctionc.propagation import Potential

from .conftest import cycle

U3 = Universe.from_cardinalities([2, 3, 2])


def test_single_full_factor_is_the_joint():
    f = Potential((0, 1, 2), (2, 3, 2), np.arange(12.0))
    assert oracle.joint_from_factors(U3, [f]).table.tolist() == list(range(12))


def test_disjoint_factors_give_outer_product():
    f = Potential((0,), (2,), [1, 2])
    g = Potential((1, 2), (3, 2), np.arange(1.0, 7.0))
    joint = oracle.joint_from_factors(U3, [f, g]).table
    assert joint.tolist() == np.outer([1, 2], np.arange(1.0, 7.0)).ravel().tolist()


def test_marginal_sums_configurations():
    f = Potential((0, 1, 2), (2, 3, 2), np.arange(12.0))
    joint = oracle.joint_from_factors(U3, [f])
    # hand sum over B and C for each A: 0+...+5 and 6+...+11
    assert oracle.oracle_marginal(joint, (0,)).flat.tolist() == [15, 51]
    assert oracle.oracle_marginal(joint, (0, 1, 2)).flat.tolist() == list(range(12))


def test_joint_bound():
    with pytest.raises(BoundExceededError):
        oracle.joint_from_factors(Universe.from_cardinalities([2] * 21), [])


def test_two_cliques_one_tree():
    jg = build_junction_graph([{0, 1}, {1, 2}], U3)
    trees = oracle.enumerate_spanning_trees(jg)
    assert len(trees) == 1 and trees[0].is_junction_tree


def test_complete_graph_tree_count():
    # Cayley: a complete junction graph on k cliques has k^(k-2) spanning trees
    u = Universe.from_cardinalities([2] * 6)
    jg = build_junction_graph([{0, i} for i in range(1, 6)], u)
    assert len(oracle.enumerate_spanning_trees(jg)) == 5 ** 3


def test_elimination_order_count():
    assert sum(1 for _ in oracle.enumerate_elimination_orders(cycle(5))) == 120


def test_elimination_matches_eliminate():
    g = cycle(5)
    for order in itertools.islice(itertools.permutations(range(5)), 30):
        ours = eliminate(g, order)
        ref = oracle._simulate_elimination(g, order)
        assert ours.fill_ins == ref.fill_ins
        assert ours.total_clique_weight == ref.total_clique_weight
