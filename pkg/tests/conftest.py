import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from junctionc.graph_model import UndirectedGraph, Universe
from junctionc.verify import random_chordal_graph, random_model

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile("default")


@st.composite
def graphs(draw, min_nodes=1, max_nodes=7, connected=False, max_card=3):
    n = draw(st.integers(min_nodes, max_nodes))
    cards = draw(st.lists(st.integers(1 if max_card == 1 else 2, max_card), min_size=n, max_size=n))
    pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    edges = [p for p, keep in zip(pairs, mask) if keep]
    if connected:
        # a random spanning path keeps the graph connected
        perm = draw(st.permutations(range(n)))
        edges += [tuple(sorted((perm[k], perm[k + 1]))) for k in range(n - 1)]
    return UndirectedGraph.from_edges(Universe.from_cardinalities(cards), edges)


@st.composite
def chordal_graphs(draw, max_cliques=8):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_chordal_graph(np.random.default_rng(seed), 1, max_cliques)


@st.composite
def models(draw, max_vars=8):
    seed = draw(st.integers(0, 2**32 - 1))
    return random_model(np.random.default_rng(seed), max_vars)


def cycle(n, card=2):
    u = Universe.from_cardinalities([card] * n)
    return UndirectedGraph.from_edges(u, [(i, (i + 1) % n) for i in range(n)])


@pytest.fixture
def abcd():
    """A, B, C, D on the cycle A-B-D-C."""
    u = Universe.from_cardinalities([2, 2, 2, 2], ["A", "B", "C", "D"])
    return UndirectedGraph.from_edges(u, [(0, 1), (1, 3), (3, 2), (2, 0)])
