"""Brute-force reference computations for tests and verification suites.

Nothing here is clever on purpose: joints are built configuration by
configuration, spanning trees and Almond trees are enumerated outright, and
triangulations are tried for every elimination order. Each routine refuses
inputs above a hard size bound.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations, permutations, product
from math import prod
from typing import Iterable, Iterator, Mapping, Sequence

import networkx as nx
import numpy as np

from .almond import AlmondLink, AlmondNode, AlmondTree
from .errors import BoundExceededError, ContractViolation
from .graph_model import EliminationOrder, TriangulationResult, UndirectedGraph, Universe
from .junction_core import Clique, JunctionGraph, JunctionTree, Link, Separator
from .propagation import Potential

__all__ = [
    "JointTable",
    "SpanningTree",
    "joint_from_factors",
    "oracle_marginal",
    "enumerate_spanning_trees",
    "enumerate_almond_trees",
    "enumerate_elimination_orders",
    "min_fill",
    "min_total_clique_weight",
]

DEFAULT_JOINT_BOUND = 2**20


@dataclass(frozen=True)
class JointTable:
    universe: Universe
    table: np.ndarray  # flat, last variable fastest


def _flat_index(config: Sequence[int], scope: Sequence[int], cards: Sequence[int]) -> int:
    idx = 0
    for v, c in zip(scope, cards):
        idx = idx * c + config[v]
    return idx


def joint_from_factors(
    universe: Universe, factors: Iterable[Potential], bound: int = DEFAULT_JOINT_BOUND
) -> JointTable:
    """Product of all factors evaluated at every configuration of the universe."""
    cards = universe.cardinalities
    size = prod(cards)
    if size > bound:
        raise BoundExceededError(f"joint has {size} configurations, above the oracle bound {bound}")
    factors = [(f.scope, f.cards, f.flat.tolist()) for f in factors]
    out = np.empty(size)
    for k, config in enumerate(product(*(range(c) for c in cards))):
        value = 1.0
        for scope, fcards, flat in factors:
            value *= flat[_flat_index(config, scope, fcards)]
        out[k] = value
    return JointTable(universe, out)


def oracle_marginal(jt: JointTable, vars_: Iterable[int]) -> Potential:
    """Exact marginal of the joint onto ``vars_`` by summing configurations."""
    scope = tuple(sorted(set(vars_)))
    cards = jt.universe.cardinalities
    if any(not 0 <= v < len(cards) for v in scope):
        raise ContractViolation(f"variables {scope} not all in the universe")
    sub_cards = tuple(cards[v] for v in scope)
    out = [0.0] * prod(sub_cards)
    for k, config in enumerate(product(*(range(c) for c in cards))):
        out[_flat_index(config, scope, sub_cards)] += jt.table[k]
    return Potential(scope, sub_cards, out)


@dataclass(frozen=True)
class SpanningTree:
    links: tuple[Link, ...]
    weight: int
    cost: int
    is_junction_tree: bool

    def as_junction_tree(self, jg: JunctionGraph) -> JunctionTree:
        return JunctionTree(jg.cliques, self.links)


def _literal_junction_check(cliques: Sequence[Clique], links: Sequence[Link]) -> bool:
    # the definition verbatim: every clique on the path between U and V contains U ∩ V
    g = nx.Graph()
    g.add_nodes_from(range(len(cliques)))
    g.add_edges_from(l.pair for l in links)
    sets = [set(c.vars) for c in cliques]
    for a, b in combinations(range(len(cliques)), 2):
        common = sets[a] & sets[b]
        if any(not common <= sets[w] for w in nx.shortest_path(g, a, b)):
            return False
    return True


def enumerate_spanning_trees(jg: JunctionGraph, max_cliques: int = 8) -> list[SpanningTree]:
    """Every spanning tree of the junction graph with weight, cost and junction verdict."""
    n = len(jg.cliques)
    if n > max_cliques:
        raise BoundExceededError(f"spanning-tree enumeration limited to {max_cliques} cliques (got {n})")
    links = list(jg.links)
    out = []
    for chosen in _spanning_link_sets(n, links):
        tree_links = tuple(links[i] for i in chosen)
        out.append(
            SpanningTree(
                tree_links,
                sum(l.weight for l in tree_links),
                sum(l.cost for l in tree_links),
                _literal_junction_check(jg.cliques, tree_links),
            )
        )
    return out


def _spanning_link_sets(n: int, links: Sequence[Link]) -> Iterator[tuple[int, ...]]:
    """Include/exclude each link in turn; exclusion only while the rest can still connect."""
    if n == 1:
        yield ()
        return
    m = len(links)

    def find(parent, x):
        while parent[x] != x:
            x = parent[x]
        return x

    def connectable(parent, start):
        comp = list(parent)
        groups = len({find(comp, i) for i in range(n)})
        for l in links[start:]:
            a, b = find(comp, l.u), find(comp, l.v)
            if a != b:
                comp[a] = b
                groups -= 1
                if groups == 1:
                    return True
        return groups == 1

    def rec(i, parent, chosen):
        if len(chosen) == n - 1:
            yield tuple(chosen)
            return
        if i == m:
            return
        l = links[i]
        a, b = find(parent, l.u), find(parent, l.v)
        if a != b:
            nxt = list(parent)
            nxt[a] = b
            chosen.append(i)
            yield from rec(i + 1, nxt, chosen)
            chosen.pop()
        if connectable(parent, i + 1):
            yield from rec(i + 1, parent, chosen)

    yield from rec(0, list(range(n)), [])


def enumerate_almond_trees(
    cliques: Sequence[Clique], separators: Mapping[Separator, int], limit: int = 200_000
) -> list[tuple[AlmondTree, bool]]:
    """Every choice of ``n + 1`` superset links per separator that forms a tree.

    Each tree is paired with whether it has the running-intersection
    property. Link cost is the sum of both end tables.
    """
    card = {v: k for c in cliques for v, k in zip(c.vars, c.cards)}
    nodes = [AlmondNode("clique", c.vars, c.cards) for c in cliques]
    seps = sorted(separators, key=lambda s: (-s.weight, s.vars))
    nodes += [AlmondNode("separator", s.vars, tuple(card[v] for v in s.vars), separators[s]) for s in seps]
    sets = [frozenset(n.vars) for n in nodes]
    choices = []
    for idx in range(len(cliques), len(nodes)):
        cands = [j for j in range(len(nodes)) if j != idx and sets[idx] < sets[j]]
        choices.append([(idx, combo) for combo in combinations(cands, nodes[idx].multiplicity + 1)])
    total = prod(len(c) for c in choices)
    if total > limit:
        raise BoundExceededError(f"{total} Almond link selections exceed the enumeration limit {limit}")
    out = []
    for selection in product(*choices):
        links = tuple(
            AlmondLink(idx, j, nodes[idx].table_size + nodes[j].table_size)
            for idx, combo in selection
            for j in combo
        )
        tree = AlmondTree(tuple(nodes), links)
        if tree.is_tree():
            out.append((tree, tree.has_running_intersection()))
    return out


def _simulate_elimination(g: UndirectedGraph, order: Sequence[int]) -> TriangulationResult:
    h = nx.Graph()
    h.add_nodes_from(g.nodes)
    h.add_edges_from(g.edges())
    work = h.copy()
    fill = set()
    for v in order:
        nbrs = list(work.neighbors(v))
        for a, b in combinations(nbrs, 2):
            if not work.has_edge(a, b):
                work.add_edge(a, b)
                h.add_edge(a, b)
                fill.add((min(a, b), max(a, b)))
        work.remove_node(v)
    maximal = tuple(sorted(tuple(sorted(c)) for c in nx.find_cliques(h)))
    weight = sum(prod(g.universe[v].cardinality for v in c) for c in maximal)
    tri = g.with_edges(fill)
    return TriangulationResult(tri, frozenset(fill), EliminationOrder(tuple(order)), weight, maximal)


def enumerate_elimination_orders(g: UndirectedGraph, max_vars: int = 10) -> Iterator[TriangulationResult]:
    """One triangulation per permutation of the variables, in lexicographic order."""
    if len(g) > max_vars:
        raise BoundExceededError(f"order enumeration limited to {max_vars} variables (got {len(g)})")
    for order in permutations(g.nodes):
        yield _simulate_elimination(g, order)


def min_fill(g: UndirectedGraph, max_vars: int = 10) -> int:
    return min(r.fill_count for r in enumerate_elimination_orders(g, max_vars))


def min_total_clique_weight(g: UndirectedGraph, max_vars: int = 10) -> int:
    return min(r.total_clique_weight for r in enumerate_elimination_orders(g, max_vars))
