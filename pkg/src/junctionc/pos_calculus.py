"""Possibility calculus and the local-propagation counterexample.

A possibility relation marks which configurations of a scope can still
occur. Projecting a probability table and then taking its support gives
the same relation as taking the support first and projecting
existentially; so anything a belief-updating scheme can do, it must also
do for 0/1 relations.

The counterexample is a cycle of pairwise constraints. Procedures that
each see one edge of the cycle can only exchange single-variable
information, so a new constraint between two neighbours never reaches the
opposite edge. Adding scopes that triangulate the cycle repairs this.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Sequence

import networkx as nx
import numpy as np

from .errors import ContractViolation
from .graph_model import UndirectedGraph, Universe, _reach, cliques, is_chordal, triangulate_heuristic
from .junction_core import build_junction_graph, kruskal_min_cost_tree
from .propagation import Potential, assign_factors, marginalize, propagate

__all__ = [
    "PosRelation",
    "LocalScheme",
    "FixpointResult",
    "TriangulationWitness",
    "Example1Instance",
    "pos_of",
    "fixpoint_local_propagation",
    "check_hidden_triangulation",
    "build_example1_instance",
    "junction_tree_pos",
]


class PosRelation:
    """0/1 table over the configurations of a sorted scope."""

    __slots__ = ("scope", "cards", "table")

    def __init__(self, scope: Sequence[int], cards: Sequence[int], table):
        self.scope = tuple(scope)
        self.cards = tuple(cards)
        arr = np.asarray(table)
        if not np.isin(arr, (0, 1)).all():
            raise ContractViolation("possibility tables hold only 0 and 1")
        self.table = arr.astype(bool).reshape(self.cards)

    @classmethod
    def from_predicate(cls, scope, cards, predicate) -> PosRelation:
        table = np.zeros(cards, dtype=bool)
        for idx in np.ndindex(*cards):
            table[idx] = bool(predicate(*idx))
        return cls(scope, cards, table)

    def project(self, target: Sequence[int]) -> PosRelation:
        """Existential projection: a sub-configuration is possible if some extension is."""
        target = tuple(sorted(target))
        drop = tuple(i for i, v in enumerate(self.scope) if v not in target)
        cards = tuple(c for v, c in zip(self.scope, self.cards) if v in target)
        return PosRelation(target, cards, self.table.any(axis=drop) if drop else self.table.copy())

    def restrict(self, other: PosRelation) -> PosRelation:
        """Conjunction with a relation on a sub-scope."""
        pos = {v: i for i, v in enumerate(self.scope)}
        axes = {pos[v] for v in other.scope}
        shape = [c if i in axes else 1 for i, c in enumerate(self.cards)]
        return PosRelation(self.scope, self.cards, self.table & other.table.reshape(shape))

    def count(self) -> int:
        return int(self.table.sum())

    def as_potential(self) -> Potential:
        return Potential(self.scope, self.cards, self.table.astype(float))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, PosRelation)
            and self.scope == other.scope
            and np.array_equal(self.table, other.table)
        )

    def __repr__(self) -> str:
        return f"PosRelation(scope={self.scope}, table={self.table.astype(int).tolist()})"


def pos_of(p: Potential) -> PosRelation:
    return PosRelation(p.scope, p.cards, p.table > 0)


@dataclass(frozen=True)
class LocalScheme:
    universe: Universe
    scopes: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        object.__setattr__(self, "scopes", tuple(tuple(sorted(s)) for s in self.scopes))

    @cached_property
    def channels(self) -> tuple[tuple[int, int], ...]:
        """Scope pairs with a nonempty intersection."""
        return tuple(
            (i, j)
            for i, j in combinations(range(len(self.scopes)), 2)
            if set(self.scopes[i]) & set(self.scopes[j])
        )

    def representing_graph(self) -> UndirectedGraph:
        return UndirectedGraph.complete_on(self.universe, self.scopes)


@dataclass
class FixpointResult:
    relations: list[PosRelation]
    rounds: int
    history: list[list[int]] = field(default_factory=list)  # per-scope 1-counts after each round


def fixpoint_local_propagation(scheme: LocalScheme, relations: Sequence[PosRelation]) -> FixpointResult:
    """Exchange projections over every channel until no relation shrinks.

    The message from scope ``i`` to scope ``j`` is the projection of the
    current relation on ``i`` onto the shared variables, the most a local
    procedure can say about them.
    """
    if len(relations) != len(scheme.scopes):
        raise ContractViolation("one relation per scope required")
    rels = list(relations)
    for s, r in zip(scheme.scopes, rels):
        if r.scope != s:
            raise ContractViolation(f"relation scope {r.scope} does not match procedure scope {s}")
    history = [[r.count() for r in rels]]
    max_rounds = sum(r.table.size for r in rels) + 1
    rounds = 0
    while rounds < max_rounds:
        rounds += 1
        changed = False
        for i, j in scheme.channels:
            shared = tuple(sorted(set(scheme.scopes[i]) & set(scheme.scopes[j])))
            for a, b in ((i, j), (j, i)):
                updated = rels[b].restrict(rels[a].project(shared))
                if updated.count() != rels[b].count():
                    rels[b] = updated
                    changed = True
        history.append([r.count() for r in rels])
        if not changed:
            break
    return FixpointResult(rels, rounds, history)


@dataclass(frozen=True)
class TriangulationWitness:
    """Whether G' contains a triangulation of G; otherwise a chordless cycle of G'."""

    contains_triangulation: bool
    witness: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.contains_triangulation


def _sandwich_exists(g: UndirectedGraph, g2: UndirectedGraph) -> bool:
    # A chordal H with G <= H <= G' exists iff some elimination order of G
    # only ever creates fill-ins that are edges of G'. The graph left after
    # eliminating a set depends on the set only, so search subsets.
    n = len(g)
    nb = [sum(1 << v for v in a) for a in g.adjacency]
    full = (1 << n) - 1
    seen = {0}
    frontier = [0]
    while frontier:
        s = frontier.pop()
        if s == full:
            return True
        for v in range(n):
            if s >> v & 1:
                continue
            q = _reach(nb, s, v)
            members = [i for i in range(n) if q >> i & 1]
            if all(g2.has_edge(a, b) for a, b in combinations(members, 2)):
                t = s | 1 << v
                if t not in seen:
                    seen.add(t)
                    frontier.append(t)
    return False


def check_hidden_triangulation(g: UndirectedGraph, scheme: LocalScheme) -> TriangulationWitness:
    """Decide whether the scheme's representing graph contains a triangulation of ``g``.

    When it does not, the witness is a chordless cycle (length >= 4) of G'
    restricted to the nodes of some cycle of ``g``, shortest cycles first.
    """
    g2 = scheme.representing_graph()
    missing = [e for e in g.edges() if not g2.has_edge(*e)]
    if missing:
        raise ContractViolation(f"scopes do not cover the edges {missing} of the graph")
    if _sandwich_exists(g, g2):
        return TriangulationWitness(True)
    ng = nx.Graph(g.edges())
    cycles = sorted((tuple(c) for c in nx.simple_cycles(ng) if len(c) >= 4), key=lambda c: (len(c), sorted(c)))
    for cyc in cycles:
        sub = UndirectedGraph.from_edges(g.universe, g2.induced_edges(cyc))
        verdict = is_chordal(sub)
        if not verdict:
            return TriangulationWitness(False, verdict.witness)
    return TriangulationWitness(False)


@dataclass(frozen=True)
class Example1Instance:
    """A cycle of pairwise possibility constraints that local procedures cannot propagate.

    ``cycle`` lists variable ids around the cycle. The edge ``(cycle[0],
    cycle[1])`` starts unconstrained and is then clamped to equality; the
    edge ``(cycle[m], cycle[m+1])`` with ``m = n // 2`` is also
    unconstrained and is where the failure shows. All other edges force
    equal states. Only the first two states of each variable are possible.
    """

    universe: Universe
    cycle: tuple[int, ...]
    scheme: LocalScheme
    relations: tuple[PosRelation, ...]
    clamped: PosRelation
    query: tuple[int, int]

    @property
    def graph(self) -> UndirectedGraph:
        n = len(self.cycle)
        return UndirectedGraph.from_edges(
            self.universe, [(self.cycle[i], self.cycle[(i + 1) % n]) for i in range(n)]
        )

    def clamped_relations(self) -> list[PosRelation]:
        return [self.clamped if r.scope == self.clamped.scope else r for r in self.relations]

    def triangulated_scheme(self) -> tuple[LocalScheme, list[PosRelation]]:
        """The scheme plus fan triangles around ``cycle[1]``, with all-possible initial relations."""
        c = self.cycle
        n = len(c)
        order = [c[(1 + k) % n] for k in range(n)]
        hub = order[0]
        extra = [tuple(sorted((hub, order[k], order[k + 1]))) for k in range(1, n - 1)]
        scheme = LocalScheme(self.universe, self.scheme.scopes + tuple(extra))
        cards = self.universe.cardinalities
        rels = self.clamped_relations() + [
            PosRelation(s, [cards[v] for v in s], np.ones([cards[v] for v in s], dtype=bool)) for s in extra
        ]
        return scheme, rels


def build_example1_instance(cycle_length: int, n_states: int = 3) -> Example1Instance:
    """The four-variable counterexample, or its extension to longer cycles.

    For length 4 the variables are ``A, B, C, D`` around the cycle
    ``A-B-D-C``: A and C, B and D must agree, and A=B is the new finding.
    Longer cycles force every further intermediate variable to agree with
    its neighbour.
    """
    n = cycle_length
    if n < 4:
        raise ContractViolation("the counterexample needs a cycle of length at least 4")
    if n_states < 2:
        raise ContractViolation("need at least two states per variable")
    if n == 4:
        universe = Universe.from_cardinalities([n_states] * 4, ["A", "B", "C", "D"])
        cycle = (0, 1, 3, 2)
    else:
        universe = Universe.from_cardinalities([n_states] * n, [f"X{i}" for i in range(n)])
        cycle = tuple(range(n))
    m = n // 2
    free = {frozenset((cycle[0], cycle[1])), frozenset((cycle[m], cycle[(m + 1) % n]))}
    scopes = sorted(tuple(sorted((cycle[i], cycle[(i + 1) % n]))) for i in range(n))
    cards = (n_states, n_states)

    def anything(i, j):
        return i < 2 and j < 2

    def equal(i, j):
        return i == j and i < 2

    relations = tuple(
        PosRelation.from_predicate(s, cards, anything if frozenset(s) in free else equal) for s in scopes
    )
    first = tuple(sorted((cycle[0], cycle[1])))
    clamped = PosRelation.from_predicate(first, cards, equal)
    query = tuple(sorted((cycle[m], cycle[(m + 1) % n])))
    return Example1Instance(universe, cycle, LocalScheme(universe, tuple(scopes)), relations, clamped, query)


def junction_tree_pos(instance: Example1Instance) -> PosRelation:
    """Possibility relation on the query edge after junction-tree propagation of the clamped instance."""
    tri = triangulate_heuristic(instance.graph)
    jg = build_junction_graph(cliques(tri.graph), instance.universe)
    tree = kruskal_min_cost_tree(jg)
    state = propagate(assign_factors([r.as_potential() for r in instance.clamped_relations()], tree))
    home = next(i for i, c in enumerate(tree.cliques) if set(instance.query) <= set(c.vars))
    return pos_of(marginalize(state.clique_potentials[home], instance.query))
