"""Variables, graphs, moralization, chordality and triangulation.

Graphs are immutable. Node ids are the dense variable ids of a
:class:`Universe`, so every graph knows the cardinalities needed to price
cliques by their state-space size.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from typing import Iterable, Sequence

from .errors import (
    BoundExceededError,
    ContractViolation,
    CycleError,
    DisconnectedGraphError,
    ModelTooLargeError,
    NotChordalError,
)

INT64_MAX = 2**63 - 1

__all__ = [
    "Variable",
    "Universe",
    "UndirectedGraph",
    "Dag",
    "EliminationOrder",
    "TriangulationResult",
    "ChordalityVerdict",
    "state_space_size",
    "moralize",
    "is_chordal",
    "eliminate",
    "maximal_sets",
    "triangulate_heuristic",
    "triangulate_optimal",
    "cliques",
]


def state_space_size(cardinalities: Iterable[int]) -> int:
    """Product of cardinalities, refusing anything beyond signed 64-bit range."""
    size = 1
    for c in cardinalities:
        size *= c
        if size > INT64_MAX:
            raise ModelTooLargeError("model too large: state space exceeds 2**63 - 1 configurations")
    return size


@dataclass(frozen=True)
class Variable:
    id: int
    name: str
    cardinality: int

    def __post_init__(self):
        if self.cardinality < 1:
            raise ContractViolation(f"variable {self.name!r} has cardinality {self.cardinality} < 1")


@dataclass(frozen=True)
class Universe:
    variables: tuple[Variable, ...]

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        names = set()
        for i, v in enumerate(self.variables):
            if v.id != i:
                raise ContractViolation(f"variable ids must be contiguous from 0; got {v.id} at position {i}")
            if v.name in names:
                raise ContractViolation(f"duplicate variable name {v.name!r}")
            names.add(v.name)

    @classmethod
    def from_cardinalities(cls, cardinalities: Sequence[int], names: Sequence[str] | None = None) -> Universe:
        if names is None:
            names = [_default_name(i) for i in range(len(cardinalities))]
        if len(names) != len(cardinalities):
            raise ContractViolation("names and cardinalities differ in length")
        return cls(tuple(Variable(i, str(n), int(c)) for i, (n, c) in enumerate(zip(names, cardinalities))))

    def __len__(self) -> int:
        return len(self.variables)

    def __getitem__(self, i: int) -> Variable:
        return self.variables[i]

    def __iter__(self):
        return iter(self.variables)

    @property
    def cardinalities(self) -> tuple[int, ...]:
        return tuple(v.cardinality for v in self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    def index(self, name: str) -> int:
        for v in self.variables:
            if v.name == name:
                return v.id
        raise KeyError(name)

    def size(self, ids: Iterable[int] | None = None) -> int:
        """State-space size of a variable subset (the whole universe by default)."""
        if ids is None:
            return state_space_size(self.cardinalities)
        return state_space_size(self.variables[i].cardinality for i in ids)


def _default_name(i: int) -> str:
    # A..Z, then V26, V27, ...
    return chr(ord("A") + i) if i < 26 else f"V{i}"


@dataclass(frozen=True)
class UndirectedGraph:
    universe: Universe
    adjacency: tuple[frozenset[int], ...]

    def __post_init__(self):
        adj = tuple(frozenset(a) for a in self.adjacency)
        object.__setattr__(self, "adjacency", adj)
        if len(adj) != len(self.universe):
            raise ContractViolation("adjacency length differs from universe size")
        for u, nbrs in enumerate(adj):
            if u in nbrs:
                raise ContractViolation(f"self-loop at node {u}")
            for v in nbrs:
                if not 0 <= v < len(adj) or u not in adj[v]:
                    raise ContractViolation(f"adjacency not symmetric at ({u}, {v})")

    @classmethod
    def from_edges(cls, universe: Universe, edges: Iterable[tuple[int, int]]) -> UndirectedGraph:
        adj = [set() for _ in range(len(universe))]
        for u, v in edges:
            if u == v:
                raise ContractViolation(f"self-loop at node {u}")
            adj[u].add(v)
            adj[v].add(u)
        return cls(universe, tuple(frozenset(a) for a in adj))

    @classmethod
    def complete_on(cls, universe: Universe, scopes: Iterable[Iterable[int]]) -> UndirectedGraph:
        """Graph linking every pair of variables that share a scope."""
        return cls.from_edges(universe, (e for s in scopes for e in combinations(sorted(s), 2)))

    def __len__(self) -> int:
        return len(self.adjacency)

    @property
    def nodes(self) -> range:
        return range(len(self.adjacency))

    def neighbors(self, u: int) -> frozenset[int]:
        return self.adjacency[u]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adjacency[u]

    def edges(self) -> list[tuple[int, int]]:
        return sorted((u, v) for u, nbrs in enumerate(self.adjacency) for v in nbrs if u < v)

    def with_edges(self, edges: Iterable[tuple[int, int]]) -> UndirectedGraph:
        return UndirectedGraph.from_edges(self.universe, [*self.edges(), *edges])

    def induced_edges(self, nodes: Iterable[int]) -> list[tuple[int, int]]:
        keep = set(nodes)
        return [(u, v) for u, v in self.edges() if u in keep and v in keep]

    def components(self) -> list[tuple[int, ...]]:
        seen: set[int] = set()
        comps = []
        for s in self.nodes:
            if s in seen:
                continue
            comp = []
            queue = deque([s])
            seen.add(s)
            while queue:
                u = queue.popleft()
                comp.append(u)
                for v in self.adjacency[u]:
                    if v not in seen:
                        seen.add(v)
                        queue.append(v)
            comps.append(tuple(sorted(comp)))
        return comps

    def is_connected(self) -> bool:
        return len(self) <= 1 or len(self.components()) == 1


@dataclass(frozen=True)
class Dag:
    universe: Universe
    parents: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        parents = tuple(tuple(sorted(set(p))) for p in self.parents)
        object.__setattr__(self, "parents", parents)
        if len(parents) != len(self.universe):
            raise ContractViolation("parent lists differ in length from universe")
        cycle = _find_directed_cycle(parents)
        if cycle:
            names = " -> ".join(self.universe[i].name for i in cycle)
            raise CycleError(f"cycle detected in DAG: {names}", cycle)

    @classmethod
    def from_edges(cls, universe: Universe, edges: Iterable[tuple[int, int]]) -> Dag:
        parents = [set() for _ in range(len(universe))]
        for parent, child in edges:
            parents[child].add(parent)
        return cls(universe, tuple(tuple(p) for p in parents))

    def edges(self) -> list[tuple[int, int]]:
        return sorted((p, c) for c, ps in enumerate(self.parents) for p in ps)


def _find_directed_cycle(parents: Sequence[Sequence[int]]) -> list[int]:
    # iterative DFS over parent links; returns a cycle (closed by repeating its start) or []
    WHITE, GREY, BLACK = 0, 1, 2
    colour = [WHITE] * len(parents)
    for start in range(len(parents)):
        if colour[start] != WHITE:
            continue
        stack = [(start, iter(parents[start]))]
        path = [start]
        colour[start] = GREY
        while stack:
            node, it = stack[-1]
            nxt = next(it, None)
            if nxt is None:
                colour[node] = BLACK
                stack.pop()
                path.pop()
            elif colour[nxt] == GREY:
                cyc = path[path.index(nxt):] + [nxt]
                return cyc[::-1]
            elif colour[nxt] == WHITE:
                colour[nxt] = GREY
                stack.append((nxt, iter(parents[nxt])))
                path.append(nxt)
    return []


@dataclass(frozen=True)
class EliminationOrder:
    order: tuple[int, ...]

    def __post_init__(self):
        order = tuple(int(v) for v in self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(len(order))):
            raise ContractViolation(f"elimination order {order} is not a permutation")

    def __iter__(self):
        return iter(self.order)

    def __len__(self) -> int:
        return len(self.order)


@dataclass(frozen=True)
class TriangulationResult:
    graph: UndirectedGraph
    fill_ins: frozenset[tuple[int, int]]
    order: EliminationOrder
    total_clique_weight: int
    cliques: tuple[tuple[int, ...], ...] = field(default=())

    @property
    def fill_count(self) -> int:
        return len(self.fill_ins)


@dataclass(frozen=True)
class ChordalityVerdict:
    """Outcome of :func:`is_chordal`; falsy when a chordless cycle was found."""

    chordal: bool
    witness: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.chordal


def moralize(dag: Dag) -> UndirectedGraph:
    """Skeleton of ``dag`` plus an edge between every pair of co-parents."""
    edges = set()
    for child, ps in enumerate(dag.parents):
        for p in ps:
            edges.add((min(p, child), max(p, child)))
        edges.update(combinations(ps, 2))
    return UndirectedGraph.from_edges(dag.universe, edges)


def _mcs_peo(g: UndirectedGraph) -> list[int]:
    """Reverse maximum-cardinality-search order; a perfect elimination order iff g is chordal."""
    n = len(g)
    weight = [0] * n
    numbered = [False] * n
    visit = []
    for _ in range(n):
        # lowest id among the heaviest unnumbered nodes
        best = max((u for u in range(n) if not numbered[u]), key=lambda u: (weight[u], -u))
        numbered[best] = True
        visit.append(best)
        for v in g.adjacency[best]:
            if not numbered[v]:
                weight[v] += 1
    return visit[::-1]


def _is_perfect_elimination_order(g: UndirectedGraph, order: Sequence[int]) -> bool:
    pos = {v: i for i, v in enumerate(order)}
    for v in order:
        later = [u for u in g.adjacency[v] if pos[u] > pos[v]]
        if not later:
            continue
        first = min(later, key=pos.__getitem__)
        rest = set(later) - {first}
        if not rest <= g.adjacency[first]:
            return False
    return True


def _chordless_cycle(g: UndirectedGraph) -> tuple[int, ...]:
    # A chordless cycle of length >= 4 through v exists iff two non-adjacent
    # neighbours a, b of v are joined by a path avoiding the rest of N[v];
    # a shortest such path is induced, so the cycle is chordless.
    for v in g.nodes:
        nbrs = sorted(g.adjacency[v])
        for a, b in combinations(nbrs, 2):
            if g.has_edge(a, b):
                continue
            blocked = (g.adjacency[v] | {v}) - {a, b}
            path = _shortest_path(g, a, b, blocked)
            if path is not None:
                return (v, *path)
    return ()


def _shortest_path(g: UndirectedGraph, src: int, dst: int, blocked: set[int]) -> list[int] | None:
    prev = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            path = []
            while u is not None:
                path.append(u)
                u = prev[u]
            return path[::-1]
        for w in sorted(g.adjacency[u]):
            if w not in prev and w not in blocked:
                prev[w] = u
                queue.append(w)
    return None


def is_chordal(g: UndirectedGraph) -> ChordalityVerdict:
    """Decide chordality; on failure the verdict carries a chordless cycle of length >= 4."""
    if _is_perfect_elimination_order(g, _mcs_peo(g)):
        return ChordalityVerdict(True)
    witness = _chordless_cycle(g)
    assert len(witness) >= 4, "MCS rejected the graph but no chordless cycle was found"
    return ChordalityVerdict(False, witness)


def maximal_sets(sets: Iterable[Iterable[int]]) -> tuple[tuple[int, ...], ...]:
    """Drop duplicates and sets strictly contained in another; result sorted."""
    uniq = {frozenset(s) for s in sets}
    keep = [s for s in uniq if not any(s < t for t in uniq)]
    return tuple(sorted(tuple(sorted(s)) for s in keep))


def eliminate(g: UndirectedGraph, order: EliminationOrder | Sequence[int]) -> TriangulationResult:
    """Eliminate variables of ``g`` in ``order`` and collect the fill-ins it produces."""
    if not isinstance(order, EliminationOrder):
        order = EliminationOrder(tuple(order))
    if len(order) != len(g):
        raise ContractViolation("elimination order does not cover the graph")
    adj = [set(a) for a in g.adjacency]
    fill = set()
    elim_cliques = []
    for v in order:
        nbrs = sorted(adj[v])
        for a, b in combinations(nbrs, 2):
            if b not in adj[a]:
                adj[a].add(b)
                adj[b].add(a)
                fill.add((a, b))
        elim_cliques.append((v, *nbrs))
        for u in nbrs:
            adj[u].discard(v)
    tri = g.with_edges(fill)
    maximal = maximal_sets(elim_cliques)
    weight = sum(g.universe.size(c) for c in maximal)
    return TriangulationResult(tri, frozenset(fill), order, weight, maximal)


def _require_connected(g: UndirectedGraph) -> None:
    if not g.is_connected():
        comps = g.components()
        listing = "; ".join("{" + ", ".join(g.universe[i].name for i in c) + "}" for c in comps)
        raise DisconnectedGraphError(
            f"graph has {len(comps)} connected components ({listing}); compile them separately", comps
        )


def triangulate_heuristic(g: UndirectedGraph, objective: str = "fill") -> TriangulationResult:
    """Greedy one-step look-ahead triangulation.

    With ``objective="fill"`` each step eliminates the variable creating the
    fewest fill-ins, ties going to the smallest resulting clique state
    space and then the lowest id. ``objective="weight"`` swaps the first two
    criteria.
    """
    if objective not in ("fill", "weight"):
        raise ContractViolation(f"unknown objective {objective!r}; expected 'fill' or 'weight'")
    _require_connected(g)
    adj = [set(a) for a in g.adjacency]
    remaining = set(g.nodes)
    order = []

    def score(v):
        nbrs = adj[v]
        fill = sum(1 for a, b in combinations(nbrs, 2) if b not in adj[a])
        weight = g.universe.size(nbrs | {v})
        return (fill, weight, v) if objective == "fill" else (weight, fill, v)

    while remaining:
        v = min(remaining, key=score)
        nbrs = adj[v]
        for a, b in combinations(nbrs, 2):
            adj[a].add(b)
            adj[b].add(a)
        for u in nbrs:
            adj[u].discard(v)
        remaining.discard(v)
        order.append(v)
    return eliminate(g, order)


def triangulate_optimal(g: UndirectedGraph, objective: str = "fill", max_vars: int = 10) -> TriangulationResult:
    """Exhaustively optimal triangulation over all elimination orders.

    ``objective`` is ``"fill"`` (number of fill-ins) or ``"weight"`` (sum of
    maximal-clique state-space sizes). Among optimal orders the
    lexicographically smallest one is returned.
    """
    if objective not in ("fill", "weight"):
        raise ContractViolation(f"unknown objective {objective!r}; expected 'fill' or 'weight'")
    n = len(g)
    if n > max_vars:
        raise BoundExceededError(
            f"exhaustive triangulation limited to {max_vars} variables (got {n}); use triangulate_heuristic"
        )
    _require_connected(g)
    if objective == "fill":
        order = _min_fill_order(g)
    else:
        order = _min_weight_order(g)
    return eliminate(g, order)


def _neighbour_masks(g: UndirectedGraph) -> list[int]:
    return [sum(1 << v for v in a) for a in g.adjacency]


def _reach(nb: Sequence[int], s: int, v: int) -> int:
    """Bitmask of nodes outside ``s`` reachable from ``v`` along paths through ``s``."""
    seen = 1 << v
    frontier = [v]
    out = 0
    while frontier:
        u = frontier.pop()
        m = nb[u] & ~seen
        seen |= m
        out |= m & ~s
        inner = m & s
        while inner:
            low = inner & -inner
            frontier.append(low.bit_length() - 1)
            inner ^= low
    return out


def _min_fill_order(g: UndirectedGraph) -> list[int]:
    # The graph left after eliminating a set S does not depend on the order
    # inside S: x, y are adjacent iff linked by a path whose interior lies in S.
    # Fill produced by eliminating v next therefore depends on (S, v) only,
    # which makes minimum total fill a dynamic programme over subsets.
    n = len(g)
    nb = _neighbour_masks(g)
    full = (1 << n) - 1

    @lru_cache(maxsize=None)
    def reach(s: int, v: int) -> int:
        return _reach(nb, s, v)

    def step_fill(s: int, v: int) -> int:
        q = reach(s, v) & ~(1 << v)
        members = [i for i in range(n) if q >> i & 1]
        return sum(1 for a, b in combinations(members, 2) if not reach(s, a) >> b & 1)

    @lru_cache(maxsize=None)
    def best(s: int) -> int:
        if s == full:
            return 0
        return min(step_fill(s, v) + best(s | 1 << v) for v in range(n) if not s >> v & 1)

    order = []
    s = 0
    while s != full:
        target = best(s)
        for v in range(n):
            if not s >> v & 1 and step_fill(s, v) + best(s | 1 << v) == target:
                order.append(v)
                s |= 1 << v
                break
    return order


def _min_weight_order(g: UndirectedGraph) -> list[int]:
    # Total maximal-clique weight does not decompose over steps, so search
    # orders depth-first in lexicographic order and prune revisits: the future
    # depends only on the eliminated set, and the outcome on that set plus the
    # fill-ins already produced.
    n = len(g)
    best_weight = None
    best_order: list[int] = []
    seen: set[tuple[frozenset[int], frozenset[tuple[int, int]]]] = set()

    def dfs(adj, eliminated, fill, elim_cliques, order):
        nonlocal best_weight, best_order
        if len(order) == n:
            weight = sum(g.universe.size(c) for c in maximal_sets(elim_cliques))
            if best_weight is None or weight < best_weight:
                best_weight, best_order = weight, list(order)
            return
        key = (eliminated, fill)
        if key in seen:
            return
        seen.add(key)
        for v in range(n):
            if v in eliminated:
                continue
            nbrs = sorted(adj[v])
            new_fill = [(a, b) for a, b in combinations(nbrs, 2) if b not in adj[a]]
            nxt = [set(a) for a in adj]
            for a, b in new_fill:
                nxt[a].add(b)
                nxt[b].add(a)
            for u in nbrs:
                nxt[u].discard(v)
            nxt[v] = set()
            dfs(nxt, eliminated | {v}, fill | frozenset(new_fill), elim_cliques + [(v, *nbrs)], order + [v])

    dfs([set(a) for a in g.adjacency], frozenset(), frozenset(), [], [])
    return best_order


def cliques(g: UndirectedGraph) -> tuple[tuple[int, ...], ...]:
    """Maximal cliques of a chordal graph, as sorted variable-id tuples."""
    verdict = is_chordal(g)
    if not verdict:
        names = "-".join(g.universe[i].name for i in verdict.witness)
        raise NotChordalError(f"graph is not chordal; chordless cycle {names}", verdict.witness)
    return eliminate(g, _mcs_peo(g)).cliques
