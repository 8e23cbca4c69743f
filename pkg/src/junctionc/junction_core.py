"""Junction graphs and optimal junction trees.

A junction tree is a maximal-weight spanning tree of the junction graph.
Among those, the trees returned here also minimise the total link cost,
where a link between cliques ``U`` and ``V`` costs ``|U| + |V|`` table
entries by default (the work of marginalising both ends once).
"""

from __future__ import annotations

from collections import Counter, deque
from dataclasses import dataclass
from itertools import combinations
from typing import Callable, Iterable, Sequence

from .errors import ContractViolation, DisconnectedGraphError, NestedCliquesError
from .graph_model import Universe, state_space_size

__all__ = [
    "Clique",
    "Separator",
    "Link",
    "JunctionGraph",
    "JunctionTree",
    "JunctionVerdict",
    "make_cliques",
    "sum_of_table_sizes",
    "build_junction_graph",
    "prim_max_spanning_tree",
    "kruskal_min_cost_tree",
    "verify_junction_property",
    "separator_multiset",
]


@dataclass(frozen=True)
class Clique:
    id: int
    vars: tuple[int, ...]
    cards: tuple[int, ...]

    def __post_init__(self):
        if not self.vars:
            raise ContractViolation("clique must contain at least one variable")
        if len(self.cards) != len(self.vars):
            raise ContractViolation("one cardinality per clique variable required")

    @property
    def table_size(self) -> int:
        return state_space_size(self.cards)

    def cardinality(self, var: int) -> int:
        return self.cards[self.vars.index(var)]


@dataclass(frozen=True, order=True)
class Separator:
    vars: tuple[int, ...]
    table_size: int

    @property
    def weight(self) -> int:
        return len(self.vars)


@dataclass(frozen=True)
class Link:
    u: int
    v: int
    separator: Separator
    cost: int

    @property
    def weight(self) -> int:
        return self.separator.weight

    @property
    def pair(self) -> tuple[int, int]:
        return self.u, self.v


CostFunction = Callable[[Clique, Clique, Separator], int]


def sum_of_table_sizes(u: Clique, v: Clique, sep: Separator) -> int:
    return u.table_size + v.table_size


@dataclass(frozen=True)
class JunctionGraph:
    cliques: tuple[Clique, ...]
    links: tuple[Link, ...]

    def is_connected(self) -> bool:
        return len(_components(len(self.cliques), self.links)) <= 1


@dataclass(frozen=True)
class JunctionTree:
    cliques: tuple[Clique, ...]
    links: tuple[Link, ...]

    @property
    def total_weight(self) -> int:
        return sum(l.weight for l in self.links)

    @property
    def total_cost(self) -> int:
        return sum(l.cost for l in self.links)

    def neighbours(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in self.cliques]
        for l in self.links:
            nbrs[l.u].append(l.v)
            nbrs[l.v].append(l.u)
        return [sorted(n) for n in nbrs]

    def link_between(self, a: int, b: int) -> Link:
        key = (min(a, b), max(a, b))
        for l in self.links:
            if l.pair == key:
                return l
        raise KeyError(key)


def make_cliques(universe: Universe, var_sets: Iterable[Iterable[int]]) -> tuple[Clique, ...]:
    """Number variable sets as cliques, in the order given."""
    out = []
    for i, s in enumerate(var_sets):
        vs = tuple(sorted(s))
        out.append(Clique(i, vs, tuple(universe[v].cardinality for v in vs)))
    return tuple(out)


def build_junction_graph(
    cliques: Sequence[Clique], universe: Universe | None = None, cost: CostFunction = sum_of_table_sizes
) -> JunctionGraph:
    """Link every pair of intersecting cliques, labelled by their intersection.

    ``cliques`` may be :class:`Clique` objects or plain variable sets, in
    which case ``universe`` supplies the cardinalities.
    """
    if not cliques:
        raise ContractViolation("need at least one clique")
    if not isinstance(cliques[0], Clique):
        if universe is None:
            raise ContractViolation("plain variable sets need a universe for table sizes")
        cliques = make_cliques(universe, cliques)
    cliques = tuple(cliques)
    sets = [frozenset(c.vars) for c in cliques]
    card = {v: k for c in cliques for v, k in zip(c.vars, c.cards)}
    links = []
    for i, j in combinations(range(len(cliques)), 2):
        if sets[i] <= sets[j] or sets[j] <= sets[i]:
            raise NestedCliquesError(f"cliques {i} and {j} are nested; junction graph needs maximal cliques")
        common = sets[i] & sets[j]
        if not common:
            continue
        sep = Separator(tuple(sorted(common)), state_space_size(card[v] for v in common))
        links.append(Link(i, j, sep, cost(cliques[i], cliques[j], sep)))
    return JunctionGraph(cliques, tuple(links))


class _DisjointSet:
    def __init__(self, n: int):
        self.parent = list(range(n))

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            self.parent[x] = self.parent[self.parent[x]]
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        self.parent[max(ra, rb)] = min(ra, rb)
        return True


def _components(n: int, links: Iterable[Link]) -> set[int]:
    ds = _DisjointSet(n)
    for l in links:
        ds.union(l.u, l.v)
    return {ds.find(i) for i in range(n)}


def _require_connected(jg: JunctionGraph) -> None:
    n = len(jg.cliques)
    ds = _DisjointSet(n)
    for l in jg.links:
        ds.union(l.u, l.v)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(ds.find(i), []).append(i)
    if len(groups) > 1:
        raise DisconnectedGraphError(
            f"junction graph has {len(groups)} components; the underlying graph was not connected",
            list(groups.values()),
        )


def _link_key(l: Link) -> tuple:
    return -l.weight, l.cost, l.u, l.v


def kruskal_min_cost_tree(jg: JunctionGraph) -> JunctionTree:
    """Maximal-weight spanning tree of minimal cost.

    Links are taken by decreasing weight; among equal weights the cheapest
    acyclic link wins, remaining ties by lowest clique-id pair.
    """
    _require_connected(jg)
    ds = _DisjointSet(len(jg.cliques))
    chosen = [l for l in sorted(jg.links, key=_link_key) if ds.union(l.u, l.v)]
    return JunctionTree(jg.cliques, tuple(sorted(chosen, key=lambda l: l.pair)))


def prim_max_spanning_tree(jg: JunctionGraph, cost_tiebreak: bool = True, start: int = 0) -> JunctionTree:
    """Grow a maximal-weight spanning tree from clique ``start``.

    With ``cost_tiebreak`` the cheapest of the heaviest frontier links is
    taken, which also yields minimal total cost among maximal-weight trees.
    """
    _require_connected(jg)
    n = len(jg.cliques)
    incident: list[list[Link]] = [[] for _ in range(n)]
    for l in jg.links:
        incident[l.u].append(l)
        incident[l.v].append(l)
    inside = {start}
    chosen = []
    while len(inside) < n:
        frontier = [l for c in inside for l in incident[c] if (l.u in inside) != (l.v in inside)]
        if cost_tiebreak:
            best = min(frontier, key=_link_key)
        else:
            best = min(frontier, key=lambda l: (-l.weight, l.u, l.v))
        chosen.append(best)
        inside.add(best.v if best.u in inside else best.u)
    return JunctionTree(jg.cliques, tuple(sorted(chosen, key=lambda l: l.pair)))


@dataclass(frozen=True)
class JunctionVerdict:
    """Falsy when some clique on the path between ``pair`` misses their intersection."""

    ok: bool
    pair: tuple[int, int] | None = None
    offending: int | None = None

    def __bool__(self) -> bool:
        return self.ok


def _tree_path(nbrs: list[list[int]], a: int, b: int) -> list[int]:
    prev = {a: None}
    queue = deque([a])
    while queue:
        u = queue.popleft()
        if u == b:
            break
        for w in nbrs[u]:
            if w not in prev:
                prev[w] = u
                queue.append(w)
    path = []
    node = b
    while node is not None:
        path.append(node)
        node = prev[node]
    return path[::-1]


def verify_junction_property(t: JunctionTree) -> JunctionVerdict:
    """Check that every clique on every connecting path holds the endpoints' intersection.

    Equivalent to asking, per variable, that the cliques holding it form a
    connected subtree; that test is cheap, and a witness triple is extracted
    from the first variable whose cliques fall apart.
    """
    n = len(t.cliques)
    if len(t.links) != n - 1 or len(_components(n, t.links)) != 1:
        raise ContractViolation("verify_junction_property needs a spanning tree")
    holders: dict[int, list[int]] = {}
    for c in t.cliques:
        for v in c.vars:
            holders.setdefault(v, []).append(c.id)
    label_count: Counter[int] = Counter(v for l in t.links for v in l.separator.vars)
    # a k-node subset of a tree induces a connected subtree iff it spans k-1 tree links
    nbrs = t.neighbours()
    sets = [frozenset(c.vars) for c in t.cliques]
    for v in sorted(holders):
        hs = holders[v]
        if label_count[v] == len(hs) - 1:
            continue
        # two holders in different pieces; the path between them leaves the piece
        hset = set(hs)
        seen = {hs[0]}
        stack = [hs[0]]
        while stack:
            u = stack.pop()
            for w in nbrs[u]:
                if w in hset and w not in seen:
                    seen.add(w)
                    stack.append(w)
        other = min(h for h in hs if h not in seen)
        a = hs[0]
        common = sets[a] & sets[other]
        for w in _tree_path(nbrs, a, other)[1:-1]:
            if not common <= sets[w]:
                return JunctionVerdict(False, (a, other), w)
        raise AssertionError("per-variable connectivity failed but no offending path clique found")
    return JunctionVerdict(True)


def separator_multiset(t: JunctionTree) -> Counter[Separator]:
    """Link labels of ``t`` counted with multiplicity."""
    return Counter(l.separator for l in t.links)
