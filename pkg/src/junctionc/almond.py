"""Almond trees: junction trees with explicit, shared separator nodes.

Links carrying the same separator are folded into one separator node, and a
separator contained in a larger one may hang off that larger separator
instead of a clique. Every link joins a separator node to a strict superset
(a clique or a bigger separator node).

Node numbering: cliques keep their ids ``0..C-1``; separator nodes follow,
ordered by decreasing size and then by variable ids.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping

from .errors import ContractViolation
from .graph_model import state_space_size
from .junction_core import Clique, JunctionTree, Separator, _DisjointSet, separator_multiset

__all__ = [
    "AlmondNode",
    "AlmondLink",
    "AlmondTree",
    "MarginalizationBudget",
    "contract",
    "build_almond_tree",
    "marginalization_budget",
]


@dataclass(frozen=True)
class AlmondNode:
    kind: str  # "clique" | "separator"
    vars: tuple[int, ...]
    cards: tuple[int, ...]
    multiplicity: int = 0

    @property
    def table_size(self) -> int:
        return state_space_size(self.cards)

    @property
    def is_separator(self) -> bool:
        return self.kind == "separator"


@dataclass(frozen=True)
class AlmondLink:
    sub: int  # separator node index
    sup: int  # strict superset: clique or separator node
    cost: int


@dataclass(frozen=True)
class AlmondTree:
    nodes: tuple[AlmondNode, ...]
    links: tuple[AlmondLink, ...]

    @property
    def n_cliques(self) -> int:
        return sum(1 for n in self.nodes if not n.is_separator)

    @property
    def cliques(self) -> tuple[AlmondNode, ...]:
        return self.nodes[: self.n_cliques]

    @property
    def separator_nodes(self) -> range:
        return range(self.n_cliques, len(self.nodes))

    @property
    def total_cost(self) -> int:
        return sum(l.cost for l in self.links)

    def neighbours(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in self.nodes]
        for l in self.links:
            nbrs[l.sub].append(l.sup)
            nbrs[l.sup].append(l.sub)
        return [sorted(n) for n in nbrs]

    def degree(self, node: int) -> int:
        return sum(1 for l in self.links if node in (l.sub, l.sup))

    def is_tree(self) -> bool:
        if len(self.links) != len(self.nodes) - 1:
            return False
        ds = _DisjointSet(len(self.nodes))
        return all(ds.union(l.sub, l.sup) for l in self.links)

    def has_running_intersection(self) -> bool:
        """Every variable's holder nodes form a connected subtree."""
        nbrs = self.neighbours()
        holders: dict[int, set[int]] = {}
        for i, node in enumerate(self.nodes):
            for v in node.vars:
                holders.setdefault(v, set()).add(i)
        for hs in holders.values():
            start = min(hs)
            seen = {start}
            stack = [start]
            while stack:
                u = stack.pop()
                for w in nbrs[u]:
                    if w in hs and w not in seen:
                        seen.add(w)
                        stack.append(w)
            if seen != hs:
                return False
        return True


AlmondCost = Callable[[AlmondNode, AlmondNode], int]


def sum_of_table_sizes(sub: AlmondNode, sup: AlmondNode) -> int:
    return sub.table_size + sup.table_size


def _clique_node(c: Clique) -> AlmondNode:
    return AlmondNode("clique", c.vars, c.cards)


def _separator_nodes(multiset: Mapping[Separator, int], card: dict[int, int]) -> list[AlmondNode]:
    seps = sorted(multiset, key=lambda s: (-s.weight, s.vars))
    return [AlmondNode("separator", s.vars, tuple(card[v] for v in s.vars), multiset[s]) for s in seps]


def contract(t: JunctionTree, cost: AlmondCost = sum_of_table_sizes) -> AlmondTree:
    """Fold the links of ``t`` that carry the same separator into one separator node.

    The ``n`` links labelled ``S`` split the tree into ``n + 1`` pieces; the
    new node for ``S`` is linked to one endpoint clique in each piece (the
    lowest id), so the result is again a tree.
    """
    card = {v: k for c in t.cliques for v, k in zip(c.vars, c.cards)}
    nodes = [_clique_node(c) for c in t.cliques]
    multiset = separator_multiset(t)
    sep_nodes = _separator_nodes(multiset, card)
    base = len(nodes)
    nodes.extend(sep_nodes)
    links = []
    for k, sn in enumerate(sep_nodes):
        idx = base + k
        labelled = [l for l in t.links if l.separator.vars == sn.vars]
        ds = _DisjointSet(len(t.cliques))
        for l in t.links:
            if l.separator.vars != sn.vars:
                ds.union(l.u, l.v)
        pick: dict[int, int] = {}
        for l in labelled:
            for end in (l.u, l.v):
                root = ds.find(end)
                pick[root] = min(pick.get(root, end), end)
        for end in sorted(pick.values()):
            links.append(AlmondLink(idx, end, cost(nodes[idx], nodes[end])))
    tree = AlmondTree(tuple(nodes), tuple(links))
    assert tree.is_tree(), "contraction broke the tree structure"
    return tree


def build_almond_tree(
    cliques: Iterable[Clique],
    separators: Mapping[Separator, int],
    cost: AlmondCost = sum_of_table_sizes,
) -> AlmondTree:
    """Minimal-cost Almond tree for a clique set and its separator multiset.

    Separators are handled by decreasing size. A separator of multiplicity
    ``n`` receives ``n + 1`` links to strict supersets, cheapest first,
    skipping any link that would close a cycle; on equal cost a clique is
    preferred over a separator node, then the lower node index.
    """
    cliques = tuple(cliques)
    if not cliques:
        raise ContractViolation("need at least one clique")
    separators = Counter(separators)
    card = {v: k for c in cliques for v, k in zip(c.vars, c.cards)}
    nodes = [_clique_node(c) for c in cliques] + _separator_nodes(separators, card)
    sets = [frozenset(n.vars) for n in nodes]
    ds = _DisjointSet(len(nodes))
    links = []
    for idx in range(len(cliques), len(nodes)):
        node = nodes[idx]
        s = sets[idx]
        candidates = [
            (cost(node, nodes[j]), nodes[j].is_separator, j)
            for j in range(len(nodes))
            if j != idx and s < sets[j]
        ]
        wanted = node.multiplicity + 1
        taken = 0
        for c, _, j in sorted(candidates):
            if taken == wanted:
                break
            if ds.union(idx, j):
                links.append(AlmondLink(idx, j, c))
                taken += 1
        assert taken == wanted, (
            f"separator {node.vars} needs {wanted} acyclic superset links, found {taken}; "
            "separator multiset does not match the cliques"
        )
    tree = AlmondTree(tuple(nodes), tuple(links))
    assert tree.is_tree(), "Almond construction did not produce a spanning tree"
    return tree


@dataclass(frozen=True)
class MarginalizationBudget:
    """Operation counts of one full two-pass propagation.

    ``marginalizations`` counts table projections; ``marginalization_work``
    sums the sizes of the tables projected; ``stored_tables`` counts the
    separator tables held between passes.
    """

    marginalizations: int
    stored_tables: int
    marginalization_work: int
    stored_per_separator: tuple[int, ...] = ()


def marginalization_budget(tree: AlmondTree | JunctionTree) -> MarginalizationBudget:
    if isinstance(tree, JunctionTree):
        # one projection per direction per link, one stored table per link
        work = sum(tree.cliques[l.u].table_size + tree.cliques[l.v].table_size for l in tree.links)
        return MarginalizationBudget(2 * len(tree.links), len(tree.links), work, tuple(1 for _ in tree.links))
    # only the superset-to-subset direction of a link projects
    work = sum(tree.nodes[l.sup].table_size for l in tree.links)
    per_sep = tuple(tree.degree(i) - 1 for i in tree.separator_nodes)
    return MarginalizationBudget(len(tree.links), sum(per_sep), work, per_sep)
