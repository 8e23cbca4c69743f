"""Potential tables and two-pass propagation.

Tables are numpy arrays whose axes follow the sorted scope, so the flat
(C-order) layout has the last variable varying fastest.

Junction trees propagate with absorption: a message marginalises the
sender onto the separator, stores the result there and multiplies the
ratio new/old into the receiver. Almond trees propagate without division:
a message is the product of the sender's table with everything it received
from its other neighbours, projected only when the receiver is smaller.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence, Union

import numpy as np

from .almond import AlmondTree
from .errors import (
    ContractViolation,
    ImpossibleEvidenceError,
    InconsistencyError,
    UnknownVariableError,
)
from .junction_core import JunctionTree

__all__ = [
    "Potential",
    "Evidence",
    "Schedule",
    "OpStats",
    "TreeState",
    "multiply",
    "marginalize",
    "divide",
    "make_schedule",
    "assign_factors",
    "propagate",
    "query_marginal",
]

Tree = Union[JunctionTree, AlmondTree]


class Potential:
    """Nonnegative table over the configurations of a sorted variable scope."""

    __slots__ = ("scope", "cards", "table")

    def __init__(self, scope: Sequence[int], cards: Sequence[int], table=None):
        scope = tuple(int(v) for v in scope)
        cards = tuple(int(c) for c in cards)
        if any(a >= b for a, b in zip(scope, scope[1:])):
            raise ContractViolation(f"scope {scope} must be strictly increasing")
        if len(cards) != len(scope):
            raise ContractViolation("one cardinality per scope variable required")
        if table is None:
            arr = np.ones(cards, dtype=float)
        else:
            arr = np.asarray(table, dtype=float)
            if arr.size != int(np.prod(cards, dtype=np.int64)):
                raise ContractViolation(
                    f"table has {arr.size} entries; scope {scope} needs {int(np.prod(cards))}"
                )
            arr = arr.reshape(cards)
            if not np.all(np.isfinite(arr)) or np.any(arr < 0):
                raise ContractViolation("potential entries must be finite and nonnegative")
        self.scope = scope
        self.cards = cards
        self.table = arr

    @classmethod
    def ones(cls, scope: Sequence[int], cards: Sequence[int]) -> Potential:
        return cls(scope, cards)

    @property
    def flat(self) -> np.ndarray:
        return self.table.reshape(-1)

    def total(self) -> float:
        return float(self.table.sum())

    def copy(self) -> Potential:
        return Potential(self.scope, self.cards, self.table.copy())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Potential):
            return NotImplemented
        return self.scope == other.scope and self.cards == other.cards and np.array_equal(self.table, other.table)

    __hash__ = None

    def __repr__(self) -> str:
        return f"Potential(scope={self.scope}, table={self.flat.tolist()})"


def _axes_of(sub: Sequence[int], scope: Sequence[int]) -> list[int]:
    pos = {v: i for i, v in enumerate(scope)}
    try:
        return [pos[v] for v in sub]
    except KeyError:
        raise ContractViolation(f"scope {tuple(sub)} is not contained in {tuple(scope)}") from None


def multiply(p: Potential, q: Potential) -> Potential:
    """Pointwise product, broadcasting ``q`` over the scope of ``p``."""
    axes = set(_axes_of(q.scope, p.scope))
    shape = [c if i in axes else 1 for i, c in enumerate(p.cards)]
    return Potential(p.scope, p.cards, p.table * q.table.reshape(shape))


def marginalize(p: Potential, target: Iterable[int]) -> Potential:
    """Sum out every variable of ``p`` not in ``target``."""
    target = tuple(sorted(set(target)))
    keep = set(_axes_of(target, p.scope))
    drop = tuple(i for i in range(len(p.scope)) if i not in keep)
    cards = tuple(p.cards[i] for i in sorted(keep))
    return Potential(target, cards, p.table.sum(axis=drop) if drop else p.table.copy())


def divide(num: Potential, den: Potential) -> Potential:
    """Pointwise quotient with ``0/0 = 0``; a positive value over zero is an error."""
    if num.scope != den.scope:
        raise ContractViolation(f"division needs equal scopes, got {num.scope} and {den.scope}")
    zero = den.table == 0
    bad = zero & (num.table > 0)
    if bad.any():
        config = tuple(int(i) for i in np.argwhere(bad)[0])
        flat = int(np.ravel_multi_index(config, num.cards)) if num.cards else 0
        raise InconsistencyError(
            f"positive mass divided by zero at configuration {flat} {dict(zip(num.scope, config))}",
            flat,
        )
    out = np.zeros_like(num.table)
    np.divide(num.table, den.table, out=out, where=~zero)
    return Potential(num.scope, num.cards, out)


@dataclass(frozen=True)
class Evidence:
    """Hard findings (variable -> state) and soft findings (variable -> likelihood vector)."""

    hard: Mapping[int, int] = field(default_factory=dict)
    soft: Mapping[int, Sequence[float]] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return bool(self.hard) or bool(self.soft)

    def likelihoods(self, cards: Mapping[int, int]) -> dict[int, np.ndarray]:
        out: dict[int, np.ndarray] = {}
        for var, state in self.hard.items():
            if var not in cards:
                raise UnknownVariableError(f"evidence on unknown variable {var}")
            if not 0 <= state < cards[var]:
                raise ContractViolation(f"state {state} out of range for variable {var}")
            vec = np.zeros(cards[var])
            vec[state] = 1.0
            out[var] = vec
        for var, vec in self.soft.items():
            if var not in cards:
                raise UnknownVariableError(f"evidence on unknown variable {var}")
            vec = np.asarray(vec, dtype=float)
            if vec.shape != (cards[var],) or np.any(vec < 0) or not vec.any():
                raise ContractViolation(f"soft finding on variable {var} must be a nonnegative, nonzero vector")
            out[var] = out[var] * vec if var in out else vec
        return out


@dataclass(frozen=True)
class Schedule:
    """Directed messages, collect phase toward ``root`` first, then distribution."""

    root: int
    messages: tuple[tuple[int, int], ...]


def make_schedule(neighbours: Sequence[Sequence[int]], root: int) -> Schedule:
    parent = {root: None}
    preorder = []
    stack = [root]
    while stack:
        u = stack.pop()
        preorder.append(u)
        for w in sorted(neighbours[u], reverse=True):
            if w not in parent:
                parent[w] = u
                stack.append(w)
    if len(preorder) != len(neighbours):
        raise ContractViolation("tree is not connected")
    collect = [(u, parent[u]) for u in reversed(preorder) if parent[u] is not None]
    distribute = [(parent[u], u) for u in preorder if parent[u] is not None]
    return Schedule(root, tuple(collect + distribute))


@dataclass
class OpStats:
    marginalizations: int = 0
    marginalization_work: int = 0
    multiplications: int = 0
    divisions: int = 0
    stored_tables: dict[int, int] = field(default_factory=dict)

    @property
    def total_stored(self) -> int:
        return sum(self.stored_tables.values())


@dataclass
class TreeState:
    """A tree with potentials attached.

    ``node_potentials`` holds one table per clique (junction tree) or per
    node (Almond tree, separator nodes included). ``separator_potentials``
    holds one table per link of a junction tree and is empty for Almond
    trees. ``base`` keeps the pre-propagation potentials of an Almond tree.
    """

    tree: Tree
    node_potentials: list[Potential]
    separator_potentials: list[Potential]
    calibrated: bool = False
    stats: OpStats | None = None
    base: list[Potential] | None = None

    @property
    def clique_potentials(self) -> list[Potential]:
        if isinstance(self.tree, AlmondTree):
            return self.node_potentials[: self.tree.n_cliques]
        return self.node_potentials

    def cardinalities(self) -> dict[int, int]:
        nodes = self.tree.nodes if isinstance(self.tree, AlmondTree) else self.tree.cliques
        return {v: k for n in nodes for v, k in zip(n.vars, n.cards)}

    def copy(self) -> TreeState:
        return replace(
            self,
            node_potentials=[p.copy() for p in self.node_potentials],
            separator_potentials=[p.copy() for p in self.separator_potentials],
            base=None if self.base is None else [p.copy() for p in self.base],
        )


def _clique_nodes(tree: Tree):
    return tree.cliques


def assign_factors(factors: Iterable[Potential], tree: Tree) -> TreeState:
    """Multiply each factor into the lowest-id clique containing its scope."""
    cliques = _clique_nodes(tree)
    pots = [Potential.ones(c.vars, c.cards) for c in cliques]
    sets = [frozenset(c.vars) for c in cliques]
    for f in factors:
        scope = frozenset(f.scope)
        home = next((i for i, s in enumerate(sets) if scope <= s), None)
        if home is None:
            raise ContractViolation(f"factor over {f.scope} fits no clique; compilation is inconsistent")
        pots[home] = multiply(pots[home], f)
    if isinstance(tree, AlmondTree):
        pots += [Potential.ones(tree.nodes[i].vars, tree.nodes[i].cards) for i in tree.separator_nodes]
        return TreeState(tree, pots, [], base=[p.copy() for p in pots])
    seps = [Potential.ones(l.separator.vars, [tree.cliques[l.u].cardinality(v) for v in l.separator.vars])
            for l in tree.links]
    return TreeState(tree, pots, seps)


def _root(tree: Tree) -> int:
    cliques = _clique_nodes(tree)
    return max(range(len(cliques)), key=lambda i: (cliques[i].table_size, -i))


def _enter_evidence(pots: list[Potential], cliques, evidence: Evidence, cards: dict[int, int]) -> None:
    for var, vec in sorted(evidence.likelihoods(cards).items()):
        home = next(i for i, c in enumerate(cliques) if var in c.vars)
        pots[home] = multiply(pots[home], Potential((var,), (cards[var],), vec))


def propagate(state: TreeState, evidence: Evidence | Mapping[int, int] | None = None) -> TreeState:
    """Calibrate ``state`` by one collect and one distribute pass.

    Returns a new state; the input is left untouched. Afterwards every
    clique (and separator) table is the non-normalised marginal of the
    product of all factors and findings.
    """
    if evidence is None:
        evidence = Evidence()
    elif not isinstance(evidence, Evidence):
        evidence = Evidence(hard=dict(evidence))
    if isinstance(state.tree, AlmondTree):
        return _propagate_almond(state, evidence)
    return _propagate_junction(state, evidence)


def _propagate_junction(state: TreeState, evidence: Evidence) -> TreeState:
    tree: JunctionTree = state.tree
    out = state.copy()
    stats = OpStats()
    cards = state.cardinalities()
    _enter_evidence(out.node_potentials, tree.cliques, evidence, cards)
    link_index = {l.pair: k for k, l in enumerate(tree.links)}
    schedule = make_schedule(tree.neighbours(), _root(tree))
    pots, seps = out.node_potentials, out.separator_potentials
    for src, dst in schedule.messages:
        k = link_index[(min(src, dst), max(src, dst))]
        new = marginalize(pots[src], seps[k].scope)
        stats.marginalizations += 1
        stats.marginalization_work += pots[src].table.size
        ratio = divide(new, seps[k])
        stats.divisions += 1
        pots[dst] = multiply(pots[dst], ratio)
        stats.multiplications += 1
        seps[k] = new
    stats.stored_tables = {k: 1 for k in range(len(seps))}
    if pots[schedule.root].total() <= 0:
        raise ImpossibleEvidenceError("impossible evidence: the joint potential is zero everywhere")
    out.calibrated = True
    out.stats = stats
    return out


def _propagate_almond(state: TreeState, evidence: Evidence) -> TreeState:
    tree: AlmondTree = state.tree
    stats = OpStats()
    cards = state.cardinalities()
    base = [p.copy() for p in (state.base if state.base is not None else state.node_potentials)]
    # findings go into cliques only
    clique_pots = base[: tree.n_cliques]
    _enter_evidence(clique_pots, tree.cliques, evidence, cards)
    base[: tree.n_cliques] = clique_pots
    nbrs = tree.neighbours()
    schedule = make_schedule(nbrs, _root(tree))
    inbox: dict[int, dict[int, Potential]] = {i: {} for i in range(len(tree.nodes))}
    n_collect = len(schedule.messages) // 2
    retained = {i: 0 for i in tree.separator_nodes}
    for step, (src, dst) in enumerate(schedule.messages):
        table = base[src]
        for w, m in sorted(inbox[src].items()):
            if w != dst:
                table = multiply(table, m)
                stats.multiplications += 1
        if len(tree.nodes[dst].vars) < len(tree.nodes[src].vars):
            stats.marginalizations += 1
            stats.marginalization_work += table.table.size
            table = marginalize(table, tree.nodes[dst].vars)
        inbox[dst][src] = table
        # the root is a clique, so a separator node keeps what its children
        # sent while collecting; its parent's message is used on arrival only
        if step < n_collect and dst in retained:
            retained[dst] += 1
    stats.stored_tables = retained
    marginals = []
    for i in range(len(tree.nodes)):
        table = base[i]
        for _, m in sorted(inbox[i].items()):
            table = multiply(table, m)
        marginals.append(table)
    if marginals[schedule.root].total() <= 0:
        raise ImpossibleEvidenceError("impossible evidence: the joint potential is zero everywhere")
    return TreeState(tree, marginals, [], calibrated=True, stats=stats,
                     base=[p.copy() for p in (state.base if state.base is not None else state.node_potentials)])


def query_marginal(state: TreeState, var: int, clique: int | None = None) -> np.ndarray:
    """Normalised marginal of ``var`` read off a calibrated tree."""
    if not state.calibrated:
        raise ContractViolation("query_marginal needs a calibrated tree; call propagate first")
    cliques = _clique_nodes(state.tree)
    holders = [i for i, c in enumerate(cliques) if var in c.vars]
    if not holders:
        raise UnknownVariableError(f"variable {var} is not in any clique")
    if clique is None:
        clique = holders[0]
    elif clique not in holders:
        raise ContractViolation(f"clique {clique} does not contain variable {var}")
    m = marginalize(state.clique_potentials[clique], (var,)).table
    total = m.sum()
    if total <= 0:
        raise ImpossibleEvidenceError("impossible evidence: the joint potential is zero everywhere")
    return m / total
