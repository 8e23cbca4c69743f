"""Randomised verification suites checked against brute-force oracles.

Each suite draws its own instances from a seeded generator, so a
(suite, seed, cases) triple always replays the same instances. A failing
suite returns the offending instance as a :class:`Model` for replay.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import oracle
from .almond import build_almond_tree, contract, marginalization_budget
from .graph_model import (
    Dag,
    UndirectedGraph,
    Universe,
    cliques,
    eliminate,
    is_chordal,
    triangulate_heuristic,
    triangulate_optimal,
)
from .junction_core import (
    build_junction_graph,
    kruskal_min_cost_tree,
    prim_max_spanning_tree,
    separator_multiset,
    verify_junction_property,
)
from .modelfile import Model, from_graph
from .pos_calculus import (
    build_example1_instance,
    check_hidden_triangulation,
    fixpoint_local_propagation,
    junction_tree_pos,
    pos_of,
)
from .propagation import Evidence, Potential, assign_factors, marginalize, propagate, query_marginal

__all__ = [
    "SuiteResult",
    "SUITES",
    "random_chordal_graph",
    "random_model",
    "random_evidence",
    "run_suite",
]

MARGINAL_RTOL = 1e-9
CALIBRATION_TOL = 1e-12
ALMOND_TOL = 1e-12


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: list[str] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)
    replay: Model | None = None

    @property
    def passed(self) -> bool:
        return not self.failures

    def fail(self, message: str, replay: Model | None = None) -> None:
        self.failures.append(message)
        if self.replay is None:
            self.replay = replay


def random_chordal_graph(rng: np.random.Generator, min_cliques: int = 3, max_cliques: int = 8) -> UndirectedGraph:
    """Connected chordal graph made by eliminating a random graph in a random order."""
    while True:
        n = int(rng.integers(4, 11))
        p = rng.uniform(0.15, 0.55)
        universe = Universe.from_cardinalities(rng.integers(2, 4, size=n).tolist())
        edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
        g = UndirectedGraph.from_edges(universe, edges)
        if not g.is_connected():
            continue
        tri = eliminate(g, rng.permutation(n).tolist())
        if min_cliques <= len(tri.cliques) <= max_cliques:
            return tri.graph


def _random_table(rng, cards, low=0.05):
    return rng.uniform(low, 1.0, size=int(np.prod(cards)))


def random_model(rng: np.random.Generator, max_vars: int = 12, kind: str | None = None) -> Model:
    """Random connected binary model: a Bayesian network, a Markov network, or a chordal one."""
    kind = kind or rng.choice(["dag", "markov", "chordal"])
    n = int(rng.integers(3, max_vars + 1))
    universe = Universe.from_cardinalities([2] * n)
    states = tuple(("s0", "s1") for _ in range(n))
    if kind == "dag":
        factors = []
        parents = []
        for child in range(n):
            k = 0 if child == 0 else int(rng.integers(1, min(child, 3) + 1))
            ps = sorted(rng.choice(child, size=k, replace=False).tolist()) if k else []
            parents.append(ps)
            scope = sorted(ps + [child])
            cards = [2] * len(scope)
            table = _random_table(rng, cards).reshape(cards)
            table = table / table.sum(axis=scope.index(child), keepdims=True)
            factors.append(Potential(scope, cards, table))
        dag = Dag(universe, tuple(tuple(p) for p in parents))
        return Model(universe, states, tuple(factors), dag)
    if kind == "chordal":
        while True:
            g = random_chordal_graph(rng, 1, max_vars)
            if len(g) <= max_vars:
                break
        universe = Universe.from_cardinalities([2] * len(g))
        states = tuple(("s0", "s1") for _ in range(len(g)))
        scopes = cliques(UndirectedGraph(universe, g.adjacency))
    else:
        while True:
            p = rng.uniform(0.2, 0.5)
            edges = [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p]
            g = UndirectedGraph.from_edges(universe, edges)
            if g.is_connected():
                break
        scopes = [tuple(e) for e in edges] + [(v,) for v in range(n) if rng.random() < 0.3]
    factors = tuple(Potential(s, [2] * len(s), _random_table(rng, [2] * len(s))) for s in scopes)
    return Model(universe, states, factors)


def random_evidence(rng: np.random.Generator, model: Model, max_findings: int = 3) -> Evidence:
    n = len(model.universe)
    k = int(rng.integers(0, min(max_findings, n) + 1))
    vars_ = rng.choice(n, size=k, replace=False).tolist()
    return Evidence({int(v): int(rng.integers(0, model.universe[v].cardinality)) for v in vars_})


def _evidence_factors(model: Model, evidence: Evidence) -> list[Potential]:
    cards = model.universe.cardinalities
    return [Potential((v,), (cards[v],), vec) for v, vec in sorted(evidence.likelihoods(dict(enumerate(cards))).items())]


def _corpus(seed: int, cases: int):
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        g = random_chordal_graph(rng)
        yield g, build_junction_graph(cliques(g), g.universe)


def _tree_key(links) -> frozenset:
    return frozenset(l.pair for l in links)


def suite_theorem1(seed: int, cases: int) -> SuiteResult:
    res = SuiteResult("theorem1", cases)
    for k, (g, jg) in enumerate(_corpus(seed, cases)):
        trees = oracle.enumerate_spanning_trees(jg)
        wmax = max(t.weight for t in trees)
        heaviest = {_tree_key(t.links) for t in trees if t.weight == wmax}
        junction = {_tree_key(t.links) for t in trees if verify_junction_property(t.as_junction_tree(jg))}
        literal = {_tree_key(t.links) for t in trees if t.is_junction_tree}
        if heaviest != junction or junction != literal:
            res.fail(
                f"case {k}: {len(heaviest)} maximal-weight trees, {len(junction)} junction trees "
                f"({len(literal)} by the literal check)",
                from_graph(g, [c.vars for c in jg.cliques]),
            )
    res.notes.append(f"{cases} chordal graphs with 3-8 cliques")
    return res


def suite_corollary1(seed: int, cases: int) -> SuiteResult:
    res = SuiteResult("corollary1", cases)
    for k, (g, jg) in enumerate(_corpus(seed, cases)):
        trees = oracle.enumerate_spanning_trees(jg)
        wmax = max(t.weight for t in trees)
        multisets = {frozenset(Counter(l.separator for l in t.links).items()) for t in trees if t.weight == wmax}
        if len(multisets) != 1:
            res.fail(f"case {k}: {len(multisets)} distinct separator multisets", from_graph(g, [c.vars for c in jg.cliques]))
    return res


def suite_theorem2(seed: int, cases: int) -> SuiteResult:
    res = SuiteResult("theorem2", cases)
    for k, (g, jg) in enumerate(_corpus(seed, cases)):
        trees = oracle.enumerate_spanning_trees(jg)
        wmax = max(t.weight for t in trees)
        cmin = min(t.cost for t in trees if t.weight == wmax)
        kr = kruskal_min_cost_tree(jg)
        pr = prim_max_spanning_tree(jg)
        for label, t in (("kruskal", kr), ("prim", pr)):
            if (t.total_weight, t.total_cost) != (wmax, cmin):
                res.fail(
                    f"case {k}: {label} gave (weight, cost) = ({t.total_weight}, {t.total_cost}), "
                    f"enumeration says ({wmax}, {cmin})",
                    from_graph(g, [c.vars for c in jg.cliques]),
                )
    return res


def _z_scaled_close(a: np.ndarray, b: np.ndarray, z: float, tol: float) -> bool:
    return bool(np.all(np.abs(a - b) <= tol * z))


def _compile(model: Model):
    tri = triangulate_heuristic(model.markov_graph())
    jg = build_junction_graph(cliques(tri.graph), model.universe)
    return jg, kruskal_min_cost_tree(jg)


def _model_corpus(seed: int, cases: int):
    rng = np.random.default_rng(seed)
    for _ in range(cases):
        model = random_model(rng)
        yield model, random_evidence(rng, model)


def _joint_marginal(joint, vars_) -> np.ndarray:
    """Brute-force marginal read off the full joint table, flattened last-fastest."""
    cards = joint.universe.cardinalities
    keep = set(vars_)
    drop = tuple(i for i in range(len(cards)) if i not in keep)
    return joint.table.reshape(cards).sum(axis=drop).ravel() if drop else joint.table.copy()


def suite_propagation(seed: int, cases: int) -> SuiteResult:
    res = SuiteResult("propagation", cases)
    for k, (model, ev) in enumerate(_model_corpus(seed, cases)):
        _, jt = _compile(model)
        state = propagate(assign_factors(model.factors, jt), ev)
        joint = oracle.joint_from_factors(model.universe, [*model.factors, *_evidence_factors(model, ev)])
        z = float(joint.table.sum())
        problems = []
        for c, pot in zip(jt.cliques, state.node_potentials):
            ref = _joint_marginal(joint, c.vars)
            if not np.allclose(pot.flat, ref, rtol=MARGINAL_RTOL, atol=0):
                problems.append(f"clique {c.vars} differs from the oracle")
        for l, pot in zip(jt.links, state.separator_potentials):
            ref = _joint_marginal(joint, l.separator.vars)
            if not np.allclose(pot.flat, ref, rtol=MARGINAL_RTOL, atol=0):
                problems.append(f"separator {l.separator.vars} differs from the oracle")
            for end in (l.u, l.v):
                proj = marginalize(state.node_potentials[end], l.separator.vars).flat
                if not _z_scaled_close(proj, pot.flat, z, CALIBRATION_TOL):
                    problems.append(f"link {l.pair} not calibrated")
        for v in range(len(model.universe)):
            ref = _joint_marginal(joint, (v,))
            ref = ref / ref.sum()
            answers = [query_marginal(state, v, i) for i, c in enumerate(jt.cliques) if v in c.vars]
            if not np.allclose(answers[0], ref, rtol=MARGINAL_RTOL, atol=0):
                problems.append(f"marginal of {v} differs from the oracle")
            if any(np.max(np.abs(a - answers[0])) > CALIBRATION_TOL for a in answers):
                problems.append(f"marginal of {v} depends on the clique queried")
        again = propagate(state)
        for a, b in zip(again.node_potentials + again.separator_potentials,
                        state.node_potentials + state.separator_potentials):
            if not _z_scaled_close(a.flat, b.flat, z, CALIBRATION_TOL):
                problems.append("a second propagation changed a table")
                break
        if problems:
            res.fail(f"case {k}: " + "; ".join(problems[:3]), model)
    return res


def suite_almond(seed: int, cases: int) -> SuiteResult:
    res = SuiteResult("almond", cases)
    strict = 0
    for k, (model, ev) in enumerate(_model_corpus(seed, cases)):
        _, jt = _compile(model)
        almond = build_almond_tree(jt.cliques, separator_multiset(jt))
        jstate = propagate(assign_factors(model.factors, jt), ev)
        astate = propagate(assign_factors(model.factors, almond), ev)
        cstate = propagate(assign_factors(model.factors, contract(jt)), ev)
        z = jstate.node_potentials[0].total()
        problems = []
        for i in range(len(jt.cliques)):
            for other, label in ((astate, "almond"), (cstate, "contracted")):
                if not _z_scaled_close(other.clique_potentials[i].flat, jstate.node_potentials[i].flat, z, ALMOND_TOL):
                    problems.append(f"{label} clique {i} table differs")
        for v in range(len(model.universe)):
            if np.max(np.abs(query_marginal(astate, v) - query_marginal(jstate, v))) > ALMOND_TOL:
                problems.append(f"almond marginal of {v} differs")
        jb, ab = marginalization_budget(jt), marginalization_budget(almond)
        if (jstate.stats.marginalizations, astate.stats.marginalizations) != (jb.marginalizations, ab.marginalizations):
            problems.append("instrumented marginalization counts disagree with the budget")
        for i in almond.separator_nodes:
            if astate.stats.stored_tables[i] != almond.degree(i) - 1:
                problems.append(f"separator node {i} stores {astate.stats.stored_tables[i]} tables, degree {almond.degree(i)}")
        repeated = any(n.multiplicity >= 2 for n in almond.nodes)
        if repeated:
            strict += 1
            if not ab.marginalizations < jb.marginalizations:
                problems.append("repeated separator but no marginalization saved")
        elif ab.marginalizations != jb.marginalizations:
            problems.append("no repeated separator yet budgets differ")
        if problems:
            res.fail(f"case {k}: " + "; ".join(problems[:3]), model)
    res.notes.append(f"{strict} instances with a separator of multiplicity >= 2")
    return res


def suite_example1(seed: int, cases: int) -> SuiteResult:
    res = SuiteResult("example1", 3)
    for n in (4, 5, 6):
        inst = build_example1_instance(n)
        joint = oracle.joint_from_factors(inst.universe, [r.as_potential() for r in inst.clamped_relations()])
        truth = pos_of(oracle.oracle_marginal(joint, inst.query))
        local = fixpoint_local_propagation(inst.scheme, inst.clamped_relations())
        got = next(r for r in local.relations if r.scope == inst.query)
        jt_pos = junction_tree_pos(inst)
        tri_scheme, tri_rels = inst.triangulated_scheme()
        fixed = fixpoint_local_propagation(tri_scheme, tri_rels)
        tri_got = next(r for r in fixed.relations if r.scope == inst.query)
        hidden = check_hidden_triangulation(inst.graph, inst.scheme)
        hidden_tri = check_hidden_triangulation(inst.graph, tri_scheme)
        identity = np.zeros_like(truth.table)
        identity[0, 0] = identity[1, 1] = True
        block = np.zeros_like(truth.table)
        block[:2, :2] = True
        if n == 4:
            a, b = (inst.universe[v].name for v in inst.query)
            res.notes.append(f"local fixpoint Pos({a},{b}) = {got.table.astype(int).tolist()}")
            res.notes.append(f"true Pos'({a},{b})      = {truth.table.astype(int).tolist()}")
        checks = {
            "true projection is the identity": np.array_equal(truth.table, identity),
            "local fixpoint stays all-ones on the 2x2 block": np.array_equal(got.table, block),
            "junction tree recovers the identity": jt_pos == truth,
            "triangulated scheme recovers the identity": tri_got == truth,
            "chordless scopes hide no triangulation": not hidden and len(hidden.witness) == n,
            "triangulated scopes contain one": bool(hidden_tri),
        }
        for label, ok in checks.items():
            if not ok:
                res.fail(f"cycle length {n}: {label} FAILED", from_graph(inst.graph, inst.scheme.scopes))
    return res


def suite_triangulation(seed: int, cases: int) -> SuiteResult:
    res = SuiteResult("triangulation", cases)
    rng = np.random.default_rng(seed)
    for k in range(cases):
        while True:
            n = int(rng.integers(3, 9))
            p = rng.uniform(0.2, 0.6)
            universe = Universe.from_cardinalities(rng.integers(2, 4, size=n).tolist())
            g = UndirectedGraph.from_edges(universe, [(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < p])
            if g.is_connected():
                break
        heur = triangulate_heuristic(g)
        best = triangulate_optimal(g)
        if not is_chordal(heur.graph) or not is_chordal(best.graph):
            res.fail(f"case {k}: triangulation not chordal", from_graph(g))
        if heur.fill_count < best.fill_count:
            res.fail(f"case {k}: heuristic fill {heur.fill_count} below the optimum {best.fill_count}", from_graph(g))
    for n in (4, 5, 6):
        universe = Universe.from_cardinalities([2] * n)
        cyc = UndirectedGraph.from_edges(universe, [(i, (i + 1) % n) for i in range(n)])
        want = oracle.min_fill(cyc)
        got = triangulate_heuristic(cyc).fill_count
        res.notes.append(f"C{n}: oracle minimum fill {want}, heuristic {got}")
        if got != want:
            res.fail(f"C{n}: heuristic fill {got} != oracle minimum {want}", from_graph(cyc))
    return res


SUITES: dict[str, Callable[[int, int], SuiteResult]] = {
    "theorem1": suite_theorem1,
    "corollary1": suite_corollary1,
    "theorem2": suite_theorem2,
    "propagation": suite_propagation,
    "almond": suite_almond,
    "example1": suite_example1,
    "triangulation": suite_triangulation,
}


def run_suite(name: str, seed: int = 0, cases: int = 200) -> SuiteResult:
    return SUITES[name](seed, cases)
