"""Estimator-style front end: ``fit`` compiles a model, queries read marginals."""

from __future__ import annotations

from typing import Any, Iterable, Mapping, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .almond import build_almond_tree, marginalization_budget
from .graph_model import cliques, triangulate_heuristic, triangulate_optimal
from .junction_core import (
    build_junction_graph,
    kruskal_min_cost_tree,
    prim_max_spanning_tree,
    separator_multiset,
)
from .propagation import TreeState, assign_factors, propagate, query_marginal
from .validation import check_choice, check_evidence, check_model, check_variables


class JunctionTreeInference(BaseEstimator):
    """Exact marginal inference on a discrete Markov network or Bayesian network.

    Parameters
    ----------
    objective : {"fill", "weight"}
        Triangulation criterion: fewest fill-ins or smallest total clique
        state space.
    optimal : bool
        Search all elimination orders instead of the greedy heuristic
        (small models only).
    tree : {"kruskal", "prim", "almond"}
        Which tree carries the propagation. Both spanning-tree builders
        return a maximal-weight junction tree of minimal cost; "almond"
        propagates over the Almond tree built from its separators.
    max_optimal_vars : int
        Size bound for ``optimal=True``.
    """

    def __init__(self, objective="fill", optimal=False, tree="kruskal", max_optimal_vars=10):
        self.objective = objective
        self.optimal = optimal
        self.tree = tree
        self.max_optimal_vars = max_optimal_vars

    def fit(self, X, y=None):
        """Compile ``X`` (a :class:`Model` or model file path)."""
        model = check_model(X)
        check_choice("objective", self.objective, ("fill", "weight"))
        check_choice("tree", self.tree, ("kruskal", "prim", "almond"))
        graph = model.markov_graph()
        if self.optimal:
            tri = triangulate_optimal(graph, self.objective, self.max_optimal_vars)
        else:
            tri = triangulate_heuristic(graph, self.objective)
        jg = build_junction_graph(cliques(tri.graph), model.universe)
        jt = prim_max_spanning_tree(jg) if self.tree == "prim" else kruskal_min_cost_tree(jg)
        almond = build_almond_tree(jt.cliques, separator_multiset(jt))

        self.model_ = model
        self.graph_ = graph
        self.triangulation_ = tri
        self.junction_graph_ = jg
        self.junction_tree_ = jt
        self.almond_tree_ = almond
        self.state_ = assign_factors(model.factors, almond if self.tree == "almond" else jt)
        return self

    def calibrate(self, evidence=None) -> TreeState:
        check_is_fitted(self, "state_")
        return propagate(self.state_, check_evidence(self.model_, evidence))

    def predict_proba(self, evidence=None, variables: Iterable[str] | None = None) -> dict[str, np.ndarray]:
        """Posterior marginal of each requested variable given ``evidence``."""
        state = self.calibrate(evidence)
        names = self.model_.universe.names
        return {names[v]: query_marginal(state, v) for v in check_variables(self.model_, variables)}

    def transform(self, X: Sequence[Mapping[str, Any] | None]) -> np.ndarray:
        """One row per evidence set: all posterior marginals concatenated in variable order."""
        rows = [np.concatenate(list(self.predict_proba(ev).values())) for ev in X]
        return np.vstack(rows) if rows else np.empty((0, sum(self.model_.universe.cardinalities)))

    def report(self, almond: bool = False) -> dict[str, Any]:
        """Compilation summary; deterministic for a given model and parameters."""
        check_is_fitted(self, "state_")
        u = self.model_.universe
        names = u.names
        jt = self.junction_tree_
        seps = separator_multiset(jt)
        out: dict[str, Any] = {
            "variables": len(u),
            "triangulation": {
                "method": "optimal" if self.optimal else "heuristic",
                "objective": self.objective,
                "order": [names[v] for v in self.triangulation_.order],
                "fill_ins": [[names[a], names[b]] for a, b in sorted(self.triangulation_.fill_ins)],
                "total_clique_weight": self.triangulation_.total_clique_weight,
            },
            "cliques": [
                {"id": c.id, "vars": [names[v] for v in c.vars], "table_size": c.table_size} for c in jt.cliques
            ],
            "separators": [
                {"vars": [names[v] for v in s.vars], "multiplicity": seps[s], "table_size": s.table_size}
                for s in sorted(seps, key=lambda s: (-s.weight, s.vars))
            ],
            "tree": {
                "algorithm": "prim" if self.tree == "prim" else "kruskal",
                "links": [
                    {"cliques": [l.u, l.v], "separator": [names[v] for v in l.separator.vars],
                     "weight": l.weight, "cost": l.cost}
                    for l in jt.links
                ],
                "total_weight": jt.total_weight,
                "total_cost": jt.total_cost,
            },
        }
        if almond:
            a = self.almond_tree_
            jb, ab = marginalization_budget(jt), marginalization_budget(a)
            out["almond"] = {
                "separator_nodes": [
                    {"node": i, "vars": [names[v] for v in a.nodes[i].vars],
                     "multiplicity": a.nodes[i].multiplicity, "degree": a.degree(i),
                     "stored_tables": a.degree(i) - 1}
                    for i in a.separator_nodes
                ],
                "links": [{"separator_node": l.sub, "superset_node": l.sup, "cost": l.cost} for l in a.links],
                "total_cost": a.total_cost,
                "junction_tree_budget": _budget_dict(jb),
                "almond_budget": _budget_dict(ab),
            }
        return out


def _budget_dict(b) -> dict[str, int]:
    return {
        "marginalizations": b.marginalizations,
        "stored_tables": b.stored_tables,
        "marginalization_work": b.marginalization_work,
    }
