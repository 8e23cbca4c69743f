"""Reading and writing model files.

A model file is a JSON document::

    {
      "format": "junctionc-model",
      "version": 1,
      "variables": [{"name": "A", "states": ["no", "yes"]}, ...],
      "factors": [
        {"scope": ["A", "B"], "ordering": "sorted-scope, last-fastest",
         "table": [0.9, 0.1, 0.2, 0.8]}
      ],
      "dag": [["A", "B"]]
    }

Factor scopes are listed in variable declaration order and tables are
flattened with the last scope variable varying fastest; the ``ordering``
stamp must say so. ``dag`` (optional) lists parent/child pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from .errors import ContractViolation, CycleError, ModelParseError, ModelSemanticError
from .graph_model import Dag, UndirectedGraph, Universe, moralize
from .propagation import Potential

__all__ = ["Model", "ORDERING", "FORMAT", "VERSION", "loads", "load", "dumps", "dump", "from_graph"]

FORMAT = "junctionc-model"
VERSION = 1
ORDERING = "sorted-scope, last-fastest"


@dataclass(frozen=True)
class Model:
    universe: Universe
    states: tuple[tuple[str, ...], ...]
    factors: tuple[Potential, ...]
    dag: Dag | None = None

    def markov_graph(self) -> UndirectedGraph:
        """Every factor scope made complete, plus the moral graph of the DAG if any."""
        g = UndirectedGraph.complete_on(self.universe, (f.scope for f in self.factors))
        if self.dag is not None:
            g = g.with_edges(moralize(self.dag).edges())
        return g

    def state_index(self, var: int, state: str | int) -> int:
        labels = self.states[var]
        if isinstance(state, str):
            if state in labels:
                return labels.index(state)
            if state.isdigit() and int(state) < len(labels):
                return int(state)
            raise KeyError(f"variable {self.universe[var].name!r} has no state {state!r}")
        if not 0 <= int(state) < len(labels):
            raise KeyError(f"state {state} out of range for {self.universe[var].name!r}")
        return int(state)


def _field(obj: Any, key: str, kind: type | tuple[type, ...], where: str) -> Any:
    if not isinstance(obj, dict):
        raise ModelParseError(f"{where}: expected an object")
    if key not in obj:
        raise ModelParseError(f"{where}: missing field {key!r}")
    value = obj[key]
    if not isinstance(value, kind) or isinstance(value, bool):
        names = kind.__name__ if isinstance(kind, type) else "/".join(k.__name__ for k in kind)
        raise ModelParseError(f"{where}.{key}: expected {names}, got {type(value).__name__}")
    return value


def loads(text: str) -> Model:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelParseError(f"line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if _field(doc, "format", str, "model") != FORMAT:
        raise ModelParseError(f"model.format: expected {FORMAT!r}")
    version = _field(doc, "version", int, "model")
    if version != VERSION:
        raise ModelParseError(f"model.version: unsupported version {version}")

    names, states = [], []
    for i, var in enumerate(_field(doc, "variables", list, "model")):
        where = f"variables[{i}]"
        names.append(_field(var, "name", str, where))
        labels = _field(var, "states", list, where)
        if not all(isinstance(s, str) for s in labels):
            raise ModelParseError(f"{where}.states: expected a list of strings")
        states.append(tuple(labels))
    if len(set(names)) != len(names):
        raise ModelSemanticError("variables: duplicate variable names")
    for name, labels in zip(names, states):
        if not labels:
            raise ModelSemanticError(f"variable {name!r} has no states")
    universe = Universe.from_cardinalities([len(s) for s in states], names)
    index = {n: i for i, n in enumerate(names)}

    def resolve(name: Any, where: str) -> int:
        if not isinstance(name, str):
            raise ModelParseError(f"{where}: expected a variable name")
        if name not in index:
            raise ModelSemanticError(f"{where}: unknown variable {name!r}")
        return index[name]

    factors = []
    for k, fac in enumerate(_field(doc, "factors", list, "model")):
        where = f"factors[{k}]"
        scope_names = _field(fac, "scope", list, where)
        ordering = _field(fac, "ordering", str, where)
        table = _field(fac, "table", list, where)
        if not all(isinstance(x, (int, float)) and not isinstance(x, bool) for x in table):
            raise ModelParseError(f"{where}.table: expected a list of numbers")
        if ordering != ORDERING:
            raise ModelSemanticError(f"{where}.ordering: expected {ORDERING!r}, got {ordering!r}")
        scope = [resolve(n, f"{where}.scope") for n in scope_names]
        if scope != sorted(set(scope)):
            raise ModelSemanticError(f"{where}.scope: variables must be distinct and listed in declaration order")
        cards = [universe[v].cardinality for v in scope]
        expected = int(np.prod(cards, dtype=np.int64))
        if len(table) != expected:
            raise ModelSemanticError(f"{where}.table: has {len(table)} entries, scope needs {expected}")
        if any(x < 0 for x in table) or not any(x > 0 for x in table):
            raise ModelSemanticError(f"{where}.table: entries must be nonnegative and not all zero")
        factors.append(Potential(scope, cards, table))

    dag = None
    if doc.get("dag") is not None:
        raw = _field(doc, "dag", list, "model")
        edges = []
        for k, pair in enumerate(raw):
            if not isinstance(pair, list) or len(pair) != 2:
                raise ModelParseError(f"dag[{k}]: expected [parent, child]")
            edges.append((resolve(pair[0], f"dag[{k}]"), resolve(pair[1], f"dag[{k}]")))
        try:
            dag = Dag.from_edges(universe, edges)
        except (CycleError, ContractViolation) as exc:
            raise ModelSemanticError(f"dag: {exc}") from None
    return Model(universe, tuple(states), tuple(factors), dag)


def load(path: str | Path) -> Model:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ModelParseError(f"cannot read {path}: {exc.strerror}") from None
    return loads(text)


def dumps(model: Model) -> str:
    names = model.universe.names
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "variables": [{"name": n, "states": list(s)} for n, s in zip(names, model.states)],
        "factors": [
            {"scope": [names[v] for v in f.scope], "ordering": ORDERING, "table": f.flat.tolist()}
            for f in model.factors
        ],
    }
    if model.dag is not None:
        doc["dag"] = [[names[p], names[c]] for p, c in model.dag.edges()]
    return json.dumps(doc, indent=2) + "\n"


def dump(model: Model, path: str | Path) -> None:
    Path(path).write_text(dumps(model))


def from_graph(g: UndirectedGraph, scopes=None) -> Model:
    """Neutral model whose factors are the given scopes (default: the graph's edges)."""
    u = g.universe
    scopes = [tuple(sorted(s)) for s in (scopes if scopes is not None else g.edges())]
    covered = {v for s in scopes for v in s}
    scopes += [(v,) for v in g.nodes if v not in covered]
    factors = tuple(Potential(s, [u[v].cardinality for v in s]) for s in scopes)
    states = tuple(tuple(f"s{k}" for k in range(v.cardinality)) for v in u)
    return Model(u, states, factors)
