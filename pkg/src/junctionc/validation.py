"""Input checking shared by the estimator and the command line."""

from __future__ import annotations

from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import ContractViolation, UnknownVariableError
from .modelfile import Model, load
from .propagation import Evidence


def check_model(model: Any) -> Model:
    """Accept a :class:`Model` or a path to a model file."""
    if isinstance(model, Model):
        return model
    if isinstance(model, (str, Path)):
        return load(model)
    raise ContractViolation(f"expected a Model or a model file path, got {type(model).__name__}")


def check_choice(name: str, value: Any, options: Sequence[Any]) -> Any:
    if value not in options:
        raise ContractViolation(f"{name}={value!r} is not one of {list(options)}")
    return value


def check_variable(model: Model, name: str | int) -> int:
    if isinstance(name, int) and not isinstance(name, bool):
        if not 0 <= name < len(model.universe):
            raise UnknownVariableError(f"no variable with id {name}")
        return name
    try:
        return model.universe.index(name)
    except KeyError:
        raise UnknownVariableError(f"unknown variable {name!r}") from None


def check_variables(model: Model, names: Iterable[str | int] | None) -> list[int]:
    if names is None:
        return list(range(len(model.universe)))
    return [check_variable(model, n) for n in names]


def check_evidence(model: Model, evidence: Evidence | Mapping[Any, Any] | None) -> Evidence:
    """Turn ``{name: state}`` findings into an :class:`Evidence` over variable ids.

    A state may be a label, an index, or a sequence of likelihoods (a soft
    finding).
    """
    if evidence is None:
        return Evidence()
    if isinstance(evidence, Evidence):
        return evidence
    hard: dict[int, int] = {}
    soft: dict[int, list[float]] = {}
    for name, state in evidence.items():
        var = check_variable(model, name)
        if isinstance(state, (str, int)) and not isinstance(state, bool):
            try:
                hard[var] = model.state_index(var, state)
            except KeyError as exc:
                raise ContractViolation(str(exc.args[0])) from None
        else:
            soft[var] = [float(x) for x in state]
    return Evidence(hard, soft)
