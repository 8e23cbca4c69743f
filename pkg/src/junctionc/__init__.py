"""Junction tree compiler and exact inference for discrete graphical models."""

from .almond import AlmondTree, build_almond_tree, contract, marginalization_budget
from .errors import (
    BoundExceededError,
    ContractViolation,
    CycleError,
    DisconnectedGraphError,
    ImpossibleEvidenceError,
    InconsistencyError,
    JunctionError,
    ModelParseError,
    ModelSemanticError,
    ModelTooLargeError,
    NestedCliquesError,
    NotChordalError,
    UnknownVariableError,
)
from .estimator import JunctionTreeInference
from .graph_model import (
    Dag,
    UndirectedGraph,
    Universe,
    cliques,
    is_chordal,
    moralize,
    triangulate_heuristic,
    triangulate_optimal,
)
from .junction_core import (
    JunctionGraph,
    JunctionTree,
    build_junction_graph,
    kruskal_min_cost_tree,
    prim_max_spanning_tree,
    separator_multiset,
    verify_junction_property,
)
from .modelfile import Model, dump, dumps, load, loads
from .propagation import Evidence, Potential, assign_factors, propagate, query_marginal

__version__ = "0.1.0"

__all__ = [
    "AlmondTree", "build_almond_tree", "contract", "marginalization_budget",
    "BoundExceededError", "ContractViolation", "CycleError", "DisconnectedGraphError",
    "ImpossibleEvidenceError", "InconsistencyError", "JunctionError", "ModelParseError",
    "ModelSemanticError", "ModelTooLargeError", "NestedCliquesError", "NotChordalError",
    "UnknownVariableError", "JunctionTreeInference", "Dag", "UndirectedGraph", "Universe",
    "cliques", "is_chordal", "moralize", "triangulate_heuristic", "triangulate_optimal",
    "JunctionGraph", "JunctionTree", "build_junction_graph", "kruskal_min_cost_tree",
    "prim_max_spanning_tree", "separator_multiset", "verify_junction_property",
    "Model", "dump", "dumps", "load", "loads",
    "Evidence", "Potential", "assign_factors", "propagate", "query_marginal",
]
