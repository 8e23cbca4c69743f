"""Exception hierarchy shared by the compiler, the inference engine and the CLI."""


class JunctionError(Exception):
    """Base class for every error raised by junctionc."""


class ContractViolation(JunctionError, ValueError):
    """An operation was called with arguments outside its precondition."""


class CycleError(JunctionError):
    """A directed graph that must be acyclic contains a cycle."""

    def __init__(self, message, cycle=()):
        super().__init__(message)
        self.cycle = tuple(cycle)


class DisconnectedGraphError(JunctionError):
    """Triangulation or tree construction was asked to handle a disconnected input."""

    def __init__(self, message, components=()):
        super().__init__(message)
        self.components = tuple(tuple(c) for c in components)


class NotChordalError(JunctionError):
    def __init__(self, message, witness=()):
        super().__init__(message)
        self.witness = tuple(witness)


class NestedCliquesError(JunctionError):
    pass


class ModelTooLargeError(JunctionError):
    """A state-space product does not fit in a signed 64-bit integer."""


class BoundExceededError(JunctionError):
    """An exhaustive routine was asked to handle an input above its size bound."""


class InconsistencyError(JunctionError, ArithmeticError):
    """A positive value was divided by zero during absorption."""

    def __init__(self, message, configuration=None):
        super().__init__(message)
        self.configuration = configuration


class ImpossibleEvidenceError(JunctionError):
    """The joint potential vanishes everywhere under the entered evidence."""


class UnknownVariableError(JunctionError, KeyError):
    pass


class ModelParseError(JunctionError):
    """The model file is not well-formed (bad syntax, missing or mistyped field)."""


class ModelSemanticError(JunctionError):
    """The model file parses but describes an invalid model."""
