"""Exception hierarchy shared by the graph and operator layers."""

from __future__ import annotations


class KGraphError(Exception):
    """Base class for every error raised by this package."""


class StructureError(KGraphError):
    """Malformed skeleton: edges pointing at vertices that do not exist."""

    def __init__(self, message: str, offending: list | None = None) -> None:
        super().__init__(message)
        self.offending = list(offending or [])


class IncompleteTableError(KGraphError):
    """A composable two-colour pair is covered by no factorization square."""

    def __init__(self, message: str, pair: tuple | None = None) -> None:
        super().__init__(message)
        self.pair = pair


class AmbiguousTableError(KGraphError):
    """A composable two-colour pair is covered by more than one square."""

    def __init__(self, message: str, pair: tuple | None = None) -> None:
        super().__init__(message)
        self.pair = pair


class CommutationError(KGraphError):
    """Transition matrices of two colours do not commute."""


class CubeConsistencyError(KGraphError):
    """Three-colour rewriting is not associative (k >= 3 only)."""


class CompositionError(KGraphError):
    """A word of edges is not composable left-to-right."""

    def __init__(self, message: str, position: int | None = None) -> None:
        super().__init__(message)
        self.position = position


class DegreeError(KGraphError):
    """Requested degree is not below the degree of the path."""


class ParseError(KGraphError):
    """Syntax error in the k-graph text format."""

    def __init__(self, message: str, line: int | None = None) -> None:
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ParameterError(KGraphError, ValueError):
    """Numerical parameters outside their admissible range."""


class DimensionError(KGraphError, ValueError):
    """Graded operators with incompatible truncation parameters."""


class ConfigurationError(KGraphError):
    """An edge label has no operator attached to it."""


class NumericalWarning(UserWarning):
    """Iterative estimate stopped at its iteration cap."""
