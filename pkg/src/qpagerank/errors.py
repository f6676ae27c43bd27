"""Exception hierarchy shared by every module.

Each family maps onto one CLI exit code, so callers can catch a base class
and translate it without inspecting messages.
"""

from __future__ import annotations


class QPageRankError(Exception):
    """Base class for all library errors."""

    exit_code = 1


class GraphParseError(QPageRankError):
    exit_code = 2

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class MalformedLine(GraphParseError):
    pass


class DuplicateEdge(GraphParseError):
    pass


class HeaderMismatch(GraphParseError):
    pass


class EmptyGraph(GraphParseError):
    pass


class InvalidParameter(QPageRankError):
    """Bad numeric configuration (damping factor, personalization, order)."""

    exit_code = 2


class ConvergenceError(QPageRankError):
    exit_code = 3

    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class ScaleError(QPageRankError):
    exit_code = 4


class InadmissiblePerturbation(QPageRankError):
    exit_code = 5


class BranchPointError(InadmissiblePerturbation):
    """A series was requested at a point where the square-root branch degenerates."""


class InadmissibleChi(QPageRankError):
    exit_code = 6


class MatchingAmbiguity(QPageRankError):
    """Eigenvalue matching could not be made unambiguous within tolerance."""


class NotInSubspace(QPageRankError):
    def __init__(self, message: str, residual: float):
        self.residual = residual
        super().__init__(f"{message} (residual {residual:.3e})")


class DegenerateEigenvalue(QPageRankError):
    pass


class BoundUndefined(QPageRankError):
    pass
