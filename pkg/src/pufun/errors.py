"""Exception types raised by the library."""

from __future__ import annotations


class PUFunError(Exception):
    """Base class for all library errors."""


class InvalidArgumentError(PUFunError, ValueError):
    """An argument violates a documented precondition."""


class InvalidDataError(PUFunError, ValueError):
    """Sampled or supplied data is not finite."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class OutOfDomainError(PUFunError, ValueError):
    """An evaluation point lies outside the approximation domain."""


class ConstructionLimitError(PUFunError, RuntimeError):
    """Adaptive refinement exceeded ``max_depth`` or ``max_leaves``.

    The partially built tree is kept on ``partial`` for diagnostics.
    """

    def __init__(self, message, partial=None, depth=None, leaves=None):
        super().__init__(message)
        self.partial = partial
        self.depth = depth
        self.leaves = leaves


class MergePreconditionError(PUFunError, RuntimeError):
    """Operand zones do not line up with the merged zone in an unfinished dimension."""


class DivisionSingularityError(PUFunError, ZeroDivisionError):
    """A sampled denominator came too close to zero."""

    def __init__(self, message, location=None):
        super().__init__(message)
        self.location = location


class DegenerateLeafError(PUFunError, ValueError):
    """A leaf box does not meet the nonrectangular domain."""


class InsufficientSamplesError(PUFunError, ValueError):
    """Too few sample points for a least-squares fit."""
