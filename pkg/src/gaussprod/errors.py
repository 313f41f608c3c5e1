"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class GaussProdError(Exception):
    """Base class for errors raised by this package."""


class DomainError(GaussProdError, ValueError):
    """An argument lies outside the domain where the quantity is defined."""


class NumericError(GaussProdError, ArithmeticError):
    """A numerical procedure failed to reach its accuracy target.

    ``partial`` carries the last available approximation, when there is one.
    """

    def __init__(self, message: str, partial: float | None = None):
        super().__init__(message)
        self.partial = partial


class CapabilityError(GaussProdError):
    """The requested method cannot handle this exponent/matrix shape."""


class NotPositiveDefinite(DomainError):
    """Cholesky met a pivot at or below the positive-definiteness threshold."""

    def __init__(self, message: str, pivot_index: int | None = None, pivot: float | None = None):
        super().__init__(message)
        self.pivot_index = pivot_index
        self.pivot = pivot


class SingularBlockError(NumericError):
    """A block or Schur complement needed by a block inverse is singular."""

    def __init__(self, message: str, block: str):
        super().__init__(message)
        self.block = block


class InternalConsistencyError(GaussProdError, AssertionError):
    """Two algebraically equal routes disagreed beyond their tolerance."""
