"""Exception hierarchy shared by every module of the package."""

from __future__ import annotations


class DistillError(Exception):
    """Base class for all errors raised by :mod:`siodistill`."""


class InvalidStateError(DistillError, ValueError):
    """A matrix failed density-matrix validation.

    ``magnitude`` holds the size of the violation (asymmetry, trace error or
    most negative eigenvalue), so callers can report how far off the input is.
    """

    invariant = "state"

    def __init__(self, magnitude: float, message: str | None = None):
        self.magnitude = float(magnitude)
        super().__init__(message or f"{self.invariant} violated by {self.magnitude:.3e}")


class NotHermitian(InvalidStateError):
    invariant = "hermiticity"


class TraceNotOne(InvalidStateError):
    invariant = "unit trace"


class NotPositiveSemidefinite(InvalidStateError):
    invariant = "positive semidefiniteness"


class DimensionMismatch(DistillError, ValueError):
    pass


class LevelOutOfRange(DistillError, ValueError):
    pass


class IndexOutOfRange(DistillError, ValueError):
    pass


class NegativeEntry(DistillError, ValueError):
    pass


class MeasureError(DistillError, ValueError):
    pass


class NonMonotoneLevelValue(MeasureError):
    pass


class NonzeroF1(MeasureError):
    pass


class NonConvexMeasure(MeasureError):
    pass


class PurityVerificationFailed(DistillError):
    def __init__(self, indices, purity: float):
        self.indices = tuple(indices)
        self.purity = float(purity)
        super().__init__(
            f"block {[i + 1 for i in self.indices]} has purity {self.purity:.12f}, not rank one"
        )


class ProjectorNotRankOne(DistillError):
    def __init__(self, indices, purity: float):
        self.indices = tuple(indices)
        self.purity = float(purity)
        super().__init__(
            f"projected block {[i + 1 for i in self.indices]} is not pure (purity {self.purity:.12f})"
        )


class SearchBudgetExceeded(DistillError):
    pass


class ZeroAmplitude(DistillError, ValueError):
    pass


class Unbounded(DistillError):
    pass


class IterationLimit(DistillError):
    pass


class InfeasibleStart(DistillError, ValueError):
    """Initial slack basis is infeasible (some rhs entry is negative)."""


class SizeGuard(DistillError, ValueError):
    pass


class InputFormatError(DistillError, ValueError):
    """A file could not be parsed; the message names the offending location."""
