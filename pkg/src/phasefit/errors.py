"""Exception types shared across the package."""


class PhaseFitError(Exception):
    """Base class for all package errors."""


class OutOfRange(PhaseFitError, ValueError):
    """A frequency or parameter lies outside the supported interval."""


class SingularSystem(PhaseFitError):
    """The fitting conditions are numerically singular at this frequency."""

    def __init__(self, message, condition=None):
        super().__init__(message)
        self.condition = condition


class DenominatorUnderflow(PhaseFitError):
    """A closed-form denominator is too small to evaluate reliably."""


class ZeroDenominator(PhaseFitError, ZeroDivisionError):
    """The phase-lag denominator vanishes."""


class NoConvergence(PhaseFitError):
    """An iterative solver hit its iteration cap."""


class NonFiniteState(PhaseFitError, FloatingPointError):
    """An integrator produced inf or NaN, usually a sign of instability."""

    def __init__(self, message, step=None):
        super().__init__(message)
        self.step = step


class StageDivergence(PhaseFitError):
    """Neither fixed-point nor Newton iteration solved the stage equations."""
