"""Exception hierarchy shared by every frankfit module."""

from __future__ import annotations


class FrankFitError(Exception):
    """Base class for all frankfit errors."""


class InvalidParameter(FrankFitError, ValueError):
    """Raised when an association parameter violates its invariants."""


class BoundaryValue(FrankFitError, ValueError):
    """Raised when a probability coordinate lies on {0, 1} where the open interval is required."""


class OverflowGuard(FrankFitError, ArithmeticError):
    """Raised when an exponent leaves the stable range even after factoring."""


class DegenerateDraw(FrankFitError):
    """A uniform draw landed exactly on 0 or 1. The sampler catches this and redraws."""


class QuadratureNotConverged(FrankFitError):
    """Raised when a quadrature rule cannot meet its error target within its node budget."""

    def __init__(self, message: str, estimate: float = float("nan"), error: float = float("nan")):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class EstimationError(FrankFitError):
    """Base class for solver failures. ``boundary_estimate`` holds the best value reached."""

    def __init__(self, message: str, boundary_estimate: float = float("nan")):
        super().__init__(message)
        self.boundary_estimate = boundary_estimate


class NoBracket(EstimationError):
    """The likelihood equation shows no sign change inside the admissible range."""


class MomentOutOfRange(EstimationError):
    """The sample moment exceeds what the admissible range of theta can reach."""


class DegenerateSample(EstimationError):
    """Every pair in the sample is identical, so the likelihood carries no information."""
