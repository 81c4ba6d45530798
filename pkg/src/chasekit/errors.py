"""Exception types shared across the package."""


class ChaseError(Exception):
    """Base class for all chasekit errors."""


class InvalidSet(ChaseError):
    """A feasible set is malformed or empty."""


class NonConvergence(ChaseError):
    """An iterative solver exhausted its iteration budget.

    ``best`` carries the best iterate found so far, when available.
    """

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class DimensionMismatch(ChaseError):
    """Operands live in incompatible dimensions."""


class OffSubspace(ChaseError):
    """A point expected on an affine subspace is too far from it."""


class NotDifferentiable(ChaseError):
    """Gradient requested at a kink."""


class NoBracket(ChaseError):
    """Bisection endpoints do not bracket a sign change."""


class SchemaError(ChaseError):
    """An instance file failed validation; ``field`` names the offender."""

    def __init__(self, field, message):
        super().__init__(f"{field}: {message}")
        self.field = field


class LengthMismatch(ChaseError):
    """Paired sequences have different lengths."""


class DegenerateState(ChaseError):
    """An adaptive adversary was asked to act from a degenerate position."""


class DimensionOverflow(ChaseError):
    """A request needs more directions than the reduced space can hold."""


class RootNotBracketed(ChaseError):
    """A scalar root search could not bracket its root."""


class InvalidMode(ChaseError):
    """Unknown mode string passed to a parameter preset."""


class NonPositiveData(ChaseError):
    """Log-log fitting needs positive data and at least three points."""


class NumericalAmbiguity(ChaseError):
    """A balanced-descent step converged to neither recognized regime."""
