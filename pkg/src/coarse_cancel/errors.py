"""Exception types shared across the package."""


class CoarseCancelError(Exception):
    """Base class for all package errors."""


class InvalidInput(CoarseCancelError, ValueError):
    """Input data violates a structural invariant."""


class Inconclusive(CoarseCancelError):
    """A finite window was too small to decide the question asked."""


class UnsoundLedger(CoarseCancelError):
    """Bound-direction flags do not support the requested inference."""


class HypothesisFailure(CoarseCancelError):
    """A certification precondition does not hold."""
