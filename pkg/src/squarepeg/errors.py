"""Shared exception types."""


class InvalidInputError(ValueError):
    """Input violates a documented precondition or invariant."""


class ResolutionInsufficientError(RuntimeError):
    """A grid scan could not locate a required feature at the requested resolution."""


class HypothesisViolationError(InvalidInputError):
    """Supplied values do not satisfy the hypothesis equations of an estimate check."""
