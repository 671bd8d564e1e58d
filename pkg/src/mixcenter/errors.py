"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class ConstructionError(RuntimeError):
    """A derived quantity violated an invariant during mixer construction."""


class SizeError(ValueError):
    """A problem instance exceeds the configured size guard."""
