"""Exception taxonomy shared across the package."""


class LclError(Exception):
    """Base class for package errors."""


class ConfigurationError(LclError):
    """Invalid configuration: bad quadrature order, malformed run config."""


class NumericalError(LclError):
    """A numerical routine failed to converge or violated its own identity."""


class QuadratureError(NumericalError):
    """Adaptive quadrature failed to reach the requested tolerance.

    Carries the best value and the achieved error estimate.
    """

    def __init__(self, message, value=None, estimate=None):
        super().__init__(message)
        self.value = value
        self.estimate = estimate


class CapacityError(LclError):
    """A hard size cap was exceeded (dense matrix dimension, angular cutoff)."""


class MethodError(LclError):
    """The requested evaluation method does not apply; the message names an alternative."""


class AccuracyError(LclError):
    """A truncation or tail estimate dominates the requested accuracy."""


class ContractError(LclError):
    """A documented precondition was violated (asymmetric input, missing certificate)."""
