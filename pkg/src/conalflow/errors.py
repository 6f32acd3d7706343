"""Exception types shared across the package."""


class ConalflowError(Exception):
    """Base class for all package-specific errors."""


class ArgumentError(ConalflowError, ValueError):
    """Raised when arguments are structurally invalid (shape/dimension mismatches)."""


class DomainError(ConalflowError, ValueError):
    """Raised when a point leaves the manifold domain (e.g. a matrix that is not
    symmetric positive definite is used where an SPD point is required)."""


class NumericError(ConalflowError, ArithmeticError):
    """Raised when a numeric routine cannot reach its requested tolerance."""


class StiffnessError(NumericError):
    """Raised when the adaptive integrator's step size underflows.

    Carries the partial trajectory computed so far in ``partial`` so callers
    can inspect where the integration broke down.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class FoliationError(ConalflowError, ValueError):
    """Raised when no valid foliation region can be constructed."""


class ConfigError(ConalflowError, ValueError):
    """Raised for malformed configuration files or CLI arguments."""
