"""Exception types shared across the package."""


class NestppError(Exception):
    """Base class for package errors."""


class ValidationError(NestppError):
    """Raised when input events or arguments violate a documented precondition."""


class NumericError(NestppError):
    """Raised when a numeric computation cannot proceed (zero intensity, overflow)."""


class FitError(NestppError):
    """Raised when every optimization start diverges or yields a non-finite likelihood."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or []


class SupercriticalRegimeError(NestppError):
    """Raised when simulation exceeds its event cap while the branching factor exceeds one."""


class SimulationLimitError(NestppError):
    """Raised when simulation exceeds its hard event cap in a subcritical regime."""
