"""Exception types raised across the package."""


class CftError(Exception):
    """Base class for all package errors."""


class DimensionError(CftError, ValueError):
    """Operand shapes are incompatible with the requested operation."""


class ContractError(CftError, ValueError):
    """An input violates a numerical precondition (Hermiticity, positivity, normalization)."""


class TruncationError(CftError, ValueError):
    """A Fock-space truncation is too small for the requested state or operator."""

    def __init__(self, message, required_dim=None):
        super().__init__(message)
        self.required_dim = required_dim


class SolverError(CftError, RuntimeError):
    """An optimization routine failed (infeasible, unbounded, or did not converge)."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report or {}


class ConfigError(CftError, ValueError):
    """A run configuration could not be parsed or validated."""
