"""Exception types shared across the package."""

from __future__ import annotations


class AerokinError(Exception):
    """Base class for all package errors."""


class ValidationError(AerokinError, ValueError):
    """Invalid user input: parameters, configuration or sequences."""


class QuadratureError(AerokinError):
    """A quadrature produced a value that violates a required sign or bound."""

    def __init__(self, message: str, value: float | None = None):
        super().__init__(message)
        self.value = value


class ExtrapolationError(AerokinError, ValueError):
    """A tabulated function was evaluated outside its table range."""


class NonConvergenceError(AerokinError):
    """An iterative solver did not reach its tolerance."""

    def __init__(self, message: str, iterations: int = 0, residual: float = float("nan")):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class DilutenessWarning(UserWarning):
    """Particle-particle collisions are not negligible for the given setup."""
