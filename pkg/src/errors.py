"""
Error Types
Exceptions raised by the boxgas simulation modules and the CLI.
"""

from typing import Optional


class BoxGasError(Exception):
    """Base class for every error raised by boxgas."""


class DomainError(BoxGasError, ValueError):
    """An argument lies outside the domain of the requested operation."""


class ConfigurationError(BoxGasError, ValueError):
    """A run, grid or integrator setting is invalid."""


class TruncationError(BoxGasError):
    """The truncated eigenbasis misses more probability than allowed."""

    def __init__(self, deficit: float, n_max: int, suggested_n_max: Optional[int] = None):
        """
        Args:
            deficit: Probability not accounted for by the basis plus analytic tails
            n_max: Basis size that was used
            suggested_n_max: Basis size expected to resolve the deficit
        """
        self.deficit = deficit
        self.n_max = n_max
        self.suggested_n_max = suggested_n_max
        message = f"truncation deficit {deficit:.3e} with n_max={n_max}"
        if suggested_n_max is not None:
            message += f"; try n_max >= {suggested_n_max}"
        super().__init__(message)


class PositivityError(BoxGasError, ValueError):
    """A density matrix has an eigenvalue below the positivity tolerance."""


class IntegrationError(BoxGasError):
    """The fixed-step integrator drifted beyond its trace tolerance."""
