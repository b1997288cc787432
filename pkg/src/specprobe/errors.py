"""Exception types shared across the package.

Argument and domain problems raise the built-in ``ValueError``; the classes
here cover failures of the numerical machinery itself, so callers (and the
command line driver) can tell a bad request apart from a computation that
did not converge.
"""

from __future__ import annotations

__all__ = [
    "NumericsError",
    "QuadratureError",
    "BracketError",
    "ConsistencyError",
    "ThresholdError",
    "TruncationError",
]


class NumericsError(RuntimeError):
    """A numerical routine failed to reach its stated tolerance or state."""


class QuadratureError(NumericsError):
    """Adaptive quadrature hit a non-finite sample or failed to converge."""


class BracketError(NumericsError):
    """An eigenvalue bracket could not be established within the search bounds."""


class ConsistencyError(NumericsError):
    """A converged result failed an internal cross-check (node count, norm)."""


class ThresholdError(NumericsError):
    """The spectral parameter is below the threshold required by the operation."""

    def __init__(self, message: str, lam: float | None = None):
        super().__init__(message)
        self.lam = lam


class TruncationError(NumericsError):
    """A truncated sum has a tail estimate above the permitted bound."""

    def __init__(self, message: str, tail_bound: float | None = None):
        super().__init__(message)
        self.tail_bound = tail_bound
