"""Special functions and numerical primitives.

Bessel functions of the first kind are implemented here directly (ascending
series for small argument, Hankel-type asymptotic expansion for large
argument) so the package does not depend on a platform special-function
library.  The module also provides the turning-point profile built from
``J_{1/3} + J_{-1/3}``, a quadrature rule for integrands with square-root
behaviour at an endpoint, and a log-log power-law fitter used by all of the
scaling certificates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Sequence

import numpy as np

from .errors import QuadratureError

__all__ = [
    "bessel_j",
    "langer_profile",
    "integrate_sqrt_singular",
    "PowerLawFit",
    "fit_power_law",
]

_SERIES_MAX_TERMS = 500


def _bessel_series(nu: float, x: float) -> float:
    # Ascending series sum_k (-1)^k (x/2)^(nu+2k) / (k! Gamma(nu+k+1)).
    # Reliable in double precision up to the crossover used below.
    if x == 0.0:
        if nu == 0.0:
            return 1.0
        if nu > 0.0:
            return 0.0
        raise ValueError("bessel series diverges at x = 0 for negative order")
    half = 0.5 * x
    term = math.exp(nu * math.log(half) - math.lgamma(nu + 1.0))
    total = term
    q = -half * half
    for k in range(1, _SERIES_MAX_TERMS):
        term *= q / (k * (nu + k))
        total += term
        if abs(term) <= 1e-17 * abs(total) + 5e-324:
            return total
    raise QuadratureError(f"bessel series did not converge for nu={nu}, x={x}")


def _bessel_hankel(nu: float, x: float) -> float:
    # Large-argument expansion J_nu(x) = sqrt(2/(pi x)) (P cos chi - Q sin chi)
    # with chi = x - nu pi/2 - pi/4.  The expansion is asymptotic; partial
    # sums are kept at the smallest term seen, which is where truncation
    # error bottoms out.
    mu = 4.0 * nu * nu
    p_sum = 1.0
    q_sum = 0.0
    best_p, best_q = p_sum, q_sum
    term = 1.0
    smallest = 1.0
    for k in range(1, 200):
        term *= (mu - (2 * k - 1) ** 2) / (8.0 * x * k)
        sign = -1.0 if (k // 2) % 2 else 1.0
        if k % 2 == 0:
            p_sum += sign * term
        else:
            q_sum += sign * term
        size = abs(term)
        if size <= smallest:
            smallest = size
            best_p, best_q = p_sum, q_sum
            if size <= 1e-17:
                break
        elif size > 10.0 * smallest and k > 4:
            break
    chi = x - (0.5 * nu + 0.25) * math.pi
    return math.sqrt(2.0 / (math.pi * x)) * (
        best_p * math.cos(chi) - best_q * math.sin(chi)
    )


def _series_crossover(nu: float) -> float:
    # Below the crossover the ascending series is free of damaging
    # cancellation; above it the asymptotic expansion has bottomed out
    # well under 1e-12.  Validated for orders up to about 12; for larger
    # orders the hand-off band x ~ 2 nu loses accuracy gradually.
    a = abs(nu)
    if a <= 10.0:
        return max(14.0, a + 6.0)
    return 1.9 * a


def _bessel_any_order(nu: float, x: float) -> float:
    # Internal path: any order nu > -1, x >= 0.
    if x < 0.0:
        raise ValueError("bessel argument must be non-negative")
    if x <= _series_crossover(nu):
        return _bessel_series(nu, x)
    return _bessel_hankel(nu, x)


def bessel_j(nu: float, x):
    """Bessel function of the first kind ``J_nu(x)`` for ``nu >= 0``.

    ``x`` may be a scalar or an array of non-negative values.
    """
    if nu < 0.0:
        raise ValueError("order nu must be non-negative")
    if np.ndim(x) == 0:
        return _bessel_any_order(nu, float(x))
    arr = np.asarray(x, dtype=float)
    return np.array([_bessel_any_order(nu, float(xi)) for xi in arr.ravel()]).reshape(
        arr.shape
    )


def _langer_scalar(z: float) -> float:
    if z <= 0.0:
        raise ValueError("langer_profile needs z > 0")
    s = _bessel_any_order(1.0 / 3.0, z) + _bessel_any_order(-1.0 / 3.0, z)
    return math.sqrt(math.pi * z / 6.0) * s


def langer_profile(z):
    """Turning-point profile ``sqrt(pi z / 6) (J_{1/3}(z) + J_{-1/3}(z))``.

    Tends to ``cos(z - pi/4)`` with an ``O(1/z)`` error as ``z`` grows.
    """
    if np.ndim(z) == 0:
        return _langer_scalar(float(z))
    arr = np.asarray(z, dtype=float)
    return np.array([_langer_scalar(float(zi)) for zi in arr.ravel()]).reshape(
        arr.shape
    )


@lru_cache(maxsize=8)
def _gl_rule(order: int):
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return nodes, weights


def _gl_fixed(f: Callable, a: float, b: float, panels: int, order: int) -> float:
    nodes, weights = _gl_rule(order)
    edges = np.linspace(a, b, panels + 1)
    mid = 0.5 * (edges[1:] + edges[:-1])
    half = 0.5 * (edges[1:] - edges[:-1])
    x = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    y = np.asarray(f(x), dtype=float)
    if not np.all(np.isfinite(y)):
        raise QuadratureError("integrand returned a non-finite value")
    w = (half[:, None] * weights[None, :]).ravel()
    return float(np.dot(w, y))


def _gl_adaptive(
    f: Callable, a: float, b: float, rel_tol: float, max_panels: int = 4096
) -> float:
    order = 32
    panels = 1
    prev = _gl_fixed(f, a, b, panels, order)
    while panels < max_panels:
        panels *= 2
        cur = _gl_fixed(f, a, b, panels, order)
        if abs(cur - prev) <= rel_tol * abs(cur) + 1e-300:
            return cur
        prev = cur
    raise QuadratureError(
        f"quadrature did not converge to rel_tol={rel_tol} within {max_panels} panels"
    )


def integrate_sqrt_singular(
    f: Callable,
    a: float,
    b: float,
    singular_end: str = "none",
    rel_tol: float = 1e-9,
) -> float:
    """Integrate ``f`` over ``[a, b]`` with square-root endpoint handling.

    ``singular_end`` may be ``"left"``, ``"right"``, or ``"none"``.  A
    singular end means ``f`` behaves like ``C * sqrt(x - a)`` (or
    ``sqrt(b - x)``) there; the substitution ``x = a + u**2`` removes the
    root so that plain Gauss panels converge at full order.  ``f`` is
    called with arrays of sample points.

    Returns the integral to the requested relative tolerance, raising
    ``QuadratureError`` on non-finite samples or non-convergence.
    """
    if not (math.isfinite(a) and math.isfinite(b)) or a >= b:
        raise ValueError("need finite a < b")
    if singular_end not in ("none", "left", "right"):
        raise ValueError("singular_end must be 'none', 'left', or 'right'")
    if singular_end == "none":
        return _gl_adaptive(f, a, b, rel_tol)
    span = b - a
    if singular_end == "left":
        g = lambda u: 2.0 * u * np.asarray(f(a + u * u), dtype=float)
    else:
        g = lambda u: 2.0 * u * np.asarray(f(b - u * u), dtype=float)
    return _gl_adaptive(g, 0.0, math.sqrt(span), rel_tol)


@dataclass(frozen=True)
class PowerLawFit:
    """Least-squares fit of ``y = exp(log_intercept) * x**exponent``."""

    exponent: float
    log_intercept: float
    r_squared: float
    index_window: tuple[int, int]
    value_window: tuple[float, float]
    n_points: int

    def evaluate(self, x):
        return np.exp(self.log_intercept) * np.asarray(x, dtype=float) ** self.exponent


def fit_power_law(
    points: Sequence[tuple[float, float]],
    window: tuple[int, int] | None = None,
) -> PowerLawFit:
    """Fit a power law through ``(x, y)`` pairs on log-log axes.

    ``window`` restricts the fit to the half-open index range
    ``[window[0], window[1])`` of the supplied sequence.  All used points
    must have positive coordinates and there must be at least five of them.
    """
    pts = np.asarray(list(points), dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ValueError("points must be a sequence of (x, y) pairs")
    if window is None:
        i0, i1 = 0, pts.shape[0]
    else:
        i0, i1 = int(window[0]), int(window[1])
        if not (0 <= i0 < i1 <= pts.shape[0]):
            raise ValueError("window out of range")
    used = pts[i0:i1]
    if used.shape[0] < 5:
        raise ValueError("need at least five points to fit")
    if np.any(used <= 0.0) or not np.all(np.isfinite(used)):
        raise ValueError("power-law fit needs positive finite points")
    lx = np.log(used[:, 0])
    ly = np.log(used[:, 1])
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_res = float(np.dot(resid, resid))
    ss_tot = float(np.dot(ly - ly.mean(), ly - ly.mean()))
    if ss_tot <= 1e-30:
        r_squared = 1.0 if ss_res <= 1e-24 else 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return PowerLawFit(
        exponent=float(slope),
        log_intercept=float(intercept),
        r_squared=r_squared,
        index_window=(i0, i1),
        value_window=(float(used[:, 0].min()), float(used[:, 0].max())),
        n_points=int(used.shape[0]),
    )
