"""Non-smoothness probe: windowed spectral functional and its scaling.

The probe pairs the spectral window with modulated bump overlaps,

    G(tau, j, k) = sum_l khat(lam_l - tau) (phi_j, f_l) (psi_k, conj f_l),

evaluated along the resonant sequence tau = lam_l, j = k = sqrt(lam_l).
The boundary amplitude prediction makes |G| decay no faster than
lam^(-1/(2c)), the quantitative obstruction to C^1 smoothing.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import TruncationError
from .specfun import PowerLawFit, fit_power_law
from .wkb import allowed_interval, extract_C_lambda, rephased_amplitude

__all__ = [
    "TestFunction",
    "WindowSpec",
    "ProbePoint",
    "ProbeSequence",
    "make_bump",
    "window_hat",
    "overlap",
    "predicted_overlap",
    "probe_G",
    "isolation_check",
    "probe_sequence",
    "probe_rows",
    "export_probe_csv",
    "PROBE_CSV_HEADER",
]

BUMP_UNIT_MASS = 0.4439938161680794


@dataclass(frozen=True)
class TestFunction:
    """Non-negative smooth bump sampled on an eigenfunction grid."""

    center: float
    halfwidth: float
    support: tuple[float, float]
    samples: np.ndarray
    mass: float

    def __post_init__(self):
        if self.mass <= 0.0:
            raise ValueError("bump mass must be positive")


@dataclass(frozen=True)
class WindowSpec:
    """Gaussian spectral window ``khat(mu) = exp(-(sigma mu)^2)``."""

    sigma: float = 1.0

    def __post_init__(self):
        if not (self.sigma > 0.0 and math.isfinite(self.sigma)):
            raise ValueError("sigma must be positive and finite")

    @property
    def hat_at_zero(self) -> float:
        return 1.0


def window_hat(spec: WindowSpec, mu) -> float:
    """Window transform at offset ``mu``; even and rapidly decaying."""
    arg = np.asarray(spec.sigma * mu, dtype=float)
    out = np.exp(-(arg * arg))
    if np.ndim(mu) == 0:
        return float(out)
    return out


def make_bump(center: float, halfwidth: float, grid) -> TestFunction:
    """Bump ``exp(-1/(1-u^2))`` on ``|u| < 1``, ``u = (r-center)/halfwidth``.

    Sampled on the grid; mass is the Simpson integral of the samples.
    """
    if halfwidth <= 0.0:
        raise ValueError("halfwidth must be positive")
    lo, hi = center - halfwidth, center + halfwidth
    if lo <= 0.0:
        raise ValueError("bump support must stay a positive distance from 0")
    if lo < grid.r_min or hi > grid.r_max:
        raise ValueError("bump support falls off the grid")
    u = (grid.r - center) / halfwidth
    samples = np.zeros(grid.n_points)
    inside = np.abs(u) < 1.0
    samples[inside] = np.exp(-1.0 / (1.0 - u[inside] ** 2))
    mass = float(grid.simpson_weights @ samples)
    return TestFunction(
        center=center,
        halfwidth=halfwidth,
        support=(lo, hi),
        samples=samples,
        mass=mass,
    )


def overlap(tf: TestFunction, phase: float, pair, grid) -> complex:
    """Modulated pairing ``int exp(i r phase) tf(r) f(r) dr`` by Simpson."""
    if tf.samples.shape != pair.samples.shape:
        raise ValueError("test function and eigenpair live on different grids")
    integrand = tf.samples * pair.samples * np.exp(1j * phase * grid.r)
    return complex(grid.simpson_weights @ integrand)


def predicted_overlap(c_lambda: complex, lam: float, mass: float) -> complex:
    """Leading-order resonant overlap ``conj(C) mass / (2 lam^(1/4))``.

    ``c_lambda`` must carry the plane-wave phase convention, i.e. the
    rephased boundary amplitude.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    return complex(np.conj(c_lambda)) * mass / (2.0 * lam**0.25)


def _check_support_allowed(tf: TestFunction, channel, model, lam: float) -> None:
    a, b = allowed_interval(channel, model, lam)
    lo, hi = tf.support
    if not (a <= lo and hi <= b):
        raise ValueError(
            f"bump support [{lo}, {hi}] leaves the allowed region "
            f"({a:.4f}, {b:.4f}) at lam={lam:.4f}"
        )


def probe_G(
    table,
    tau: float,
    j: float,
    k: float,
    window: WindowSpec,
    phi: TestFunction,
    psi: TestFunction,
) -> complex:
    """Windowed functional ``sum_l khat(lam_l - tau) (phi_j, f_l)(psi_-k, f_l)``.

    Requires the table to extend far enough that the truncated tail is
    below 1e-14 in window weight.
    """
    lams = table.eigenvalues
    tail = window_hat(window, float(lams[-1]) - tau)
    if tail >= 1e-14:
        raise TruncationError(
            f"spectrum truncated too early for tau={tau:.6g}: "
            f"last window weight {tail:.3e}",
            tail_bound=float(tail),
        )
    total = 0.0 + 0.0j
    for pair in table.eigenpairs:
        weight = window_hat(window, pair.lam - tau)
        if weight == 0.0:
            continue
        total += (
            weight
            * overlap(phi, j, pair, table.grid)
            * overlap(psi, -k, pair, table.grid)
        )
    return total


def isolation_check(table, level: int, window: WindowSpec) -> float:
    """Sum of window weights at all other levels: ``sum_{l' != l} khat``."""
    lams = table.eigenvalues
    lam = lams[level]
    others = np.delete(lams, level)
    return float(np.sum(window_hat(window, others - lam)))


class ProbePoint(NamedTuple):
    level: int
    tau: float
    j: float
    k: float
    G: complex
    predicted_magnitude: float
    isolation: float


class ProbeSequence(NamedTuple):
    points: list
    fit: PowerLawFit
    lower_bound_const: float


def probe_sequence(
    table,
    phi: TestFunction,
    psi: TestFunction,
    window: WindowSpec,
    l_range: tuple[int, int],
) -> ProbeSequence:
    """Resonant probe along ``tau = lam_l``, ``j = k = sqrt(lam_l)``.

    Returns the per-level points, the log-log fit of |G| against lam,
    and the smallest rescaled magnitude ``|G| (1 + tau + j + k)^(1/2c)``.
    """
    lo, hi = l_range
    if not (0 <= lo < hi < len(table.eigenpairs)):
        raise ValueError("l_range outside the solved spectrum")
    if hi - lo + 1 < 10:
        raise ValueError("need at least ten probe points")
    channel, model = table.channel, table.model
    _check_support_allowed(phi, channel, model, float(table.eigenvalues[lo]))
    _check_support_allowed(psi, channel, model, float(table.eigenvalues[lo]))

    inv_two_c = 1.0 / (2.0 * model.growth_index)
    points = []
    fit_data = []
    lower = math.inf
    for level in range(lo, hi + 1):
        pair = table.pair(level)
        lam = pair.lam
        root = math.sqrt(lam)
        g = probe_G(table, lam, root, root, window, phi, psi)
        c_re = rephased_amplitude(extract_C_lambda(pair, channel, model), lam)
        predicted = abs(c_re) ** 2 * phi.mass * psi.mass / (4.0 * root)
        iso = isolation_check(table, level, window)
        points.append(
            ProbePoint(
                level=level,
                tau=lam,
                j=root,
                k=root,
                G=g,
                predicted_magnitude=predicted,
                isolation=iso,
            )
        )
        fit_data.append((lam, abs(g)))
        lower = min(lower, abs(g) * (1.0 + lam + 2.0 * root) ** inv_two_c)
    return ProbeSequence(
        points=points, fit=fit_power_law(fit_data), lower_bound_const=lower
    )


PROBE_CSV_HEADER = [
    "n",
    "l",
    "lambda",
    "tau",
    "j",
    "k",
    "reG",
    "imG",
    "absG",
    "predicted_abs",
    "isolation",
]


def probe_rows(table, sequence: ProbeSequence) -> list:
    """CSV rows for one channel's probe sequence, already formatted."""
    from .formats import fmt

    rows = []
    for p in sequence.points:
        rows.append(
            [
                str(table.channel.n),
                str(p.level),
                fmt(p.tau),
                fmt(p.tau),
                fmt(p.j),
                fmt(p.k),
                fmt(p.G.real),
                fmt(p.G.imag),
                fmt(abs(p.G)),
                fmt(p.predicted_magnitude),
                fmt(p.isolation),
            ]
        )
    return rows


def export_probe_csv(table, sequence: ProbeSequence, path):
    from .formats import write_csv

    return write_csv(path, PROBE_CSV_HEADER, probe_rows(table, sequence))
