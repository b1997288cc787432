"""Shooting eigensolver for the half-line radial operators.

The discrete problem is the standard fourth-order three-term recurrence.
Integration starts outward from a small-radius seed built from the regular
free solution ``sqrt(r) J_nu(r sqrt(lam))``, inward from a decaying seed at
the far boundary, and the two branches are matched at the outer turning
point through their logarithmic derivatives.  Eigenvalues are isolated by
the node count of the outward sweep (which jumps at each eigenvalue) and
polished by a safeguarded secant iteration on the mismatch.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import NamedTuple, Sequence

import numpy as np

from .errors import BracketError, ConsistencyError
from .potential import Channel, PotentialModel, effective_potential
from .specfun import integrate_sqrt_singular
from .wkb import inverse_action, level_density, quantization_target, turning_points

__all__ = [
    "RadialGrid",
    "EigenPair",
    "SpectrumTable",
    "ShootResult",
    "build_grid",
    "boundary_series_small_r",
    "small_r_coefficient",
    "shoot_mismatch",
    "solve_level",
    "solve_spectrum",
    "ode_residual",
    "save_spectrum",
    "load_spectrum",
    "export_spectrum_csv",
]

SPECTRUM_FORMAT_VERSION = 1

DEFAULT_POINTS_PER_WAVELENGTH = 250.0
DEFAULT_DECAY_MARGIN = 35.0
DEFAULT_MIN_POINTS = 1000
DEFAULT_REL_TOL = 1e-10


@dataclass(frozen=True)
class RadialGrid:
    """Uniform radial grid ``r_i = r_min + i h`` with ``r = 1`` on a node."""

    r_min: float
    r_max: float
    h: float
    n_points: int

    def __post_init__(self):
        if self.n_points < 9:
            raise ValueError("grid needs at least nine points")
        if not (0.0 < self.r_min < self.r_max) or self.h <= 0.0:
            raise ValueError("need 0 < r_min < r_max and h > 0")
        span = self.r_min + (self.n_points - 1) * self.h
        if abs(span - self.r_max) > 1e-9 * self.r_max:
            raise ValueError("r_max inconsistent with r_min + (n-1) h")
        if self.n_points % 2 == 0:
            raise ValueError("need an odd point count for the composite rule")

    @cached_property
    def r(self) -> np.ndarray:
        return self.r_min + self.h * np.arange(self.n_points)

    @cached_property
    def simpson_weights(self) -> np.ndarray:
        w = np.full(self.n_points, 2.0)
        w[1::2] = 4.0
        w[0] = w[-1] = 1.0
        return w * (self.h / 3.0)

    def index_of(self, value: float) -> int:
        i = int(round((value - self.r_min) / self.h))
        if not (0 <= i < self.n_points):
            raise ValueError(f"radius {value} outside the grid")
        if abs(self.r_min + i * self.h - value) > 1e-6 * self.h:
            raise ValueError(f"radius {value} does not sit on a grid node")
        return i


def build_grid(
    channel: Channel,
    model: PotentialModel,
    lam_max: float,
    points_per_wavelength: float = DEFAULT_POINTS_PER_WAVELENGTH,
    decay_margin: float = DEFAULT_DECAY_MARGIN,
    min_points: int = DEFAULT_MIN_POINTS,
) -> RadialGrid:
    """Grid adequate for all spectral parameters up to ``lam_max``.

    The step resolves the shortest local wavelength with at least the
    requested number of points (never fewer than 40), ``r = 1`` falls on a
    node exactly, the point count is odd and at least ``min_points``, and
    the far boundary carries at least ``decay_margin`` units of decay
    beyond the outer turning point.
    """
    if points_per_wavelength < 40.0:
        raise ValueError("points_per_wavelength must be at least 40")
    if decay_margin < 5.0:
        raise ValueError("decay_margin must be at least 5")
    big_t = turning_points(channel, model, lam_max).T  # validates lam_max

    kernel = lambda r: np.sqrt(
        np.maximum(effective_potential(channel, model, np.asarray(r)) - lam_max, 0.0)
    )
    lo, hi = big_t, big_t * 1.05 + 0.5
    acc = integrate_sqrt_singular(kernel, lo, hi, "left", rel_tol=1e-8)
    while acc < decay_margin:
        lo, hi = hi, hi * 1.2
        acc += integrate_sqrt_singular(kernel, lo, hi, "none", rel_tol=1e-8)
    r_far = hi

    r_min = min(1e-3, 0.1 * lam_max**-0.25)
    h_wave = 2.0 * math.pi / (points_per_wavelength * math.sqrt(lam_max))
    h_count = (r_far - r_min) / float(min_points)
    h_cap = min(h_wave, h_count)
    k = math.ceil((1.0 - r_min) / h_cap)
    h = (1.0 - r_min) / k
    n_int = math.ceil((r_far - r_min) / h)
    if n_int % 2 == 1:
        n_int += 1
    return RadialGrid(
        r_min=r_min, r_max=r_min + n_int * h, h=h, n_points=n_int + 1
    )


def small_r_coefficient(channel: Channel, lam: float) -> float:
    """Leading coefficient of the regular solution: ``(sqrt(lam)/2)^nu / nu!``."""
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    nu = channel.bessel_order
    return math.exp(nu * math.log(0.5 * math.sqrt(lam)) - math.lgamma(nu + 1.0))


def boundary_series_small_r(channel: Channel, lam: float, r):
    """Regular free solution ``sqrt(r) J_nu(r sqrt(lam))`` near the origin.

    Behaves like ``small_r_coefficient * r**(n + (d-1)/2)`` as ``r`` tends
    to zero.
    """
    if lam <= 0.0:
        raise ValueError("lam must be positive")
    arr = np.asarray(r, dtype=float)
    if np.any(arr <= 0.0):
        raise ValueError("radii must be positive")
    from .specfun import bessel_j

    out = np.sqrt(arr) * bessel_j(channel.bessel_order, arr * math.sqrt(lam))
    if np.ndim(r) == 0:
        return float(out)
    return out


class ShootResult(NamedTuple):
    mismatch: float
    node_count: int


class _Sweep(NamedTuple):
    ys_out: list
    ys_in: list
    i0: int
    m: int
    nodes: int
    mismatch: float


def _potential_samples(channel: Channel, model: PotentialModel, grid: RadialGrid):
    return effective_potential(channel, model, grid.r)


def _match_index(grid: RadialGrid, channel, model, lam: float, i0: int) -> int:
    big_t = turning_points(channel, model, lam).T
    if big_t >= grid.r_max - 6.0 * grid.h:
        raise ValueError(
            f"turning point {big_t:.3f} too close to the grid end; "
            "the grid does not cover this spectral parameter"
        )
    m = int(round((big_t - grid.r_min) / grid.h))
    return min(max(m, i0 + 3), grid.n_points - 5)


def _sweep(channel, model, lam, grid, u, m) -> _Sweep:
    h = grid.h
    n = grid.n_points
    w = 1.0 + (h * h / 12.0) * (lam - u)
    wl = w.tolist()

    # start the outward recurrence where the weights are safely positive;
    # below that the samples follow the regular free solution exactly
    i0 = 0
    if wl[0] < 0.75:
        i0 = int(np.argmax(w >= 0.75))
        if wl[i0] < 0.75:
            raise ConsistencyError("no safe start index; grid step too coarse")
    if i0 > m - 3:
        raise ValueError("safe start index reaches the matching point")

    seeds = boundary_series_small_r(
        channel, lam, np.array([grid.r_min + i0 * h, grid.r_min + (i0 + 1) * h])
    )
    scale = max(abs(seeds[0]), abs(seeds[1]))
    if scale == 0.0 or not np.isfinite(scale):
        raise ConsistencyError("degenerate outward seed")

    ys_out = [0.0] * n
    y0 = seeds[0] / scale
    y1 = seeds[1] / scale
    ys_out[i0] = y0
    ys_out[i0 + 1] = y1
    nodes = 0
    for i in range(i0 + 1, n - 1):
        y2 = ((12.0 - 10.0 * wl[i]) * y1 - wl[i - 1] * y0) / wl[i + 1]
        ys_out[i + 1] = y2
        if y1 * y2 < 0.0:
            nodes += 1
        y0, y1 = y1, y2
    if not (math.isfinite(y1) and math.isfinite(y0)):
        raise ConsistencyError(
            "outward sweep overflowed; increase decay margin headroom"
        )

    theta = h * 0.5 * (
        math.sqrt(max(u[n - 2] - lam, 0.0)) + math.sqrt(max(u[n - 1] - lam, 0.0))
    )
    ys_in = [0.0] * n
    ys_in[n - 1] = math.exp(-theta)
    ys_in[n - 2] = 1.0
    z1 = ys_in[n - 1]
    z0 = ys_in[n - 2]
    for i in range(n - 2, m - 2, -1):
        zm = ((12.0 - 10.0 * wl[i]) * z0 - wl[i + 1] * z1) / wl[i - 1]
        ys_in[i - 1] = zm
        z1, z0 = z0, zm
    if not math.isfinite(z0):
        raise ConsistencyError("inward sweep overflowed")

    o_m, o_c, o_p = ys_out[m - 1], ys_out[m], ys_out[m + 1]
    i_m, i_c, i_p = ys_in[m - 1], ys_in[m], ys_in[m + 1]
    if o_c == 0.0 or i_c == 0.0:
        raise ConsistencyError("matching point sits on a node; cannot form mismatch")
    mismatch = (o_p - o_m) / (2.0 * h * o_c) - (i_p - i_m) / (2.0 * h * i_c)
    return _Sweep(ys_out=ys_out, ys_in=ys_in, i0=i0, m=m, nodes=nodes, mismatch=mismatch)


def shoot_mismatch(
    channel: Channel, model: PotentialModel, lam: float, grid: RadialGrid
) -> ShootResult:
    """Log-derivative mismatch at the outer turning point and node count.

    The node count includes the sign flip of the divergent tail, so it
    equals the number of eigenvalues below ``lam`` except on a vanishing
    neighbourhood of each eigenvalue.
    """
    if not (math.isfinite(lam) and lam > 0.0):
        raise ValueError("lam must be positive and finite")
    u = _potential_samples(channel, model, grid)
    m = _match_index(grid, channel, model, lam, 0)
    sweep = _sweep(channel, model, lam, grid, u, m)
    return ShootResult(mismatch=sweep.mismatch, node_count=sweep.nodes)


def _assemble(channel, model, lam, grid, u) -> "EigenPair":
    m = _match_index(grid, channel, model, lam, 0)
    sweep = _sweep(channel, model, lam, grid, u, m)
    n = grid.n_points
    f = np.empty(n)
    f[sweep.i0 : m + 1] = sweep.ys_out[sweep.i0 : m + 1]
    scale = sweep.ys_out[m] / sweep.ys_in[m]
    f[m + 1 :] = np.asarray(sweep.ys_in[m + 1 :]) * scale

    if sweep.i0 > 0:
        # extend below the safe start with the regular free solution,
        # scaled to match the seed continuation
        rs = grid.r[: sweep.i0]
        free = boundary_series_small_r(channel, lam, rs)
        anchor = boundary_series_small_r(channel, lam, float(grid.r[sweep.i0]))
        f[: sweep.i0] = free * (f[sweep.i0] / anchor)

    interior = f[sweep.i0 : m]
    first = interior[np.nonzero(interior)[0][0]]
    if first < 0.0:
        f = -f
    norm_sq = float(np.dot(grid.simpson_weights, f * f))
    if norm_sq <= 0.0 or not math.isfinite(norm_sq):
        raise ConsistencyError("assembled eigenfunction has a bad norm")
    f /= math.sqrt(norm_sq)

    nodes = int(np.count_nonzero(f[sweep.i0 : m] * f[sweep.i0 + 1 : m + 1] < 0.0))

    k1 = grid.index_of(1.0)
    h = grid.h
    fp1 = (f[k1 - 2] - 8.0 * f[k1 - 1] + 8.0 * f[k1 + 1] - f[k1 + 2]) / (12.0 * h)
    norm_check = float(np.dot(grid.simpson_weights, f * f))
    return EigenPair(
        level=nodes,
        lam=lam,
        samples=f,
        node_count=nodes,
        f_at_1=float(f[k1]),
        fprime_at_1=float(fp1),
        norm_check=norm_check,
    )


@dataclass(frozen=True)
class EigenPair:
    """One normalized eigenfunction with its spectral parameter."""

    level: int
    lam: float
    samples: np.ndarray
    node_count: int
    f_at_1: float
    fprime_at_1: float
    norm_check: float


@dataclass(frozen=True)
class SpectrumTable:
    """Consecutive eigenpairs of one channel on a shared grid."""

    channel: Channel
    model: PotentialModel
    grid: RadialGrid
    eigenpairs: tuple[EigenPair, ...]
    tolerances: dict

    @property
    def eigenvalues(self) -> np.ndarray:
        return np.array([p.lam for p in self.eigenpairs])

    def pair(self, level: int) -> EigenPair:
        p = self.eigenpairs[level]
        if p.level != level:
            raise ValueError("table levels are not consecutive")
        return p


def _count_nodes(channel, model, lam, grid, u) -> int:
    m = _match_index(grid, channel, model, lam, 0)
    return _sweep(channel, model, lam, grid, u, m).nodes


def solve_level(
    channel: Channel,
    model: PotentialModel,
    level: int,
    grid: RadialGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    points_per_wavelength: float = DEFAULT_POINTS_PER_WAVELENGTH,
    decay_margin: float = DEFAULT_DECAY_MARGIN,
) -> EigenPair:
    """Eigenpair with exactly ``level`` interior nodes.

    Brackets the eigenvalue by the node count of the shooting sweep, then
    refines the log-derivative mismatch to relative tolerance ``rel_tol``.
    """
    if level < 0:
        raise ValueError("level must be non-negative")
    if grid is None:
        lam_top = inverse_action(model, quantization_target(channel, level) + 2.0)
        grid = build_grid(
            channel,
            model,
            1.1 * lam_top,
            points_per_wavelength=points_per_wavelength,
            decay_margin=decay_margin,
        )
    u = _potential_samples(channel, model, grid)
    lam = _refine_level(channel, model, level, grid, u, rel_tol)
    pair = _assemble(channel, model, lam, grid, u)
    if pair.node_count != level:
        raise ConsistencyError(
            f"converged eigenfunction has {pair.node_count} nodes, wanted {level}"
        )
    return pair


def _refine_level(channel, model, level, grid, u, rel_tol) -> float:
    target = quantization_target(channel, level)
    lam_c = inverse_action(model, target)
    gap = 1.0 / level_density(model, lam_c)

    lo = lam_c - 0.75 * gap
    hi = lam_c + 0.75 * gap
    floor = float(np.min(u)) * (1.0 + 1e-12) + 1e-12
    for _ in range(60):
        lo = max(lo, floor)
        if _count_nodes(channel, model, lo, grid, u) <= level:
            break
        if lo <= floor:
            raise BracketError(f"no lower bracket for level {level}")
        lo -= gap
    else:
        raise BracketError(f"no lower bracket for level {level}")
    for _ in range(60):
        if _count_nodes(channel, model, hi, grid, u) > level:
            break
        hi += gap
    else:
        raise BracketError(f"no upper bracket for level {level}")

    while hi - lo > 0.02 * gap:
        mid = 0.5 * (lo + hi)
        if _count_nodes(channel, model, mid, grid, u) <= level:
            lo = mid
        else:
            hi = mid

    def mismatch_at(lam):
        m = _match_index(grid, channel, model, lam, 0)
        return _sweep(channel, model, lam, grid, u, m).mismatch

    a, b = lo, hi
    ga, gb = mismatch_at(a), mismatch_at(b)
    if not (ga > 0.0 > gb or ga < 0.0 < gb):
        # no sign change visible (node sitting near the match point);
        # fall back to node-count bisection, which still pins the jump
        while b - a > rel_tol * max(1.0, abs(b)):
            mid = 0.5 * (a + b)
            if _count_nodes(channel, model, mid, grid, u) <= level:
                a = mid
            else:
                b = mid
        return 0.5 * (a + b)

    x0, g0 = a, ga
    x1, g1 = b, gb
    for _ in range(90):
        if g1 == g0:
            x2 = 0.5 * (a + b)
        else:
            x2 = x1 - g1 * (x1 - x0) / (g1 - g0)
            if not (a < x2 < b):
                x2 = 0.5 * (a + b)
        g2 = mismatch_at(x2)
        if (g2 > 0.0) == (ga > 0.0):
            a = x2
        else:
            b = x2
        x0, g0 = x1, g1
        x1, g1 = x2, g2
        if abs(b - a) <= rel_tol * max(1.0, abs(x2)) or g2 == 0.0:
            return x2
    raise ConsistencyError(f"mismatch refinement stalled for level {level}")


def solve_spectrum(
    channel: Channel,
    model: PotentialModel,
    l_max: int,
    grid: RadialGrid | None = None,
    rel_tol: float = DEFAULT_REL_TOL,
    points_per_wavelength: float = DEFAULT_POINTS_PER_WAVELENGTH,
    decay_margin: float = DEFAULT_DECAY_MARGIN,
) -> SpectrumTable:
    """All eigenpairs of levels ``0 .. l_max`` on one shared grid."""
    if l_max < 0:
        raise ValueError("l_max must be non-negative")
    if grid is None:
        lam_top = inverse_action(model, quantization_target(channel, l_max) + 2.0)
        grid = build_grid(
            channel,
            model,
            1.1 * lam_top,
            points_per_wavelength=points_per_wavelength,
            decay_margin=decay_margin,
        )
    u = _potential_samples(channel, model, grid)
    pairs = []
    prev = -math.inf
    for level in range(l_max + 1):
        lam = _refine_level(channel, model, level, grid, u, rel_tol)
        pair = _assemble(channel, model, lam, grid, u)
        if pair.node_count != level:
            raise ConsistencyError(
                f"level {level}: converged node count {pair.node_count}"
            )
        if lam <= prev:
            raise ConsistencyError(f"level {level}: eigenvalues not increasing")
        prev = lam
        pairs.append(pair)
    return SpectrumTable(
        channel=channel,
        model=model,
        grid=grid,
        eigenpairs=tuple(pairs),
        tolerances={
            "rel_tol": rel_tol,
            "points_per_wavelength": points_per_wavelength,
            "decay_margin": decay_margin,
        },
    )


def ode_residual(
    pair: EigenPair,
    channel: Channel,
    model: PotentialModel,
    grid: RadialGrid,
    window: tuple[float, float] | None = None,
) -> float:
    """Relative strong-form residual of the eigen-equation on the grid.

    Uses fourth-order five-point second differences over the window
    (default: from twice the small-radius seed region to the far
    boundary, trimmed by two points at each end).
    """
    f = pair.samples
    n = grid.n_points
    h = grid.h
    i_lo, i_hi = 2, n - 2
    if window is not None:
        i_lo = max(i_lo, int(math.ceil((window[0] - grid.r_min) / h)))
        i_hi = min(i_hi, int(math.floor((window[1] - grid.r_min) / h)) + 1)
        if i_hi - i_lo < 3:
            raise ValueError("window contains too few interior grid points")
    idx = np.arange(i_lo, i_hi)
    d2 = (
        -f[idx - 2] + 16.0 * f[idx - 1] - 30.0 * f[idx] + 16.0 * f[idx + 1] - f[idx + 2]
    ) / (12.0 * h * h)
    u = effective_potential(channel, model, grid.r[idx])
    resid = -d2 + (u - pair.lam) * f[idx]
    return float(np.sqrt(np.dot(resid, resid) / np.dot(f[idx], f[idx])))


def save_spectrum(table: SpectrumTable, path) -> Path:
    """Persist a table as JSON metadata plus a binary sample sidecar."""
    path = Path(path)
    sidecar = path.with_suffix(".npy")
    samples = np.stack([p.samples for p in table.eigenpairs])
    np.save(sidecar, samples)
    doc = {
        "format_version": SPECTRUM_FORMAT_VERSION,
        "model": table.model.spec_string,
        "threshold_radius": table.model.threshold_radius,
        "harmonic": table.model.harmonic,
        "d": table.channel.d,
        "n": table.channel.n,
        "grid": {
            "r_min": table.grid.r_min,
            "r_max": table.grid.r_max,
            "h": table.grid.h,
            "n_points": table.grid.n_points,
        },
        "tolerances": table.tolerances,
        "samples_file": sidecar.name,
        "levels": [
            {
                "l": p.level,
                "lambda": p.lam,
                "nodes": p.node_count,
                "f_at_1": p.f_at_1,
                "fprime_at_1": p.fprime_at_1,
                "norm_check": p.norm_check,
            }
            for p in table.eigenpairs
        ],
    }
    path.write_text(json.dumps(doc, indent=1, sort_keys=True), encoding="ascii")
    return path


def load_spectrum(path) -> SpectrumTable:
    path = Path(path)
    doc = json.loads(path.read_text(encoding="ascii"))
    if doc.get("format_version") != SPECTRUM_FORMAT_VERSION:
        raise ValueError(
            f"unsupported spectrum format version {doc.get('format_version')}"
        )
    model = PotentialModel.from_spec(
        doc["model"],
        threshold_radius=doc["threshold_radius"],
        harmonic=doc["harmonic"],
    )
    channel = Channel(doc["d"], doc["n"])
    g = doc["grid"]
    grid = RadialGrid(g["r_min"], g["r_max"], g["h"], g["n_points"])
    samples = np.load(path.parent / doc["samples_file"])
    pairs = tuple(
        EigenPair(
            level=rec["l"],
            lam=rec["lambda"],
            samples=samples[i],
            node_count=rec["nodes"],
            f_at_1=rec["f_at_1"],
            fprime_at_1=rec["fprime_at_1"],
            norm_check=rec["norm_check"],
        )
        for i, rec in enumerate(doc["levels"])
    )
    return SpectrumTable(
        channel=channel,
        model=model,
        grid=grid,
        eigenpairs=pairs,
        tolerances=doc["tolerances"],
    )


def export_spectrum_csv(tables: Sequence[SpectrumTable], path) -> Path:
    from .formats import fmt, write_csv

    header = ["n", "l", "lambda", "nodes", "f_at_1", "fprime_at_1"]
    rows = []
    for table in sorted(tables, key=lambda t: t.channel.n):
        for p in table.eigenpairs:
            rows.append(
                [
                    str(table.channel.n),
                    str(p.level),
                    fmt(p.lam),
                    str(p.node_count),
                    fmt(p.f_at_1),
                    fmt(p.fprime_at_1),
                ]
            )
    return write_csv(path, header, rows)
