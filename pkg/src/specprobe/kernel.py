"""Truncated channel kernels of the propagator and sphere combinatorics.

The level-L channel kernel is

    K(t, r, s) = sum_{l <= L} exp(-i lam_l t) f_l(r) f_l(s),

with real normalized eigenfunctions.  The full radial kernel carries the
additional weight (r s)^(-(d-1)/2), exported alongside the raw values.
"""

from __future__ import annotations

import math
from typing import Sequence

import numpy as np

__all__ = [
    "sphere_dim",
    "channel_kernel",
    "kernel_matrix",
    "gram_matrix",
    "parseval_check",
    "export_kernel_grid",
]


def sphere_dim(d: int, n: int) -> int:
    """Dimension of the degree-``n`` spherical harmonic space on S^(d-1)."""
    if d < 3:
        raise ValueError("d must be at least 3")
    if n < 0:
        raise ValueError("n must be non-negative")
    return math.comb(d + n - 1, d - 1) - math.comb(d + n - 3, d - 1)


def _check_level(table, level_cap: int) -> int:
    if not (0 <= level_cap < len(table.eigenpairs)):
        raise ValueError(
            f"truncation level {level_cap} outside the solved range "
            f"0..{len(table.eigenpairs) - 1}"
        )
    return level_cap


def channel_kernel(table, t: float, r: float, s: float, level_cap: int) -> complex:
    """Truncated kernel value at one (t, r, s); ``r`` and ``s`` grid radii."""
    _check_level(table, level_cap)
    i = table.grid.index_of(r)
    j = table.grid.index_of(s)
    total = 0.0 + 0.0j
    for pair in table.eigenpairs[: level_cap + 1]:
        total += np.exp(-1j * pair.lam * t) * pair.samples[i] * pair.samples[j]
    return complex(total)


def kernel_matrix(table, t: float, radii: Sequence[float], level_cap: int) -> np.ndarray:
    """Kernel matrix over a set of grid radii at one time."""
    _check_level(table, level_cap)
    idx = [table.grid.index_of(r) for r in radii]
    f = np.stack([pair.samples[idx] for pair in table.eigenpairs[: level_cap + 1]])
    lams = np.array([pair.lam for pair in table.eigenpairs[: level_cap + 1]])
    phases = np.exp(-1j * lams * t)
    return (f.T * phases) @ f


def gram_matrix(table, level_cap: int) -> np.ndarray:
    """Simpson-weighted Gram matrix of the first ``level_cap + 1`` levels."""
    _check_level(table, level_cap)
    f = np.stack([pair.samples for pair in table.eigenpairs[: level_cap + 1]])
    return (f * table.grid.simpson_weights) @ f.T


def parseval_check(table, level_cap: int) -> float:
    """Double integral of |K(0,r,s)|^2; equals L+1 for orthonormal levels."""
    g = gram_matrix(table, level_cap)
    return float(np.sum(g * g))


def export_kernel_grid(
    table,
    ts: Sequence[float],
    rs: Sequence[float],
    ss: Sequence[float],
    level_cap: int,
    path,
):
    """CSV of kernel values on a (t, r, s) product grid, t-major order."""
    from .formats import fmt, write_csv

    if len(ts) == 0 or len(rs) == 0 or len(ss) == 0:
        raise ValueError("kernel export needs nonempty t, r, s grids")
    _check_level(table, level_cap)
    d = table.channel.d
    idx_r = [table.grid.index_of(r) for r in rs]
    idx_s = [table.grid.index_of(s) for s in ss]
    f = np.stack([pair.samples for pair in table.eigenpairs[: level_cap + 1]])
    lams = np.array([pair.lam for pair in table.eigenpairs[: level_cap + 1]])

    header = ["t", "r", "s", "reK", "imK", "weighted_reK", "weighted_imK"]
    rows = []
    for t in ts:
        phases = np.exp(-1j * lams * float(t))
        for r, i in zip(rs, idx_r):
            row_f = f[:, i]
            for s, j in zip(ss, idx_s):
                value = complex(np.sum(phases * row_f * f[:, j]))
                weight = (float(r) * float(s)) ** (-(d - 1) / 2.0)
                weighted = weight * value
                rows.append(
                    [
                        fmt(t),
                        fmt(r),
                        fmt(s),
                        fmt(value.real),
                        fmt(value.imag),
                        fmt(weighted.real),
                        fmt(weighted.imag),
                    ]
                )
    return write_csv(path, header, rows)
