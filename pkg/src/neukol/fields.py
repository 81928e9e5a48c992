"""Finite differences for grid fields.

Fields are ndarrays on a tensor node lattice, NaN outside the active region.
All stencils are centered second-order where neighbours exist; near masked
edges they fall back to one-sided stencils (second-order when enough points
are available, first-order otherwise).
"""
from __future__ import annotations

import numpy as np


def _shift(F: np.ndarray, k: int, steps: int) -> np.ndarray:
    """Shift along axis k, padding with NaN (no wrap-around)."""
    out = np.full_like(F, np.nan)
    src = [slice(None)] * F.ndim
    dst = [slice(None)] * F.ndim
    if steps > 0:
        src[k] = slice(steps, None)
        dst[k] = slice(None, -steps)
    elif steps < 0:
        src[k] = slice(None, steps)
        dst[k] = slice(-steps, None)
    else:
        return F.copy()
    out[tuple(dst)] = F[tuple(src)]
    return out


def grad_axis(F: np.ndarray, k: int, h: float) -> np.ndarray:
    """First derivative along axis k."""
    p1, m1 = _shift(F, k, 1), _shift(F, k, -1)
    p2, m2 = _shift(F, k, 2), _shift(F, k, -2)
    centered = (p1 - m1) / (2 * h)
    fwd2 = (-3 * F + 4 * p1 - p2) / (2 * h)
    bwd2 = (3 * F - 4 * m1 + m2) / (2 * h)
    fwd1 = (p1 - F) / h
    bwd1 = (F - m1) / h
    out = centered
    for cand in (fwd2, bwd2, fwd1, bwd1):
        out = np.where(np.isnan(out), cand, out)
    out[np.isnan(F)] = np.nan
    return out


def second_axis(F: np.ndarray, k: int, h: float) -> np.ndarray:
    """Pure second derivative along axis k."""
    p1, m1 = _shift(F, k, 1), _shift(F, k, -1)
    p2, m2 = _shift(F, k, 2), _shift(F, k, -2)
    p3, m3 = _shift(F, k, 3), _shift(F, k, -3)
    centered = (p1 - 2 * F + m1) / h**2
    fwd2 = (2 * F - 5 * p1 + 4 * p2 - p3) / h**2
    bwd2 = (2 * F - 5 * m1 + 4 * m2 - m3) / h**2
    fwd1 = (F - 2 * p1 + p2) / h**2
    bwd1 = (F - 2 * m1 + m2) / h**2
    out = centered
    for cand in (fwd2, bwd2, fwd1, bwd1):
        out = np.where(np.isnan(out), cand, out)
    out[np.isnan(F)] = np.nan
    return out


def gradient(F: np.ndarray, hs) -> list[np.ndarray]:
    return [grad_axis(F, k, float(hs[k])) for k in range(F.ndim)]


def hessian(F: np.ndarray, hs) -> list[list[np.ndarray]]:
    """Full Hessian; one stencil per pair, so D_ij == D_ji exactly."""
    n = F.ndim
    DU = gradient(F, hs)
    H: list[list[np.ndarray]] = [[None] * n for _ in range(n)]
    for i in range(n):
        H[i][i] = second_axis(F, i, float(hs[i]))
        for j in range(i + 1, n):
            mixed = grad_axis(DU[i], j, float(hs[j]))
            H[i][j] = mixed
            H[j][i] = mixed
    return H
