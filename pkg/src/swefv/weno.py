"""WENO reconstruction of point values from cell averages.

The 2D reconstruction is dimension-by-dimension: an x-direction sweep turns
cell averages into y-line averages at each x-offset, and a second sweep in y
turns those into point values. Each sweep is the classical fifth-order
weighted combination of three 3-cell substencils; the smoothness indicators
depend only on the data, so they are computed once per sweep and shared by
every evaluation offset.

Water height can dip negative at isolated evaluation points near dry areas
even when the cell average is nonnegative. `positivity_limit` shrinks the
height reconstruction toward its cell average, per cell, just enough to keep
every evaluation point above a tiny floor; the map is affine about the
average, so quadrature means are preserved.
"""

from dataclasses import dataclass, field

import numpy as np

from .weno_gen import ReconTable, standard_table

H_FLOOR_CAP = 1e-13


@dataclass(frozen=True)
class WenoParams:
    table: ReconTable = field(default_factory=standard_table)
    eps_w: float = 1e-6
    power: int = 2

    def __post_init__(self):
        if self.table.r != 3:
            raise ValueError("runtime reconstruction is wired for stencil radius 3")
        if np.any(self.table.d < 0):
            raise ValueError("nonlinear weighting requires nonnegative linear weights")


def smoothness_indicators(qm2, qm1, q0, qp1, qp2):
    """Jiang-Shu indicators for the three substencils, stacked on axis 0."""
    b0 = 13.0 / 12.0 * (q0 - 2.0 * qp1 + qp2) ** 2 + 0.25 * (3.0 * q0 - 4.0 * qp1 + qp2) ** 2
    b1 = 13.0 / 12.0 * (qm1 - 2.0 * q0 + qp1) ** 2 + 0.25 * (qm1 - qp1) ** 2
    b2 = 13.0 / 12.0 * (qm2 - 2.0 * qm1 + q0) ** 2 + 0.25 * (qm2 - 4.0 * qm1 + 3.0 * q0) ** 2
    return np.stack([b0, b1, b2])


def nonlinear_weights(beta, d, eps_w, power):
    """Normalized weights from indicators `beta` (3, ...) and linear weights d (3,)."""
    alpha = d.reshape((3,) + (1,) * (beta.ndim - 1)) / (eps_w + beta) ** power
    return alpha / alpha.sum(axis=0)


def sweep(a, params: WenoParams):
    """Reconstruct along the last axis of `a` at every table offset.

    Input shape (..., n); output shape (..., npoints, n - 4), covering the
    cells with a full 5-cell window (centers 2 .. n-3).
    """
    t = params.table
    qm2 = a[..., 0:-4]
    qm1 = a[..., 1:-3]
    q0 = a[..., 2:-2]
    qp1 = a[..., 3:-1]
    qp2 = a[..., 4:]
    beta = smoothness_indicators(qm2, qm1, q0, qp1, qp2)

    out = np.empty(a.shape[:-1] + (t.npoints, a.shape[-1] - 4))
    for p in range(t.npoints):
        w = nonlinear_weights(beta, t.d[p], params.eps_w, params.power)
        c = t.c_lo[p]
        v0 = c[0, 0] * q0 + c[0, 1] * qp1 + c[0, 2] * qp2
        v1 = c[1, 0] * qm1 + c[1, 1] * q0 + c[1, 2] * qp1
        v2 = c[2, 0] * qm2 + c[2, 1] * qm1 + c[2, 2] * q0
        out[..., p, :] = w[0] * v0 + w[1] * v1 + w[2] * v2
    return out


def reconstruct_1d(avgs, params: WenoParams):
    """Point values from a 1D array of cell averages; (npoints, n - 4)."""
    return sweep(np.asarray(avgs, dtype=float), params)


def reconstruct_field(U, params: WenoParams):
    """Tensor-point values for a padded 2D field.

    U has shape (nvar, nxt, nyt); the result R[v, px, py, i, j] is the value
    of variable v at offset (points[px], points[py]) from the center of the
    cell at padded index (i + 2, j + 2). With 3 ghost layers that covers the
    interior plus one ring, which is exactly what edge fluxes need.
    """
    nvar, nxt, nyt = U.shape
    # x sweep first, keeping every y row alive for the second sweep
    ax = sweep(U.transpose(0, 2, 1), params)  # (nvar, nyt, npts, nxt - 4)
    ay = sweep(ax.transpose(0, 2, 3, 1), params)  # (nvar, npts, nxt - 4, npts, nyt - 4)
    return ay.transpose(0, 1, 3, 2, 4)


def positivity_limit(R, h_avg):
    """Scale height values toward the cell average so no point goes dry-negative.

    R is the reconstruction tensor (nvar, np, np, ni, nj), h_avg the matching
    cell averages (ni, nj). Only variable 0 is touched. Returns the per-cell
    scaling actually applied, for diagnostics.
    """
    m = R[0].min(axis=(0, 1))
    floor = np.minimum(H_FLOOR_CAP, h_avg)
    denom = h_avg - m
    with np.errstate(divide="ignore", invalid="ignore"):
        theta = np.where(denom > 0.0, (h_avg - floor) / denom, 1.0)
    theta = np.clip(theta, 0.0, 1.0)
    R[0] = h_avg + theta * (R[0] - h_avg)
    # the affine pullback rounds at eps*h_avg, which for very deep water can
    # poke below zero; wave speeds take sqrt(g h) of these values
    np.maximum(R[0], 0.0, out=R[0])
    return theta
