"""Finite-volume right-hand-side assembly.

One evaluation reconstructs tensor-point values for the whole field, limits
the height for positivity, computes per-edge blending coefficients, and
assembles edge fluxes (4-point Gauss quadrature per edge) and momentum
sources. Edge fluxes are single-valued: both adjacent cells consume the same
array entry, so conservation is structural. The height component of the
residual is a pure flux divergence (no source), which is what lets the time
integrator rewrite it as a production-destruction exchange between
neighbors.
"""

from dataclasses import dataclass

import numpy as np

from .grid import BathymetryData, BoundarySpec, GridSpec, StateField
from .quadrature import QuadratureRule, gauss_legendre
from .weno import WenoParams, positivity_limit, reconstruct_field
from .weno_gen import IDX_GP0, IDX_LEFT, IDX_RIGHT
from .wellbalanced import (
    IndicatorState,
    WBParams,
    blend_flux,
    blend_source,
    blend_traces,
    lf_flux,
    steady_indicator,
    wb_flux,
    wb_source_interface,
)


class RhsError(RuntimeError):
    """Non-finite value produced during assembly; message names cell and stage."""


@dataclass(frozen=True)
class Discretization:
    """Everything fixed over a run: geometry, topography, scheme parameters."""

    grid: GridSpec
    bc: BoundarySpec
    bath: BathymetryData
    g: float = 9.81
    wb: WBParams = WBParams()
    weno: WenoParams = None
    rule: QuadratureRule = None

    def __post_init__(self):
        if self.weno is None:
            object.__setattr__(self, "weno", WenoParams())
        if self.rule is None:
            object.__setattr__(self, "rule", gauss_legendre(4))
        if self.grid.ghost != 3:
            raise ValueError("assembly indexing requires exactly 3 ghost layers")
        if len(self.weno.table.points) != 2 + self.rule.q:
            raise ValueError("reconstruction table does not cover the edge quadrature")


@dataclass
class EdgeFluxes:
    """Quadrature-summed numerical fluxes: fx (3, nx+1, ny), fy (3, nx, ny+1)."""

    fx: np.ndarray
    fy: np.ndarray


@dataclass
class PDSLedger:
    """Sign-split height fluxes: per cell, production from and destruction to
    each edge neighbor (west/east/south/north), all nonnegative densities.
    """

    p_w: np.ndarray
    p_e: np.ndarray
    p_s: np.ndarray
    p_n: np.ndarray
    d_w: np.ndarray
    d_e: np.ndarray
    d_s: np.ndarray
    d_n: np.ndarray

    def net(self):
        return (self.p_w + self.p_e + self.p_s + self.p_n) - (
            self.d_w + self.d_e + self.d_s + self.d_n
        )


def _pad_ring(C, periodic_x, periodic_y):
    """Extend the per-cell residual field by one ring for edge averaging."""
    out = np.pad(C, ((0, 0), (1, 1), (0, 0)), mode="wrap" if periodic_x else "edge")
    return np.pad(out, ((0, 0), (0, 0), (1, 1)), mode="wrap" if periodic_y else "edge")


def compute_rhs(disc: Discretization, fld: StateField, ind: IndicatorState, t, stage=""):
    """Assemble (residual, edge fluxes) at time t; ghosts must be filled.

    ind.theta_x / ind.theta_y are overwritten with the coefficients used, so
    the caller can log them. `stage` only labels error diagnostics.
    """
    grid = disc.grid
    nx, ny = grid.nx, grid.ny
    dx, dy = grid.dx, grid.dy
    g = disc.g
    U = fld.U

    R = reconstruct_field(U, disc.weno)
    ring = (slice(2, grid.nxt - 2), slice(2, grid.nyt - 2))
    u_ring = U[:, ring[0], ring[1]]
    b_ring = disc.bath.cell_avg[ring]
    positivity_limit(R, u_ring[0])

    if ind.mode == "indicator" and ind.C_prev is not None:
        c_ring = _pad_ring(ind.C_prev, disc.bc.periodic_x, disc.bc.periodic_y)
    else:
        c_ring = None

    # x edges: between ring cells (i, j) and (i+1, j), i = 0..nx, j = 1..ny
    lx = (slice(0, nx + 1), slice(1, ny + 1))
    rx = (slice(1, nx + 2), slice(1, ny + 1))
    theta_x = _edge_theta(disc, u_ring, b_ring, c_ring, lx, rx, comp=1, dx=dx, ind=ind)
    fx, sdx_x = _edge_assembly(disc, R, u_ring, b_ring, theta_x, lx, rx, axis=0)

    # y edges: between ring cells (i, j) and (i, j+1), i = 1..nx, j = 0..ny
    ly = (slice(1, nx + 1), slice(0, ny + 1))
    ry = (slice(1, nx + 1), slice(1, ny + 2))
    theta_y = _edge_theta(disc, u_ring, b_ring, c_ring, ly, ry, comp=2, dx=dy, ind=ind)
    fy, sdx_y = _edge_assembly(disc, R, u_ring, b_ring, theta_y, ly, ry, axis=1)

    ind.theta_x, ind.theta_y = theta_x, theta_y

    # high-order sources over the interior tensor points
    w = disc.rule.weights
    W = w[:, None] * w[None, :]
    h_int = R[0, IDX_GP0:, IDX_GP0:, 1 : nx + 1, 1 : ny + 1]
    s_ho_x = -g * np.einsum("qpij,qp,ijqp->ij", h_int, W, disc.bath.dbdx)
    s_ho_y = -g * np.einsum("qpij,qp,ijqp->ij", h_int, W, disc.bath.dbdy)

    res = np.zeros((3, nx, ny))
    res -= (fx[:, 1:, :] - fx[:, :-1, :]) / dx
    res -= (fy[:, :, 1:] - fy[:, :, :-1]) / dy
    res[1] += blend_source(
        theta_x[:-1, :], theta_x[1:, :], s_ho_x, sdx_x[:-1, :] / dx, sdx_x[1:, :] / dx
    )
    res[2] += blend_source(
        theta_y[:, :-1], theta_y[:, 1:], s_ho_y, sdx_y[:, :-1] / dy, sdx_y[:, 1:] / dy
    )

    if not np.isfinite(res).all():
        bad = np.argwhere(~np.isfinite(res))[0]
        raise RhsError(
            f"non-finite residual component {bad[0]} at cell ({bad[1]}, {bad[2]})"
            + (f" during {stage}" if stage else "")
        )
    return res, EdgeFluxes(fx, fy)


def _edge_theta(disc, u_ring, b_ring, c_ring, lsl, rsl, comp, dx, ind):
    if ind.mode == "off":
        return np.ones(u_ring[0][lsl].shape)
    if ind.mode == "force":
        return np.zeros(u_ring[0][lsl].shape)
    c_l = c_ring[(slice(None),) + lsl] if c_ring is not None else None
    c_r = c_ring[(slice(None),) + rsl] if c_ring is not None else None
    return steady_indicator(
        u_ring[0][lsl],
        u_ring[comp][lsl],
        b_ring[lsl],
        u_ring[0][rsl],
        u_ring[comp][rsl],
        b_ring[rsl],
        c_l,
        c_r,
        dx,
        disc.g,
        disc.wb,
    )


def _edge_assembly(disc, R, u_ring, b_ring, theta, lsl, rsl, axis):
    """Quadrature-summed fluxes and the cell-average interface source for one
    direction. axis 0 sweeps x (normal momentum = qx), axis 1 sweeps y.
    Returns (flux (3, n_edges...), s_dx (n_edges...)).
    """
    g = disc.g
    n_comp, t_comp = (1, 2) if axis == 0 else (2, 1)
    to_sweep = (0, n_comp, t_comp)

    avg_l = np.stack([u_ring[c][lsl] for c in to_sweep])
    avg_r = np.stack([u_ring[c][rsl] for c in to_sweep])
    b_l, b_r = b_ring[lsl], b_ring[rsl]
    s_dx = wb_source_interface(avg_l[0], b_l, avg_r[0], b_r, g, disc.wb)

    flux_sweep = 0.0
    for k, w_k in enumerate(disc.rule.weights):
        p = IDX_GP0 + k
        if axis == 0:
            ho_l = R[:, IDX_RIGHT, p][(slice(None),) + lsl]
            ho_r = R[:, IDX_LEFT, p][(slice(None),) + rsl]
        else:
            ho_l = R[:, p, IDX_RIGHT][(slice(None),) + lsl]
            ho_r = R[:, p, IDX_LEFT][(slice(None),) + rsl]
        ho_l = ho_l[list(to_sweep)]
        ho_r = ho_r[list(to_sweep)]
        u_l = blend_traces(theta, avg_l, ho_l)
        u_r = blend_traces(theta, avg_r, ho_r)
        f_wb = wb_flux(u_l, u_r, b_l, b_r, g, disc.wb)
        f_lf = lf_flux(u_l, u_r, g)
        flux_sweep = flux_sweep + w_k * blend_flux(theta, f_wb, f_lf)

    flux = np.empty_like(flux_sweep)
    flux[0] = flux_sweep[0]
    flux[n_comp] = flux_sweep[1]
    flux[t_comp] = flux_sweep[2]
    return flux, s_dx


def extract_pds(ef: EdgeFluxes, dx, dy) -> PDSLedger:
    """Sign-split the height fluxes into the neighbor exchange ledger."""
    fx_w, fx_e = ef.fx[0, :-1, :], ef.fx[0, 1:, :]
    fy_s, fy_n = ef.fy[0, :, :-1], ef.fy[0, :, 1:]
    return PDSLedger(
        p_w=np.maximum(fx_w, 0.0) / dx,
        d_w=np.maximum(-fx_w, 0.0) / dx,
        p_e=np.maximum(-fx_e, 0.0) / dx,
        d_e=np.maximum(fx_e, 0.0) / dx,
        p_s=np.maximum(fy_s, 0.0) / dy,
        d_s=np.maximum(-fy_s, 0.0) / dy,
        p_n=np.maximum(-fy_n, 0.0) / dy,
        d_n=np.maximum(fy_n, 0.0) / dy,
    )


def max_wave_speeds(fld: StateField, g):
    """Directional signal speed bounds over the interior, for CFL control."""
    from .wellbalanced import desingularized_velocity

    h, qx, qy = fld.interior()
    c = np.sqrt(g * np.maximum(h, 0.0))
    lam_x = np.abs(desingularized_velocity(h, qx)) + c
    lam_y = np.abs(desingularized_velocity(h, qy)) + c
    return lam_x, lam_y
