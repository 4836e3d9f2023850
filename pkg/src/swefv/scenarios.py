"""Benchmark catalog: closed-form data, references, and error norms.

Initial fields are cell averages. Smooth closed forms are averaged with the
same 4-point tensor Gauss rule the solver uses; equilibrium states (lakes at
rest, channel flows) are instead built directly from the stored cell-average
bathymetry, since that discrete equilibrium is the state the solver can hold
exactly. Shoreline cells of the wet-dry lake therefore carry max(eta0-b,0)
of the averaged bottom, not the average of the pointwise max.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .grid import (BoundarySpec, Dirichlet, GridSpec, Inflow, Periodic,
                   StateField, Transmissive, Wall, periodic_bc,
                   sample_bathymetry)
from .quadrature import QuadratureRule, gauss_legendre
from .wellbalanced import desingularized_velocity

G_DEFAULT = 9.81
G_CHANNEL = 9.812


# ---------------------------------------------------------------------------
# closed-form ingredients

def _as_xy(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return np.broadcast_arrays(x, y)


def vortex_state(x, y, t, g=G_DEFAULT):
    """Traveling-vortex fields (h, u, v) at time t, periodically wrapped.

    Background (1, 2, 3); the height dip and the tangential velocity both
    vanish identically outside unit distance from the advected center, and
    every derivative vanishes there too, so the profile is smooth.
    """
    x, y = _as_xy(x, y)
    gamma = 0.1
    dx = (x - 1.5 - 2.0 * t + 1.5) % 3.0 - 1.5
    dy = (y - 1.5 - 3.0 * t + 1.5) % 3.0 - 1.5
    r2 = dx * dx + dy * dy
    m = r2 < 1.0
    bump = np.zeros_like(x)
    wfac = np.zeros_like(x)
    a = np.arctan(1.0 - r2[m])
    with np.errstate(divide="ignore", over="ignore"):
        e = np.exp(-1.0 / a**3)
        # d(h)/dr divided by r: the r factor cancels, keeping the center finite
        wfac[m] = 6.0 * gamma * e / (a**4 * (1.0 + (1.0 - r2[m]) ** 2))
    bump[m] = -gamma * e
    h = 1.0 + bump
    fac = np.sqrt(g * wfac)
    u = 2.0 + fac * dy
    v = 3.0 - fac * dx
    return h, u, v


def lake_wet_b(x, y):
    x, y = _as_xy(x, y)
    return 0.1 * np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)


def lake_wet_db(x, y):
    x, y = _as_xy(x, y)
    c = 0.2 * np.pi
    return (c * np.cos(2 * np.pi * x) * np.cos(2 * np.pi * y),
            -c * np.sin(2 * np.pi * x) * np.sin(2 * np.pi * y))


def island_b(x, y):
    """Compactly supported bump of unit radius and unit peak at the origin."""
    x, y = _as_xy(x, y)
    r2 = x * x + y * y
    out = np.zeros_like(x)
    m = r2 < 1.0
    out[m] = np.exp(1.0 - 1.0 / (1.0 - r2[m]))
    return out


def island_db(x, y):
    x, y = _as_xy(x, y)
    r2 = x * x + y * y
    dbdx = np.zeros_like(x)
    dbdy = np.zeros_like(x)
    m = r2 < 1.0
    s = 1.0 - r2[m]
    c = -2.0 * np.exp(1.0 - 1.0 / s) / (s * s)
    dbdx[m] = c * x[m]
    dbdy[m] = c * y[m]
    return dbdx, dbdy


def channel_b(x, y=None):
    x = np.asarray(x, dtype=float)
    s = x - 12.5
    out = 0.05 * np.sin(s) * np.exp(1.0 - s * s)
    if y is not None:
        out = out + 0.0 * np.asarray(y, dtype=float)
    return out


def channel_db(x, y=None):
    x = np.asarray(x, dtype=float)
    s = x - 12.5
    d = 0.05 * np.exp(1.0 - s * s) * (np.cos(s) - 2.0 * s * np.sin(s))
    if y is not None:
        z = 0.0 * np.asarray(y, dtype=float)
        return d + z, z + 0.0 * d
    return d


def _cone(x, y, xc, yc, R, A):
    d = np.sqrt((x - xc) ** 2 + (y - yc) ** 2)
    return np.where(d < R, (A / R) * (R - d), 0.0)


def _cone_grad(x, y, xc, yc, R, A):
    ddx = x - xc
    ddy = y - yc
    d = np.sqrt(ddx * ddx + ddy * ddy)
    m = (d < R) & (d > 1e-14)
    gx = np.zeros_like(x)
    gy = np.zeros_like(x)
    gx[m] = -(A / R) * ddx[m] / d[m]
    gy[m] = -(A / R) * ddy[m] / d[m]
    return gx, gy


_TSU_CONES = ((1.0, -1.0), (1.0, 1.0), (2.0, 0.0))


def tsunami_b(x, y):
    x, y = _as_xy(x, y)
    ramp = np.where(x < 0.0, 1.0 + 0.2 * x,
                    np.where(x <= 3.0, 1.0, 1.0 + 0.4 * (x - 3.0)))
    out = ramp
    for xc, yc in _TSU_CONES:
        out = out + _cone(x, y, xc, yc, 0.5, 3.0)
    return out


def tsunami_db(x, y):
    x, y = _as_xy(x, y)
    gx = np.where(x < 0.0, 0.2, np.where(x <= 3.0, 0.0, 0.4))
    gy = np.zeros_like(x)
    for xc, yc in _TSU_CONES:
        cx, cy = _cone_grad(x, y, xc, yc, 0.5, 3.0)
        gx = gx + cx
        gy = gy + cy
    return gx, gy


def tsunami_inflow(t):
    return 3.0 * (1.0 + np.cos(2.0 * np.pi * t)) * np.exp(-2.0 * t)


# ---------------------------------------------------------------------------
# steady channel reference

@dataclass(frozen=True)
class SteadyReference:
    """Constant-discharge, constant-head 1D equilibrium on a given branch."""

    q0: float
    E0: float
    branch: str
    g: float


def steady_reference(q0, anchor, branch, g=G_CHANNEL):
    if branch not in ("subcritical", "supercritical"):
        raise ValueError(f"unknown branch {branch!r}")
    h_a, b_a = anchor
    if h_a <= 0.0:
        raise ValueError("anchor depth must be positive")
    E0 = 0.5 * q0 * q0 / (h_a * h_a) + g * (h_a + b_a)
    fr = abs(q0) / (h_a * math.sqrt(g * h_a))
    if branch == "subcritical" and fr >= 1.0:
        raise ValueError(f"anchor Froude {fr:.3f} not subcritical")
    if branch == "supercritical" and fr <= 1.0:
        raise ValueError(f"anchor Froude {fr:.3f} not supercritical")
    return SteadyReference(q0=q0, E0=E0, branch=branch, g=g)


def steady_height(ref: SteadyReference, b):
    """Depth with the reference's discharge and head over bottom values b.

    Solves 0.5 q0^2/h^2 + g(h+b) = E0 per point by safeguarded Newton: the
    head is monotone on each side of the critical depth, so the subcritical
    root is bracketed above it and the supercritical root below.
    """
    b = np.asarray(b, dtype=float)
    g, q0, E0 = ref.g, ref.q0, ref.E0
    if q0 == 0.0:
        return E0 / g - b
    hc = (q0 * q0 / g) ** (1.0 / 3.0)
    f_hc = 1.5 * g * hc + g * b - E0
    if np.any(f_hc > 0.0):
        raise ValueError(
            f"choked flow: head {E0} below critical head {float(np.max(f_hc + E0))}"
        )
    if ref.branch == "subcritical":
        lo = np.full_like(b, hc)
        hi = (E0 - g * b) / g
    else:
        lo = np.full_like(b, q0 / math.sqrt(2.0 * E0))
        hi = np.full_like(b, hc)
    h = 0.5 * (lo + hi)

    def head_err(hh):
        return 0.5 * q0 * q0 / (hh * hh) + g * (hh + b) - E0

    for _ in range(200):
        f = head_err(h)
        if np.max(np.abs(f)) <= 1e-13:
            break
        pos = f > 0.0
        if ref.branch == "subcritical":
            hi = np.where(pos, h, hi)
            lo = np.where(pos, lo, h)
        else:
            lo = np.where(pos, h, lo)
            hi = np.where(pos, hi, h)
        fp = g - q0 * q0 / h**3
        with np.errstate(divide="ignore", invalid="ignore"):
            h_new = h - f / fp
        bad = ~np.isfinite(h_new) | (h_new <= lo) | (h_new >= hi)
        h = np.where(bad, 0.5 * (lo + hi), h_new)
    resid = np.max(np.abs(head_err(h)))
    if resid > 1e-12:
        raise ArithmeticError(f"steady depth solve stalled at residual {resid:.3e}")
    return h


# ---------------------------------------------------------------------------
# scenario assembly

@dataclass
class Scenario:
    name: str
    bounds: tuple
    nx: int
    ny: int
    g: float
    t_final: float
    cfl: float
    bc: BoundarySpec
    init_fn: Callable
    b_fn: Callable = None
    db_fn: Callable = None
    wb_mode: str = "indicator"
    exact_fn: Optional[Callable] = None
    steady: Optional[SteadyReference] = None


def _zero_b(x, y):
    x, y = _as_xy(x, y)
    return np.zeros_like(x)


def _zero_db(x, y):
    x, y = _as_xy(x, y)
    z = np.zeros_like(x)
    return z, z.copy()


def cell_average(fn, grid: GridSpec, rule: QuadratureRule):
    """Tensor Gauss average of a pointwise function over interior cells."""
    xc, yc = grid.centers()
    xq = xc[:, None, None, None] + rule.nodes[None, None, :, None] * grid.dx
    yq = yc[None, :, None, None] + rule.nodes[None, None, None, :] * grid.dy
    X, Y = np.broadcast_arrays(xq, yq)
    vals = np.asarray(fn(X, Y), dtype=float) + 0.0 * X
    return np.einsum("ijqp,q,p->ij", vals, rule.weights, rule.weights)


def vortex_averages(grid: GridSpec, rule: QuadratureRule, t, g=G_DEFAULT):
    """Cell-averaged conserved vortex fields at time t, shape (3, nx, ny)."""
    def conserved(x, y):
        h, u, v = vortex_state(x, y, t, g=g)
        return np.stack([h, h * u, h * v])

    xc, yc = grid.centers()
    xq = xc[:, None, None, None] + rule.nodes[None, None, :, None] * grid.dx
    yq = yc[None, :, None, None] + rule.nodes[None, None, None, :] * grid.dy
    X, Y = np.broadcast_arrays(xq, yq)
    vals = conserved(X, Y)
    return np.einsum("cijqp,q,p->cij", vals, rule.weights, rule.weights)


def _interior_field(grid, U_int):
    fld = StateField(grid)
    fld.U[:, grid.interior_x, grid.interior_y] = U_int
    return fld


def _vortex_init(grid, bath, rule):
    return _interior_field(grid, vortex_averages(grid, rule, 0.0))


def _lake_init(eta0, clip):
    def init(grid, bath, rule):
        b = bath.cell_avg[grid.interior_x, grid.interior_y]
        h = eta0 - b
        if clip:
            h = np.maximum(h, 0.0)
        U = np.zeros((3, grid.nx, grid.ny))
        U[0] = h
        return _interior_field(grid, U)
    return init


def _perturbation_init(grid, bath, rule):
    def bump(x, y):
        x, y = _as_xy(x, y)
        rho2 = 9.0 * ((x + 2.0) ** 2 + (y - 0.5) ** 2)
        out = np.zeros_like(x)
        m = rho2 < 1.0
        out[m] = 0.05 * np.exp(1.0 - 1.0 / (1.0 - rho2[m]) ** 2)
        return out

    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    U = np.zeros((3, grid.nx, grid.ny))
    U[0] = 1.5 - b + cell_average(bump, grid, rule)
    return _interior_field(grid, U)


def _island_flood_init(grid, bath, rule):
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    h = np.maximum(0.7 - b, 0.0)
    U = np.zeros((3, grid.nx, grid.ny))
    U[0] = h
    U[1] = h  # unit velocity wherever wet
    return _interior_field(grid, U)


def _tsunami_init(grid, bath, rule):
    def h_pt(x, y):
        x, y = _as_xy(x, y)
        return np.where(x < -3.5, np.maximum(1.5 - tsunami_b(x, y), 0.0), 0.0)

    def qx_pt(x, y):
        return 4.0 * h_pt(x, y)

    U = np.zeros((3, grid.nx, grid.ny))
    U[0] = cell_average(h_pt, grid, rule)
    U[1] = cell_average(qx_pt, grid, rule)
    return _interior_field(grid, U)


def _channel_steady(q0, branch):
    return steady_reference(
        q0, anchor=(2.0, 0.0), branch=branch, g=G_CHANNEL
    )


def channel_steady_init(scn, grid, bath):
    """Channel field sitting exactly on the discrete steady state.

    The depth solves the constant-head equation against the stored
    cell-average bathymetry, so equilibrium variables are constant across
    cells up to the root solve's 1e-13 residual.
    """
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    h = steady_height(scn.steady, b)
    U = np.zeros((3, grid.nx, grid.ny))
    U[0] = h
    U[1] = scn.steady.q0
    return _interior_field(grid, U)


def _make_vortex():
    return Scenario(
        name="vortex", bounds=(0.0, 3.0, 0.0, 3.0), nx=25, ny=25,
        g=G_DEFAULT, t_final=0.1, cfl=0.9, bc=periodic_bc(),
        init_fn=_vortex_init, b_fn=_zero_b, db_fn=_zero_db,
        exact_fn=lambda grid, rule, t: vortex_averages(grid, rule, t),
    )


def _make_lake_wet():
    return Scenario(
        name="lake-at-rest-wet", bounds=(0.0, 1.0, 0.0, 1.0), nx=25, ny=25,
        g=G_DEFAULT, t_final=0.1, cfl=0.9, bc=periodic_bc(),
        init_fn=_lake_init(1.0, clip=False), b_fn=lake_wet_b, db_fn=lake_wet_db,
    )


def _make_lake_wetdry():
    return Scenario(
        name="lake-at-rest-wetdry", bounds=(-5.0, 5.0, -5.0, 5.0), nx=25, ny=25,
        g=G_DEFAULT, t_final=1.0, cfl=0.9, bc=periodic_bc(),
        init_fn=_lake_init(0.7, clip=True), b_fn=island_b, db_fn=island_db,
    )


def _make_perturbation():
    return Scenario(
        name="lake-at-rest-perturbation", bounds=(-5.0, 5.0, -2.0, 2.0),
        nx=100, ny=30, g=G_DEFAULT, t_final=0.375, cfl=0.8, bc=periodic_bc(),
        init_fn=_perturbation_init, b_fn=island_b, db_fn=island_db,
        wb_mode="force",
    )


def _make_channel_sub():
    bc = BoundarySpec(
        left=Dirichlet(q=4.42), right=Dirichlet(h=2.0),
        bottom=Periodic(), top=Periodic(),
    )
    return Scenario(
        name="channel-subcritical", bounds=(0.0, 25.0, 0.0, 1.0), nx=100, ny=5,
        g=G_CHANNEL, t_final=200.0, cfl=0.9, bc=bc,
        init_fn=_lake_init(2.0, clip=False), b_fn=channel_b, db_fn=channel_db,
        steady=_channel_steady(4.42, "subcritical"),
    )


def _make_channel_super():
    bc = BoundarySpec(
        left=Dirichlet(h=2.0, q=24.0), right=Transmissive(),
        bottom=Periodic(), top=Periodic(),
    )
    return Scenario(
        name="channel-supercritical", bounds=(0.0, 25.0, 0.0, 1.0), nx=100, ny=5,
        g=G_CHANNEL, t_final=50.0, cfl=0.9, bc=bc,
        init_fn=_lake_init(2.0, clip=False), b_fn=channel_b, db_fn=channel_db,
        steady=_channel_steady(24.0, "supercritical"),
    )


def _make_island_flood():
    bc = BoundarySpec(
        left=Dirichlet(h=0.7, q=0.7), right=Transmissive(),
        bottom=Wall(), top=Wall(),
    )
    return Scenario(
        name="island-flood", bounds=(-5.0, 5.0, -2.0, 2.0), nx=400, ny=120,
        g=G_DEFAULT, t_final=5.0, cfl=0.9, bc=bc,
        init_fn=_island_flood_init, b_fn=island_b, db_fn=island_db,
    )


def _make_tsunami():
    bc = BoundarySpec(
        left=Inflow(tsunami_inflow), right=Transmissive(),
        bottom=Wall(), top=Wall(),
    )
    return Scenario(
        name="tsunami-three-obstacles", bounds=(-5.0, 7.0, -2.0, 2.0),
        nx=960, ny=320, g=G_DEFAULT, t_final=3.0, cfl=0.8, bc=bc,
        init_fn=_tsunami_init, b_fn=tsunami_b, db_fn=tsunami_db,
    )


CATALOG = {
    "vortex": _make_vortex,
    "lake-at-rest-wet": _make_lake_wet,
    "lake-at-rest-wetdry": _make_lake_wetdry,
    "lake-at-rest-perturbation": _make_perturbation,
    "channel-subcritical": _make_channel_sub,
    "channel-supercritical": _make_channel_super,
    "island-flood": _make_island_flood,
    "tsunami-three-obstacles": _make_tsunami,
}


def get_scenario(name) -> Scenario:
    try:
        return CATALOG[name]()
    except KeyError:
        known = ", ".join(sorted(CATALOG))
        raise KeyError(f"unknown scenario {name!r}; available: {known}") from None


def setup(scn: Scenario, nx=None, ny=None, rule=None):
    """Materialize grid, bathymetry samples, and the initial field."""
    rule = rule if rule is not None else gauss_legendre(4)
    grid = GridSpec(nx or scn.nx, ny or scn.ny, *scn.bounds)
    bath = sample_bathymetry(scn.b_fn or _zero_b, grid, rule,
                             grad_fn=scn.db_fn, bc=scn.bc)
    fld = scn.init_fn(grid, bath, rule)
    return grid, bath, fld


# ---------------------------------------------------------------------------
# error measurement

def error_norms(fld: StateField, ref, grid: GridSpec):
    """Per-variable L1 errors against reference cell averages (3, nx, ny)."""
    diff = np.abs(fld.interior() - ref)
    return grid.dx * grid.dy * diff.sum(axis=(1, 2))


def convergence_orders(errors, sizes):
    """Observed orders between consecutive refinements; rows pair i, i+1."""
    errors = np.asarray(errors, dtype=float)
    sizes = np.asarray(sizes, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = errors[:-1] / errors[1:]
        return np.log(ratio) / np.log(sizes[1:] / sizes[:-1])[:, None]


def channel_deviation(fld: StateField, bath, scn: Scenario):
    """Max deviation of discharge and head from the steady reference."""
    ref = scn.steady
    grid = fld.grid
    h = fld.interior()[0]
    qx = fld.interior()[1]
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    u = desingularized_velocity(h, qx)
    E = 0.5 * u * u + ref.g * (h + b)
    return float(np.max(np.abs(qx - ref.q0))), float(np.max(np.abs(E - ref.E0)))
