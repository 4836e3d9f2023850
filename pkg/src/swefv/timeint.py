"""Deferred-correction time integration with a modified-Patankar height update.

One step runs P fixed-point iterations over M+1 Gauss-Lobatto subtimenodes.
Momenta advance explicitly: each iteration rebuilds every subtimenode state
from the node-0 state plus quadrature-weighted right-hand sides of the
previous iteration. The water height instead solves, per subtimenode, a
small linear system in which production terms from neighbors are weighted by
the ratio of new to old neighbor height and destruction terms by the cell's
own ratio (roles swapping where a quadrature weight is negative). That keeps
the update conservative (the exchange terms pair exactly) and nonnegative
for any time-step size, because the Jacobi sweeps map nonnegative data to
nonnegative data and the system matrix is column diagonally dominant.

Heights of ghost cells are not unknowns; their ratio is taken as 1, turning
boundary-edge production into an explicit nonnegative right-hand-side term.
The same terms, integrated once more after the final solve, give the mass
exchanged through the open boundaries, which the driver accumulates so runs
with inflow/outflow can still close their mass budget.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from numpy.polynomial import polynomial as npoly

from .grid import Inflow, StateField, fill_ghosts
from .quadrature import gauss_lobatto
from .semidiscretization import (
    Discretization,
    compute_rhs,
    extract_pds,
    max_wave_speeds,
)
from .wellbalanced import MOLL_EPS, IndicatorState


class StepFailure(RuntimeError):
    """A time step could not be completed; the message says where and why."""


@dataclass(frozen=True)
class PatankarParams:
    moll_threshold: float = MOLL_EPS
    jacobi_rtol: float = 1e-13
    jacobi_maxiter: int = 1000

    def __post_init__(self):
        if min(self.moll_threshold, self.jacobi_rtol, self.jacobi_maxiter) <= 0:
            raise ValueError("Patankar parameters must be positive")


@dataclass(frozen=True)
class DecTableau:
    """Subtimenodes and their cumulative quadrature weights.

    theta[m, l] integrates the Lagrange basis of node l over [0, nodes[m]],
    so a row sums to nodes[m] and row 0 is zero. M subintervals give
    quadrature accuracy 2M; P iterations give order min(P, 2M).
    """

    M: int
    P: int
    nodes: np.ndarray
    theta: np.ndarray


def build_dec_tableau(M, P) -> DecTableau:
    if M < 1 or P < 1:
        raise ValueError("need at least one subinterval and one iteration")
    nodes = gauss_lobatto(M + 1)
    theta = np.zeros((M + 1, M + 1))
    for l in range(M + 1):
        c = np.array([1.0])
        denom = 1.0
        for k in range(M + 1):
            if k != l:
                c = npoly.polymul(c, np.array([-nodes[k], 1.0]))
                denom *= nodes[l] - nodes[k]
        integ = npoly.polyint(c / denom)
        theta[:, l] = npoly.polyval(nodes, integ)
    if np.max(np.abs(theta.sum(axis=1) - nodes)) > 1e-14:
        raise ArithmeticError("tableau rows do not integrate constants exactly")
    return DecTableau(M=M, P=P, nodes=nodes, theta=theta)


def gamma_switch(alpha, beta, theta):
    """Index selector of the Patankar ratio: alpha when theta >= 0, else beta."""
    return alpha if theta >= 0 else beta


def mollified_ratio(n, d):
    """n/d regularized near zero: exactly n/d for d >= 1e-4, 0 below 1e-8."""
    return n * _moll_recip(np.asarray(d, dtype=float))


def _moll_recip(d):
    d2 = d * d
    r = 2.0 * d / (d2 + np.maximum(d2, MOLL_EPS))
    return np.where(d < MOLL_EPS, 0.0, r)


def jacobi_solve(diag, off_mul, rhs, x0, params: PatankarParams, stage=""):
    """Solve (diag*I + OFF) x = rhs, OFF applied by off_mul; returns (x, sweeps).

    Sweeps preserve nonnegativity when rhs >= 0 and OFF has nonpositive
    entries, which the Patankar operators guarantee; convergence is checked
    on the max-norm residual relative to the right-hand side. When the
    operator norm is much larger than the right-hand side, double precision
    bottoms out in a rounding limit cycle above that target; once the
    residual has made no real progress for 50 sweeps while already below
    1e-8 of the problem scale, the best iterate seen is accepted, since no
    further sweep can improve it.
    """
    scale = float(np.max(np.abs(rhs)))
    if scale == 0.0:
        return np.zeros_like(rhs), 0
    tol = params.jacobi_rtol * scale
    best = math.inf
    best_x = x0
    stall = 0
    x = x0
    for sweep in range(params.jacobi_maxiter):
        y = off_mul(x)
        dx_ = diag * x
        resid = float(np.max(np.abs(dx_ + y - rhs)))
        if resid <= tol:
            return x, sweep
        if resid < best * (1.0 - 1e-4):
            best = resid
            best_x = x
            stall = 0
        else:
            stall += 1
            if stall >= 50 and best <= 1e-8 * max(
                scale, float(np.max(np.abs(dx_) + np.abs(y)))
            ):
                return best_x, sweep
        x = (rhs - y) / diag
    raise StepFailure(
        f"Jacobi stalled: residual {resid:.3e} > {tol:.3e} "
        f"after {params.jacobi_maxiter} sweeps{' at ' + stage if stage else ''}"
    )


def compute_dt(fld: StateField, g, cfl, t, t_final):
    """CFL time step from directional wave speeds, clipped to land on t_final."""
    if not 0.0 < cfl <= 1.0:
        raise ValueError("CFL must lie in (0, 1]")
    grid = fld.grid
    lam_x, lam_y = max_wave_speeds(fld, g)
    rate = float(np.max(lam_x / grid.dx + lam_y / grid.dy))
    remaining = t_final - t
    if rate <= 0.0:
        return remaining
    dt = cfl / rate
    if dt >= remaining * (1.0 - 1e-12):
        return remaining
    return dt


def _ledger_dirs(led):
    return (
        (led.p_w, led.d_w),
        (led.p_e, led.d_e),
        (led.p_s, led.d_s),
        (led.p_n, led.d_n),
    )


# roll arguments bringing each neighbor's value onto the cell: west, east,
# south, north (matching the ledger direction order)
_SHIFTS = ((1, 0), (-1, 0), (1, 1), (-1, 1))


def _solve_height(c0, evals, a_plus, a_minus, h_prev, disc, params, stage):
    """One modified-Patankar solve; returns (heights, sweeps, boundary net).

    boundary net is the height gained per cell through non-periodic edges
    (explicit ghost production minus the matching destruction), summed over
    the grid, already evaluated at the returned solution.
    """
    nx, ny = disc.grid.nx, disc.grid.ny
    prod = [np.zeros((nx, ny)) for _ in range(4)]
    selfc = [np.zeros((nx, ny)) for _ in range(4)]
    for l, (_, led) in enumerate(evals):
        ap, am = a_plus[l], a_minus[l]
        if ap == 0.0 and am == 0.0:
            continue
        for k, (p, d) in enumerate(_ledger_dirs(led)):
            prod[k] += ap * p + am * d
            selfc[k] += ap * d + am * p

    moll = _moll_recip(h_prev)
    diag = 1.0 + (selfc[0] + selfc[1] + selfc[2] + selfc[3]) * moll

    off = [prod[k] * np.roll(moll, s, axis=ax) for k, (s, ax) in enumerate(_SHIFTS)]
    rhs = c0.copy()
    open_x = not disc.bc.periodic_x
    open_y = not disc.bc.periodic_y
    if open_x:
        off[0][0, :] = 0.0
        off[1][-1, :] = 0.0
        rhs[0, :] += prod[0][0, :]
        rhs[-1, :] += prod[1][-1, :]
    if open_y:
        off[2][:, 0] = 0.0
        off[3][:, -1] = 0.0
        rhs[:, 0] += prod[2][:, 0]
        rhs[:, -1] += prod[3][:, -1]

    def off_mul(x):
        acc = off[0] * np.roll(x, 1, axis=0)
        acc += off[1] * np.roll(x, -1, axis=0)
        acc += off[2] * np.roll(x, 1, axis=1)
        acc += off[3] * np.roll(x, -1, axis=1)
        return -acc

    x, sweeps = jacobi_solve(diag, off_mul, rhs, h_prev, params, stage=stage)

    bdry = 0.0
    out = moll * x
    if open_x:
        bdry += float(np.sum(prod[0][0, :] - selfc[0][0, :] * out[0, :]))
        bdry += float(np.sum(prod[1][-1, :] - selfc[1][-1, :] * out[-1, :]))
    if open_y:
        bdry += float(np.sum(prod[2][:, 0] - selfc[2][:, 0] * out[:, 0]))
        bdry += float(np.sum(prod[3][:, -1] - selfc[3][:, -1] * out[:, -1]))
    return x, sweeps, bdry


@dataclass
class AdvanceDiag:
    theta_max: float
    jacobi_sweeps: int
    boundary_mass: float


def _eval_rhs(disc, fld, C_prev, mode, t, stage):
    ind = IndicatorState(C_prev=C_prev, mode=mode)
    res, ef = compute_rhs(disc, fld, ind, t, stage=stage)
    led = extract_pds(ef, disc.grid.dx, disc.grid.dy)
    tmax = max(float(ind.theta_x.max()), float(ind.theta_y.max()))
    return (res, led), tmax


def advance(disc: Discretization, fld: StateField, dt, t, tableau: DecTableau,
            params: PatankarParams, C_prev, mode):
    """One full step from t to t+dt; returns (new field, diagnostics).

    fld is not modified. C_prev is the previous step's time residual for the
    equilibrium indicator (None on the first step), mode its blending mode.
    """
    grid = disc.grid
    M, P = tableau.M, tableau.P
    ix, iy = grid.interior_x, grid.interior_y
    times = [t + float(n) * dt for n in tableau.nodes]
    autonomous = not any(
        isinstance(s, Inflow) for s in (disc.bc.left, disc.bc.right, disc.bc.bottom, disc.bc.top)
    )

    base = fld.copy()
    fill_ghosts(base, disc.bc, t)
    c0 = base.h[ix, iy].copy()
    q0 = base.U[1:, ix, iy].copy()

    evals = [None] * (M + 1)
    evals[0], theta_max = _eval_rhs(disc, base, C_prev, mode, t, "node 0")
    stage_flds = [None] + [base.copy() for _ in range(M)]
    h_prev = [c0] + [c0.copy() for _ in range(M)]

    if autonomous:
        for m in range(1, M + 1):
            evals[m] = evals[0]
    else:
        for m in range(1, M + 1):
            fill_ghosts(stage_flds[m], disc.bc, times[m])
            evals[m], tm = _eval_rhs(
                disc, stage_flds[m], C_prev, mode, times[m], f"iteration 0, node {m}"
            )
            theta_max = max(theta_max, tm)

    sweeps_max = 0
    boundary_mass = 0.0
    for p in range(1, P + 1):
        new_h = [None] * (M + 1)
        new_q = [None] * (M + 1)
        for m in range(1, M + 1):
            row = tableau.theta[m]
            a_plus = dt * np.maximum(row, 0.0)
            a_minus = dt * np.maximum(-row, 0.0)
            dq = sum(row[l] * evals[l][0][1:] for l in range(M + 1))
            new_q[m] = q0 + dt * dq
            hm, sweeps, bdry = _solve_height(
                c0, evals, a_plus, a_minus, h_prev[m], disc, params,
                stage=f"iteration {p}, node {m}",
            )
            sweeps_max = max(sweeps_max, sweeps)
            new_h[m] = hm
            if p == P and m == M:
                boundary_mass = bdry * grid.dx * grid.dy
        for m in range(1, M + 1):
            stage_flds[m].U[0, ix, iy] = new_h[m]
            stage_flds[m].U[1:, ix, iy] = new_q[m]
            h_prev[m] = new_h[m]
        if p < P:
            for m in range(1, M + 1):
                fill_ghosts(stage_flds[m], disc.bc, times[m])
                evals[m], tm = _eval_rhs(
                    disc, stage_flds[m], C_prev, mode, times[m],
                    f"iteration {p}, node {m}",
                )
                theta_max = max(theta_max, tm)

    out = stage_flds[M]
    fill_ghosts(out, disc.bc, t + dt)
    return out, AdvanceDiag(theta_max, sweeps_max, boundary_mass)


def mpdec_ode_step(p_fn: Callable, c0, dt, tableau: DecTableau, params: PatankarParams):
    """One mPDeC step for a dense production-destruction system.

    p_fn(c) returns the production matrix P with P[a, b] the rate component a
    gains from component b (zero diagonal); destruction is the transpose
    pairing, so the system is conservative by construction.
    """
    M, P_it = tableau.M, tableau.P
    c0 = np.asarray(c0, dtype=float)
    c_nodes = [c0.copy() for _ in range(M + 1)]
    for p in range(1, P_it + 1):
        mats = [np.asarray(p_fn(c_nodes[l]), dtype=float) for l in range(M + 1)]
        new_nodes = [c0.copy()]
        for m in range(1, M + 1):
            row = tableau.theta[m]
            a_plus = dt * np.maximum(row, 0.0)
            a_minus = dt * np.maximum(-row, 0.0)
            Pp = sum(a_plus[l] * mats[l] for l in range(M + 1))
            Pm = sum(a_minus[l] * mats[l] for l in range(M + 1))
            moll = _moll_recip(c_nodes[m])
            diag = 1.0 + (Pp.T + Pm).sum(axis=1) * moll
            off = -(Pp + Pm.T) * moll[None, :]
            np.fill_diagonal(off, 0.0)
            x, _ = jacobi_solve(
                diag, lambda v: off @ v, c0, c_nodes[m], params,
                stage=f"ODE iteration {p}, node {m}",
            )
            new_nodes.append(x)
        c_nodes = new_nodes
    return c_nodes[M]


@dataclass
class StepDiag:
    step: int
    t: float
    dt: float
    min_h: float
    mass: float
    theta_max: float
    jacobi_sweeps: int


class Simulation:
    """Step driver: CFL control, residual history for the indicator, and the
    running boundary-mass budget. `mode` is the blending mode ("indicator",
    "off", "force"); on_step callbacks receive (simulation, StepDiag).
    """

    def __init__(self, disc: Discretization, fld: StateField, cfl=0.9,
                 mode="indicator", tableau: Optional[DecTableau] = None,
                 params: Optional[PatankarParams] = None, t0=0.0):
        self.disc = disc
        self.fld = fld
        self.cfl = cfl
        self.mode = mode
        self.tableau = tableau if tableau is not None else build_dec_tableau(3, 5)
        self.params = params if params is not None else PatankarParams()
        self.t = t0
        self.steps = 0
        self.C_prev = None
        self.boundary_mass = 0.0
        self.min_h_run = math.inf

    def step(self, t_final) -> StepDiag:
        dt = compute_dt(self.fld, self.disc.g, self.cfl, self.t, t_final)
        if dt <= 0.0:
            raise StepFailure(f"non-positive time step {dt} at t={self.t}")
        new_fld, diag = advance(
            self.disc, self.fld, dt, self.t, self.tableau, self.params,
            self.C_prev, self.mode,
        )
        self.C_prev = (new_fld.interior() - self.fld.interior()) / dt
        # copy in place so references to the field object stay current
        self.fld.U[...] = new_fld.U
        self.t += dt
        self.steps += 1
        self.boundary_mass += diag.boundary_mass
        min_h = float(new_fld.interior()[0].min())
        self.min_h_run = min(self.min_h_run, min_h)
        return StepDiag(
            step=self.steps, t=self.t, dt=dt, min_h=min_h, mass=new_fld.mass(),
            theta_max=diag.theta_max, jacobi_sweeps=diag.jacobi_sweeps,
        )

    def run(self, t_final, max_steps=None, on_step=None, stop_when=None):
        while self.t < t_final * (1.0 - 1e-14) - 1e-300:
            if max_steps is not None and self.steps >= max_steps:
                break
            d = self.step(t_final)
            if on_step is not None:
                on_step(self, d)
            if stop_when is not None and stop_when(self):
                break
        return self.fld
