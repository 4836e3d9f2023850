"""Generation of WENO reconstruction coefficients at arbitrary points.

A cell-average reconstruction of order 2r-1 is built the classical way: the
primitive of the unknown is interpolated at the stencil's cell interfaces
(where its values are plain partial sums of cell averages), the interpolant
is differentiated, and the result is evaluated at the requested offset. That
gives, for any stencil [i+k1, i+k2] and offset xi inside cell i,

    v(xi) = sum_l c_l(xi) * u_{i+l},

with coefficients that are rational functions of xi. The same routine serves
the wide high-order stencil and each r-cell substencil.

Linear ("ideal") weights d recombine the substencil values into the
high-order one at a given point. The defining system has 2r-1 equations for
r unknowns but is consistent by construction, so the least-squares solution
satisfies every equation; that is asserted, not assumed. Interface offsets
are handled in exact rational arithmetic, irrational Gauss-point offsets in
double precision.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .quadrature import QuadratureRule, gauss_legendre

CONSISTENCY_TOL = 1e-12


@dataclass(frozen=True)
class StencilSpec:
    """Stencil cells i+k1 .. i+k2 relative to the reconstruction cell i."""

    k1: int
    k2: int

    def __post_init__(self):
        if self.k1 > self.k2:
            raise ValueError(f"degenerate stencil ({self.k1}, {self.k2})")
        if self.k1 > 0 or self.k2 < 0:
            raise ValueError("stencil must contain the cell itself")

    @property
    def width(self):
        return self.k2 - self.k1 + 1


def point_coeffs(stencil: StencilSpec, xi):
    """Reconstruction coefficients c_l(xi), l = k1..k2.

    Exact when xi is a Fraction (or int), float otherwise. Offsets are in
    cell-size units from the center of cell i; the cell interfaces of the
    stencil sit at half-integers j - 1/2.
    """
    exact = isinstance(xi, (Fraction, int))
    one = Fraction(1) if exact else 1.0
    xi = Fraction(xi) if exact else float(xi)
    k1, k2 = stencil.k1, stencil.k2
    nodes = [j - one / 2 for j in range(k1, k2 + 2)]
    npts = len(nodes)

    # derivative of the Lagrange basis phi_j over the interface nodes, at xi
    dphi = []
    for j in range(npts):
        denom = one
        for k in range(npts):
            if k != j:
                denom = denom * (nodes[j] - nodes[k])
        acc = 0 * one
        for m in range(npts):
            if m == j:
                continue
            term = one
            for k in range(npts):
                if k != j and k != m:
                    term = term * (xi - nodes[k])
            acc = acc + term
        dphi.append(acc / denom)

    # primitive value at node j is the partial sum of averages u_{k1..j-1},
    # so u_{i+l} collects every dphi_j with j > l
    coeffs = []
    for l in range(k1, k2 + 1):
        j_lo = l - k1 + 1
        coeffs.append(sum(dphi[j_lo:], 0 * one))
    return coeffs


def ideal_weights(c_ho, c_lo):
    """Linear weights d solving sum_j d_j c_lo[j] = c_ho over the wide stencil.

    c_ho has 2r-1 entries for offsets k1..k2; c_lo[j] has the r entries of
    substencil S_j = (cells i-j .. i-j+r-1). The system is overdetermined but
    exactly satisfiable; all equations are verified and a violation raises,
    since it can only mean the point coefficients are wrong.
    """
    r = len(c_lo)
    width = len(c_ho)
    if width != 2 * r - 1:
        raise ValueError("high-order stencil width must be 2r-1")
    exact = all(isinstance(v, (Fraction, int)) for v in c_ho) and all(
        isinstance(v, (Fraction, int)) for row in c_lo for v in row
    )

    if exact:
        A = [[Fraction(0)] * r for _ in range(width)]
        for j in range(r):
            for l in range(r):
                A[(r - 1 - j) + l][j] = Fraction(c_lo[j][l])
        rhs = [Fraction(v) for v in c_ho]
        ata = [[sum(A[i][a] * A[i][b] for i in range(width)) for b in range(r)] for a in range(r)]
        atb = [sum(A[i][a] * rhs[i] for i in range(width)) for a in range(r)]
        d = _solve_exact(ata, atb)
        for i in range(width):
            if sum(A[i][j] * d[j] for j in range(r)) != rhs[i]:
                raise ArithmeticError("ideal-weight system is inconsistent")
        return d

    A = np.zeros((width, r))
    for j in range(r):
        A[(r - 1 - j) : (r - 1 - j) + r, j] = c_lo[j]
    rhs = np.asarray(c_ho, dtype=float)
    d, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    resid = np.max(np.abs(A @ d - rhs))
    if resid > CONSISTENCY_TOL:
        raise ArithmeticError(f"ideal-weight residual {resid:.3e} exceeds {CONSISTENCY_TOL}")
    return d


def _solve_exact(M, b):
    """Gaussian elimination over Fractions (tiny systems only)."""
    n = len(b)
    M = [row[:] for row in M]
    b = b[:]
    for col in range(n):
        piv = next(row for row in range(col, n) if M[row][col] != 0)
        M[col], M[piv] = M[piv], M[col]
        b[col], b[piv] = b[piv], b[col]
        inv = Fraction(1) / M[col][col]
        M[col] = [v * inv for v in M[col]]
        b[col] = b[col] * inv
        for row in range(n):
            if row != col and M[row][col] != 0:
                f = M[row][col]
                M[row] = [v - f * w for v, w in zip(M[row], M[col])]
                b[row] = b[row] - f * b[col]
    return b


@dataclass(frozen=True)
class ReconTable:
    """Frozen per-point reconstruction data for radius-r WENO.

    c_lo[p, j, l] multiplies u_{i-j+l}: substencil S_j covers cells
    i-j .. i-j+r-1 in ascending order. c_ho[p, l] multiplies u_{i+k1+l} over
    the wide stencil.
    """

    r: int
    points: np.ndarray
    c_ho: np.ndarray
    c_lo: np.ndarray
    d: np.ndarray

    @property
    def npoints(self):
        return len(self.points)


def generate_table(r, points) -> ReconTable:
    """Build the reconstruction table for stencil radius r at the given offsets.

    Fraction-valued offsets go through the exact-rational path, floats through
    the double-precision least-squares path; the stored table is float64
    either way.
    """
    if r < 1:
        raise ValueError("stencil radius must be >= 1")
    if not len(points):
        raise ValueError("no evaluation points requested")
    wide = StencilSpec(-(r - 1), r - 1)
    subs = [StencilSpec(-j, r - 1 - j) for j in range(r)]

    pts = []
    c_ho_rows = []
    c_lo_rows = []
    d_rows = []
    for xi in points:
        c_ho = point_coeffs(wide, xi)
        c_lo = [point_coeffs(s, xi) for s in subs]
        d = ideal_weights(c_ho, c_lo) if r > 1 else [type(c_ho[0])(1)]
        pts.append(float(xi))
        c_ho_rows.append([float(v) for v in c_ho])
        c_lo_rows.append([[float(v) for v in row] for row in c_lo])
        d_rows.append([float(v) for v in d])

    table = ReconTable(
        r=r,
        points=np.array(pts),
        c_ho=np.array(c_ho_rows),
        c_lo=np.array(c_lo_rows),
        d=np.array(d_rows),
    )
    _check_table(table)
    return table


def _check_table(t: ReconTable):
    if np.max(np.abs(t.c_ho.sum(axis=1) - 1.0)) > 1e-13:
        raise ArithmeticError("high-order coefficients do not reproduce constants")
    if np.max(np.abs(t.c_lo.sum(axis=2) - 1.0)) > 1e-13:
        raise ArithmeticError("substencil coefficients do not reproduce constants")
    if np.max(np.abs(t.d.sum(axis=1) - 1.0)) > 1e-13:
        raise ArithmeticError("linear weights do not sum to one")


# Evaluation-point layout shared by the reconstruction and flux assembly:
# index 0 the left interface, 1 the right interface, 2.. the Gauss points
# in ascending order.
IDX_LEFT = 0
IDX_RIGHT = 1
IDX_GP0 = 2


def standard_points(rule: QuadratureRule = None):
    if rule is None:
        rule = gauss_legendre(4)
    return [Fraction(-1, 2), Fraction(1, 2)] + [float(x) for x in rule.nodes]


def standard_table(r=3, rule: QuadratureRule = None) -> ReconTable:
    """Interfaces plus edge-quadrature offsets; the solver's default table."""
    return generate_table(r, standard_points(rule))
