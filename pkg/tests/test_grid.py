"""Grid, state storage, ghost fills, and bathymetry sampling."""

import numpy as np
import pytest

from swefv.grid import (BoundarySpec, Dirichlet, GridSpec, Inflow, Periodic,
                        StateField, Transmissive, Wall, fill_ghosts,
                        periodic_bc, sample_bathymetry)
from swefv.quadrature import gauss_legendre


def make_field(nx=6, ny=5):
    grid = GridSpec(nx, ny, 0.0, 1.0, 0.0, 1.0)
    fld = StateField(grid)
    rng = np.random.default_rng(7)
    fld.U[:, grid.interior_x, grid.interior_y] = rng.uniform(0.5, 2.0, (3, nx, ny))
    return grid, fld


def test_gridspec_validation():
    with pytest.raises(ValueError):
        GridSpec(0, 4, 0, 1, 0, 1)
    with pytest.raises(ValueError):
        GridSpec(4, 4, 0, 1, 0, 1, ghost=2)
    g = GridSpec(10, 4, 0.0, 2.0, -1.0, 1.0)
    assert g.dx == 0.2 and g.dy == 0.5
    xc, yc = g.centers()
    assert abs(xc[0] - 0.1) < 1e-15 and abs(yc[-1] - 0.75) < 1e-15


def test_statefield_mass_and_views():
    grid = GridSpec(4, 3, 0.0, 2.0, 0.0, 3.0)
    fld = StateField(grid)
    fld.U[0, grid.interior_x, grid.interior_y] = 2.0
    assert abs(fld.mass() - 2.0 * 6.0) < 1e-14
    fld.h[grid.ghost, grid.ghost] = 5.0
    assert fld.U[0, grid.ghost, grid.ghost] == 5.0
    with pytest.raises(ValueError):
        StateField(grid, np.zeros((3, 4, 4)))


def test_periodic_wrap():
    grid, fld = make_field()
    fill_ghosts(fld, periodic_bc())
    g = grid.ghost
    assert np.array_equal(fld.U[:, :g, g:-g], fld.U[:, grid.nx : grid.nx + g, g:-g])
    assert np.array_equal(fld.U[:, g:-g, grid.ny + g :], fld.U[:, g:-g, g : 2 * g])
    # corners wrap too (x band first, then y over the widened range)
    assert np.array_equal(fld.U[:, :g, :g], fld.U[:, grid.nx : grid.nx + g, grid.ny : grid.ny + g])


def test_transmissive_copies_nearest():
    grid, fld = make_field()
    fill_ghosts(fld, BoundarySpec())
    g = grid.ghost
    for k in range(g):
        assert np.array_equal(fld.U[:, k, g:-g], fld.U[:, g, g:-g])
        assert np.array_equal(fld.U[:, grid.nx + g + k, g:-g], fld.U[:, grid.nx + g - 1, g:-g])


def test_wall_mirrors_and_negates_normal():
    grid, fld = make_field()
    spec = BoundarySpec(left=Wall(), right=Wall(), bottom=Wall(), top=Wall())
    fill_ghosts(fld, spec)
    g = grid.ghost
    for k in range(g):
        np.testing.assert_array_equal(fld.U[0, g - 1 - k, g:-g], fld.U[0, g + k, g:-g])
        np.testing.assert_array_equal(fld.U[1, g - 1 - k, g:-g], -fld.U[1, g + k, g:-g])
        np.testing.assert_array_equal(fld.U[2, g - 1 - k, g:-g], fld.U[2, g + k, g:-g])
    # y walls negate qy instead
    np.testing.assert_array_equal(fld.U[2, g:-g, g - 1], -fld.U[2, g:-g, g])
    np.testing.assert_array_equal(fld.U[1, g:-g, g - 1], fld.U[1, g:-g, g])


def test_dirichlet_and_inflow_overrides():
    grid, fld = make_field()
    spec = BoundarySpec(
        left=Dirichlet(h=2.5, q=1.25),
        right=Dirichlet(h=0.75),
        bottom=Inflow(lambda t: 3.0 * t),
        top=Transmissive(),
    )
    fill_ghosts(fld, spec, t=2.0)
    g = grid.ghost
    assert np.all(fld.U[0, :g, g:-g] == 2.5)
    assert np.all(fld.U[1, :g, g:-g] == 1.25)
    # tangential momentum keeps the outflow copy
    np.testing.assert_array_equal(fld.U[2, g - 1, g:-g], fld.U[2, g, g:-g])
    assert np.all(fld.U[0, grid.nx + g :, g:-g] == 0.75)
    np.testing.assert_array_equal(fld.U[1, grid.nx + g, g:-g], fld.U[1, grid.nx + g - 1, g:-g])
    assert np.all(fld.U[2, g:-g, :g] == 6.0)


def test_periodic_must_pair():
    with pytest.raises(ValueError):
        BoundarySpec(left=Periodic(), right=Transmissive())


def test_fill_idempotent():
    grid, fld = make_field()
    spec = BoundarySpec(left=Wall(), right=Transmissive(),
                        bottom=Periodic(), top=Periodic())
    fill_ghosts(fld, spec)
    snap = fld.U.copy()
    fill_ghosts(fld, spec)
    assert np.array_equal(fld.U, snap)


def test_bathymetry_quadratic_exact():
    # GL4 averages and edge samples are exact for polynomial bottoms
    grid = GridSpec(8, 6, 0.0, 2.0, 0.0, 1.5)
    rule = gauss_legendre(4)

    def b(x, y):
        return x * x + 0.5 * y

    def db(x, y):
        return 2.0 * x + 0.0 * y, 0.5 + 0.0 * x

    bath = sample_bathymetry(b, grid, rule, grad_fn=db, bc=periodic_bc())
    xc, yc = grid.centers()
    want = (xc**2 + grid.dx**2 / 12.0)[:, None] + 0.5 * yc[None, :]
    got = bath.cell_avg[grid.interior_x, grid.interior_y]
    assert np.max(np.abs(got - want)) < 1e-14

    xe = grid.x0 + np.arange(grid.nx + 1) * grid.dx
    yq = yc[None, :, None] + rule.nodes[None, None, :] * grid.dy
    want_edge = xe[:, None, None] ** 2 + 0.5 * yq
    assert np.max(np.abs(bath.edge_x - want_edge)) < 1e-13

    # gradient samples at interior quadrature points
    assert abs(bath.dbdx[3, 2, 1, 1] - 2.0 * (xc[3] + rule.nodes[1] * grid.dx)) < 1e-13
    assert np.max(np.abs(bath.dbdy - 0.5)) < 1e-14


def test_bathymetry_ghost_padding_periodic():
    grid = GridSpec(10, 10, 0.0, 1.0, 0.0, 1.0)
    rule = gauss_legendre(4)
    b = lambda x, y: np.sin(2 * np.pi * x) * np.cos(2 * np.pi * y)
    bath = sample_bathymetry(b, grid, rule, bc=periodic_bc())
    g = grid.ghost
    np.testing.assert_allclose(
        bath.cell_avg[:g, g:-g], bath.cell_avg[grid.nx : grid.nx + g, g:-g],
        atol=1e-15)
