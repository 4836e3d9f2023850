"""Catalog data: closed forms, steady references, inits, error measures."""

import numpy as np
import pytest

from swefv.grid import GridSpec
from swefv.quadrature import gauss_legendre
from swefv.scenarios import (
    CATALOG,
    G_CHANNEL,
    cell_average,
    channel_b,
    channel_db,
    channel_deviation,
    channel_steady_init,
    convergence_orders,
    error_norms,
    get_scenario,
    island_b,
    island_db,
    lake_wet_b,
    lake_wet_db,
    setup,
    steady_height,
    steady_reference,
    tsunami_b,
    tsunami_db,
    tsunami_inflow,
    vortex_averages,
    vortex_state,
)

RULE = gauss_legendre(4)

EXPECTED_NAMES = {
    "vortex",
    "lake-at-rest-wet",
    "lake-at-rest-wetdry",
    "lake-at-rest-perturbation",
    "channel-subcritical",
    "channel-supercritical",
    "island-flood",
    "tsunami-three-obstacles",
}


def test_catalog_names_and_lookup():
    assert set(CATALOG) == EXPECTED_NAMES
    for name in EXPECTED_NAMES:
        scn = get_scenario(name)
        assert scn.name == name
        assert scn.t_final > 0.0 and 0.0 < scn.cfl <= 1.0
    with pytest.raises(KeyError, match="available"):
        get_scenario("no-such-case")


def test_vortex_state_center_and_far_field():
    h, u, v = vortex_state(1.5, 1.5, 0.0)
    # 1 - 0.1 exp(-1/arctan(1)^3) at the dip bottom, velocity of the carrier
    assert abs(float(h) - 0.9873067293587803) < 1e-15
    assert float(u) == 2.0 and float(v) == 3.0
    # compact support: identity background outside unit distance
    x = np.array([0.2, 0.5, 2.9])
    y = np.array([0.1, 2.9, 0.3])
    h, u, v = vortex_state(x, y, 0.0)
    assert np.all(h == 1.0) and np.all(u == 2.0) and np.all(v == 3.0)


def test_vortex_state_travels_and_wraps():
    rng = np.random.default_rng(5)
    x = rng.uniform(0.0, 3.0, size=40)
    y = rng.uniform(0.0, 3.0, size=40)
    t = 0.37
    h0, u0, v0 = vortex_state(x, y, 0.0)
    ht, ut, vt = vortex_state(x + 2.0 * t, y + 3.0 * t, t)
    np.testing.assert_allclose(ht, h0, rtol=0, atol=1e-14)
    np.testing.assert_allclose(ut, u0, rtol=0, atol=1e-13)
    np.testing.assert_allclose(vt, v0, rtol=0, atol=1e-13)
    # periodic in both directions with period 3
    hp, up, vp = vortex_state(x + 3.0, y - 6.0, t)
    hq, uq, vq = vortex_state(x, y, t)
    np.testing.assert_allclose(hp, hq, rtol=0, atol=1e-15)
    np.testing.assert_allclose(up, uq, rtol=0, atol=1e-14)


def test_vortex_averages_background_cells_exact():
    grid = GridSpec(24, 24, 0.0, 3.0, 0.0, 3.0)
    U = vortex_averages(grid, RULE, 0.0)
    assert U.shape == (3, 24, 24)
    # corner cell is a unit distance away from the center: constant state
    assert abs(U[0, 0, 0] - 1.0) < 1e-15
    assert abs(U[1, 0, 0] - 2.0) < 1e-14
    assert abs(U[2, 0, 0] - 3.0) < 1e-14
    assert U[0].min() < 1.0 - 1e-3  # the dip is sampled


def test_cell_average_polynomial_exactness():
    # 4-point Gauss is exact through degree 7 in each direction
    grid = GridSpec(5, 4, 0.0, 1.0, -1.0, 1.0)

    def fn(x, y):
        return x**3 * y**2

    avg = cell_average(fn, grid, RULE)
    xc, yc = grid.centers()
    xl = xc - 0.5 * grid.dx
    xr = xc + 0.5 * grid.dx
    yl = yc - 0.5 * grid.dy
    yr = yc + 0.5 * grid.dy
    ix = (xr**4 - xl**4) / 4.0 / grid.dx
    iy = (yr**3 - yl**3) / 3.0 / grid.dy
    np.testing.assert_allclose(avg, ix[:, None] * iy[None, :], rtol=1e-13)


def test_lake_wet_init_is_discrete_equilibrium():
    scn = get_scenario("lake-at-rest-wet")
    grid, bath, fld = setup(scn, nx=12, ny=12)
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    h, qx, qy = fld.interior()
    np.testing.assert_allclose(h + b, 1.0, rtol=0, atol=1e-15)
    assert np.all(qx == 0.0) and np.all(qy == 0.0)
    assert h.min() > 0.5  # fully wet


def test_lake_wetdry_init_clips_at_shore():
    scn = get_scenario("lake-at-rest-wetdry")
    grid, bath, fld = setup(scn, nx=20, ny=20)
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    h = fld.interior()[0]
    assert h.min() == 0.0  # the island peak (height 1) breaks the surface
    wet = h > 0.0
    np.testing.assert_allclose(h[wet] + b[wet], 0.7, rtol=0, atol=1e-15)
    assert np.all(b[~wet] >= 0.7)


def test_steady_reference_values_and_validation():
    sub = steady_reference(4.42, (2.0, 0.0), "subcritical", g=G_CHANNEL)
    sup = steady_reference(24.0, (2.0, 0.0), "supercritical", g=G_CHANNEL)
    assert abs(sub.E0 - 22.06605) < 1e-10
    assert abs(sup.E0 - 91.624) < 1e-10
    with pytest.raises(ValueError, match="branch"):
        steady_reference(1.0, (1.0, 0.0), "transonic")
    with pytest.raises(ValueError, match="depth"):
        steady_reference(1.0, (0.0, 0.0), "subcritical")
    # Froude mismatch both ways
    with pytest.raises(ValueError, match="not subcritical"):
        steady_reference(4.42, (0.5, 0.0), "subcritical", g=G_CHANNEL)
    with pytest.raises(ValueError, match="not supercritical"):
        steady_reference(4.42, (2.0, 0.0), "supercritical", g=G_CHANNEL)


def test_steady_height_branches_and_choking():
    x = np.linspace(0.0, 25.0, 201)
    b = channel_b(x)
    for q0, branch in ((4.42, "subcritical"), (24.0, "supercritical")):
        ref = steady_reference(q0, (2.0, 0.0), branch, g=G_CHANNEL)
        h = steady_height(ref, b)
        E = 0.5 * q0 * q0 / (h * h) + G_CHANNEL * (h + b)
        assert np.max(np.abs(E - ref.E0)) < 1e-12
        hc = (q0 * q0 / G_CHANNEL) ** (1.0 / 3.0)
        if branch == "subcritical":
            assert np.all(h > hc)
        else:
            assert np.all(h < hc)
    still = steady_reference(0.0, (2.0, 0.0), "subcritical", g=G_CHANNEL)
    np.testing.assert_allclose(steady_height(still, b), 2.0 - b, rtol=1e-15)
    ref = steady_reference(4.42, (2.0, 0.0), "subcritical", g=G_CHANNEL)
    with pytest.raises(ValueError, match="choked"):
        steady_height(ref, np.array([0.0, 3.0]))


@pytest.mark.parametrize("name", ["channel-subcritical", "channel-supercritical"])
def test_channel_steady_init_sits_on_reference(name):
    scn = get_scenario(name)
    grid, bath, _ = setup(scn, nx=40, ny=3)
    fld = channel_steady_init(scn, grid, bath)
    dq, dE = channel_deviation(fld, bath, scn)
    assert dq == 0.0
    assert dE < 1e-11


def test_island_flood_init_unit_velocity_where_wet():
    scn = get_scenario("island-flood")
    grid, bath, fld = setup(scn, nx=100, ny=30)
    h, qx, qy = fld.interior()
    assert h.min() == 0.0 and np.any(h > 0.6)
    np.testing.assert_array_equal(qx, h)
    assert np.all(qy == 0.0)


def test_tsunami_init_dry_interior_and_scaled_discharge():
    scn = get_scenario("tsunami-three-obstacles")
    grid, bath, fld = setup(scn, nx=96, ny=32)
    h, qx, qy = fld.interior()
    assert h.min() >= 0.0
    np.testing.assert_allclose(qx, 4.0 * h, rtol=0, atol=1e-14)
    assert np.all(qy == 0.0)
    xc, _ = grid.centers()
    dry = xc > -3.5 + grid.dx
    assert np.all(h[dry, :] == 0.0)
    # wet column far from the cut sits at level 1.5 over the linear ramp
    wet = xc < -4.0
    b = bath.cell_avg[grid.interior_x, grid.interior_y]
    np.testing.assert_allclose(
        h[wet, :] + b[wet, :], 1.5, rtol=0, atol=1e-12)


def test_tsunami_inflow_pulse():
    assert abs(tsunami_inflow(0.0) - 6.0) < 1e-15
    assert tsunami_inflow(0.5) == 0.0  # cosine zero crossing at half period
    assert tsunami_inflow(12.0) < 1e-9
    ts = np.linspace(0.0, 4.0, 200)
    assert np.all(tsunami_inflow(ts) >= 0.0)


def _fd_gradient(fn, x, y, eps=1e-6):
    gx = (fn(x + eps, y) - fn(x - eps, y)) / (2 * eps)
    gy = (fn(x, y + eps) - fn(x, y - eps)) / (2 * eps)
    return gx, gy


@pytest.mark.parametrize(
    "b_fn,db_fn,box",
    [
        (lake_wet_b, lake_wet_db, (0.0, 1.0, 0.0, 1.0)),
        (island_b, island_db, (-0.95, 0.95, -0.2, 0.2)),
        (channel_b, channel_db, (9.0, 16.0, 0.0, 1.0)),
    ],
)
def test_analytic_gradients_match_finite_differences(b_fn, db_fn, box):
    rng = np.random.default_rng(31)
    x = rng.uniform(box[0], box[1], size=60)
    y = rng.uniform(box[2], box[3], size=60)
    if b_fn is island_b:
        keep = x * x + y * y < 0.9
        x, y = x[keep], y[keep]
    gx, gy = db_fn(x, y)
    fx, fy = _fd_gradient(b_fn, x, y)
    np.testing.assert_allclose(gx, fx, rtol=1e-6, atol=1e-8)
    np.testing.assert_allclose(gy, fy, rtol=1e-6, atol=1e-8)


def test_tsunami_gradient_away_from_kinks():
    rng = np.random.default_rng(32)
    x = rng.uniform(-4.5, 6.5, size=300)
    y = rng.uniform(-1.9, 1.9, size=300)
    # the ramp slope jumps at x = 0 and 3; each cone has a rim and an apex
    keep = (np.abs(x) > 0.05) & (np.abs(x - 3.0) > 0.05)
    for xc, yc in ((1.0, -1.0), (1.0, 1.0), (2.0, 0.0)):
        d = np.sqrt((x - xc) ** 2 + (y - yc) ** 2)
        keep &= (np.abs(d - 0.5) > 0.05) & (d > 0.05)
    x, y = x[keep], y[keep]
    gx, gy = tsunami_db(x, y)
    fx, fy = _fd_gradient(tsunami_b, x, y)
    np.testing.assert_allclose(gx, fx, rtol=1e-5, atol=1e-8)
    np.testing.assert_allclose(gy, fy, rtol=1e-5, atol=1e-8)


def test_island_bump_compact_support():
    th = np.linspace(0.0, 2 * np.pi, 50)
    assert np.all(island_b(np.cos(th), np.sin(th)) == 0.0)
    assert np.all(island_b(1.5 * np.cos(th), 1.5 * np.sin(th)) == 0.0)
    assert abs(island_b(0.0, 0.0) - 1.0) < 1e-15


def test_error_norms_is_cellwise_l1():
    scn = get_scenario("vortex")
    grid, _, fld = setup(scn, nx=10, ny=10)
    ref = fld.interior().copy()
    ref[0] += 0.25  # uniform offset integrates to area * offset
    ref[2] -= 0.5
    errs = error_norms(fld, ref, grid)
    area = 3.0 * 3.0
    np.testing.assert_allclose(errs, [0.25 * area, 0.0, 0.5 * area], atol=1e-13)


def test_convergence_orders_recovers_synthetic_slope():
    sizes = [10, 20, 40]
    errs = [[1.0, 2.0], [1.0 / 32.0, 2.0 / 8.0], [1.0 / 1024.0, 2.0 / 64.0]]
    orders = convergence_orders(errs, sizes)
    np.testing.assert_allclose(orders, [[5.0, 3.0], [5.0, 3.0]], rtol=1e-13)


def test_setup_mesh_override_and_vortex_consistency():
    scn = get_scenario("vortex")
    grid, bath, fld = setup(scn, nx=12, ny=7)
    assert (grid.nx, grid.ny) == (12, 7)
    assert bath.cell_avg.shape == (grid.nxt, grid.nyt)
    np.testing.assert_allclose(
        fld.interior(), vortex_averages(grid, RULE, 0.0), rtol=0, atol=1e-15)
    assert np.all(bath.cell_avg == 0.0)
