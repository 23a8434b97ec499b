import math

import numpy as np
import pytest

from curvlab.audit import maximum_principle_check
from curvlab.closedforms import interface_constant, phi_profile
from curvlab.elliptic import (
    CartesianGrid2D,
    FlatSolution,
    RadialGrid,
    solve_cartesian_2d,
    solve_ellipse_fitted,
    solve_radial_bessel,
    solve_radial_fd,
    transmission_residual,
)
from curvlab.errors import DomainError


@pytest.mark.parametrize('lam', [1e2, 1e4, 1e6])
def test_bessel_interface_value_approaches_interface_constant(ball3, cond, lam):
    sol = solve_radial_bessel(ball3, cond, lam)
    # sqrt(lambda)(B - c_inf) -> -2/3 para la bola unitaria en N = 3
    scaled = math.sqrt(lam) * (sol.interface_value - interface_constant(cond))
    assert scaled == pytest.approx(-2.0 / 3.0, abs=3.0 / math.sqrt(lam))


@pytest.mark.parametrize('dim', [2, 3])
def test_bessel_solves_the_equation(cond, dim):
    from curvlab.geometry import Ball
    ball = Ball(dim, 1.0)
    sol = solve_radial_bessel(ball, cond, 400.0)
    radii = np.array([0.3, 0.8, 0.97, 1.03, 1.2, 1.6])
    assert np.max(np.abs(sol.residual(radii))) < 1e-9
    report = transmission_residual(sol, ball, cond)
    assert report.flux_residual < 1e-9 * math.sqrt(400.0)


def test_bessel_values_are_bounded(ball3, cond):
    sol = solve_radial_bessel(ball3, cond, 1e4)
    values = sol.sample_values()
    assert np.all(np.isfinite(values))
    assert maximum_principle_check(sol).passed
    assert sol.value(0.0) == pytest.approx(1.0, abs=1e-12)
    assert sol.evaluate(np.array([0.0, 0.0, 5.0])) == pytest.approx(0.0, abs=1e-12)


def test_bessel_rejects_non_ball(ellipse, cond):
    with pytest.raises(DomainError):
        solve_radial_bessel(ellipse, cond, 10.0)
    with pytest.raises(DomainError):
        solve_radial_bessel(ellipse, cond, -1.0)


def test_flat_solution_is_the_profile(halfspace, cond):
    sol = FlatSolution(halfspace, cond, 100.0)
    pts = np.array([[0.3, 0.1, 0.0], [0.0, 0.0, 0.05], [0.0, 0.0, -0.2]])
    expected = phi_profile(10.0 * pts[:, -1], cond)
    np.testing.assert_allclose(sol.evaluate(pts), expected, rtol=1e-14)
    assert sol.evaluate(pts[0]) == pytest.approx(interface_constant(cond))


def test_radial_grid_has_interface_node(ball3, cond):
    grid = RadialGrid.graded(ball3, cond, 1e3)
    assert grid.radius == ball3.radius
    assert grid.nodes[0] == 0.0
    assert grid.finest_spacing <= 0.02 * math.sqrt(1.0 / 1e3) * (1 + 1e-12)
    assert grid.stretch == pytest.approx(1.02)
    coarse = grid.coarsened()
    assert coarse.radius == ball3.radius
    fine = grid.refined()
    assert fine.radius == ball3.radius
    assert len(fine.nodes) == 2 * len(grid.nodes) - 1


@pytest.mark.parametrize('lam', [1e2, 1e4])
def test_radial_fd_matches_bessel(ball3, cond, lam):
    fd = solve_radial_fd(ball3, cond, lam)
    oracle = solve_radial_bessel(ball3, cond, lam).value(fd.grid.nodes)
    assert np.max(np.abs(fd.values - oracle)) < 1e-3
    report = transmission_residual(fd, ball3, cond, order=2)
    assert report.flux_residual < 0.05 * math.sqrt(lam)


def test_radial_fd_is_uniform_on_sphere(ball3, cond):
    fd = solve_radial_fd(ball3, cond, 1e3)
    values = fd.evaluate(ball3.interface_samples(8))
    assert np.ptp(values) < 1e-12


def test_cartesian_grid_for_shape(ball2, cond):
    grid = CartesianGrid2D.for_shape(ball2, cond, lam=100.0, cells=64)
    assert grid.margin == pytest.approx(12.0 * math.sqrt(4.0 / 100.0))
    assert grid.x0 + grid.nx * grid.h >= 1.0 + grid.margin - 1e-12
    with pytest.raises(DomainError):
        CartesianGrid2D.for_shape(ball2, cond)


@pytest.mark.slow
def test_cartesian_solver_on_disk(ball2, cond):
    lam = 100.0
    grid = CartesianGrid2D.for_shape(ball2, cond, lam=lam, cells=256)
    field = solve_cartesian_2d(ball2, cond, lam, grid=grid)
    exact = solve_radial_bessel(ball2, cond, lam)
    q = ball2.interface_samples(8)
    assert np.max(np.abs(field.evaluate(q) - exact.evaluate(q))) < 0.1
    assert field.evaluate(np.array([0.0, 0.0])) == pytest.approx(1.0, abs=1e-3)
    assert maximum_principle_check(field, tolerance=1e-8).passed


@pytest.mark.slow
def test_ellipse_fitted_solver_orders_vertices(ellipse, cond):
    lam = 1e3
    field = solve_ellipse_fitted(ellipse, cond, lam)
    c_inf = interface_constant(cond)
    u_major = field.evaluate(np.array([2.0, 0.0]))
    u_minor = field.evaluate(np.array([0.0, 1.0]))
    # mayor curvatura, mayor pérdida de calor
    assert u_major < u_minor < c_inf
    assert maximum_principle_check(field, tolerance=1e-8).passed


@pytest.mark.parametrize('c', [0.5, 2.0])
def test_bessel_scaling_covariance(c):
    from curvlab.asymptotics import extract_curvature
    from curvlab.closedforms import Conductivity
    from curvlab.geometry import Ball
    base_cond, scaled_cond = Conductivity(1.0, 4.0), Conductivity(c ** 2, 4.0 * c ** 2)
    assert interface_constant(scaled_cond) == pytest.approx(interface_constant(base_cond), rel=1e-14)
    r = np.array([0.4, 0.9, 1.0, 1.2, 2.0])
    for lam in (1e2, 1e4, 1e6):
        base = solve_radial_bessel(Ball(3, 1.0), base_cond, lam)
        scaled = solve_radial_bessel(Ball(3, c), scaled_cond, lam)
        np.testing.assert_allclose(scaled.value(c * r), base.value(r), rtol=1e-10, atol=1e-300)
    lam = 1e6
    limit = math.sqrt(lam) * (solve_radial_bessel(Ball(3, 1.0), base_cond, lam).interface_value
                              - interface_constant(base_cond))
    scaled_limit = math.sqrt(lam) * (solve_radial_bessel(Ball(3, c), scaled_cond, lam).interface_value
                                     - interface_constant(scaled_cond))
    assert scaled_limit == pytest.approx(limit, rel=1e-8)
    curvature = extract_curvature(limit, base_cond, 3)
    assert extract_curvature(scaled_limit, scaled_cond, 3) == pytest.approx(curvature / c, rel=1e-8)
