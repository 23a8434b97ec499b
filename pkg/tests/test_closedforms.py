import math

import numpy as np
import pytest

from curvlab.closedforms import (
    Conductivity,
    F_profile,
    f_profile,
    formula_constants,
    interface_constant,
    phi_prime,
    phi_profile,
    phi_second,
    psi,
    psi_lambda,
    s_star,
    s_star_prime,
    s_star_second,
)
from curvlab.constants import SIDE_INSIDE, SIDE_OUTSIDE
from curvlab.errors import DomainError
from curvlab.specfun import gamma_fn


def test_conductivity_validation():
    with pytest.raises(DomainError):
        Conductivity(-1.0, 4.0)
    with pytest.raises(DomainError):
        Conductivity(1.0, 0.0)
    with pytest.raises(DomainError):
        Conductivity(1.0, math.inf)
    with pytest.raises(DomainError):
        Conductivity(True, 1.0)
    cond = Conductivity(1, 4)
    assert cond.mu == 1.0
    assert cond.M == 4.0
    assert cond.sqrt_sum == 3.0


def test_formula_constants(cond):
    consts = formula_constants(cond)
    assert consts.interface_constant == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert consts.elliptic_coeff == pytest.approx(1.0 / 3.0, rel=1e-15)
    assert consts.parabolic_coeff == pytest.approx(4.0 / (9.0 * math.sqrt(math.pi)), rel=1e-15)
    assert consts.elliptic_coeff == pytest.approx(gamma_fn(2.5) * consts.parabolic_coeff, rel=1e-14)


def test_f_and_F_limits():
    assert f_profile(0.0) == 0.5
    assert f_profile(-np.inf) == 0.0
    assert f_profile(np.inf) == 1.0
    assert F_profile(0.0) == 0.5
    assert F_profile(50.0) == pytest.approx(1.0)
    assert F_profile(-50.0) == pytest.approx(0.0, abs=1e-20)


def test_phi_transmission_conditions(cond):
    assert phi_profile(0.0, cond) == pytest.approx(interface_constant(cond), rel=1e-15)
    # continuidad de sigma Phi'
    flux_in = cond.sigma_plus * phi_prime(0.0, cond, SIDE_INSIDE)
    flux_out = cond.sigma_minus * phi_prime(0.0, cond, SIDE_OUTSIDE)
    assert flux_in == pytest.approx(flux_out, rel=1e-14)
    assert phi_profile(40.0, cond) == pytest.approx(1.0, abs=1e-12)
    assert phi_profile(-80.0, cond) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize('eta', [-3.0, -0.5, 0.7, 2.0])
def test_phi_solves_profile_equation(cond, eta):
    sigma = cond.sigma_plus if eta > 0 else cond.sigma_minus
    chi = 1.0 if eta > 0 else 0.0
    residual = -sigma * phi_second(eta, cond) + phi_profile(eta, cond) - chi
    assert abs(residual) < 1e-14


def test_phi_is_monotone(cond):
    eta = np.linspace(-10, 10, 401)
    assert np.all(np.diff(phi_profile(eta, cond)) > 0)


def test_psi_on_interface_equals_interface_constant(ball3, cond):
    q = np.array([1.0, 0.0, 0.0])
    assert psi(q, 0.01, ball3, cond) == pytest.approx(1.0 / 3.0, rel=1e-14)
    assert psi_lambda(q, 100.0, ball3, cond) == pytest.approx(1.0 / 3.0, rel=1e-14)


def test_psi_in_unit_interval(ball3, cond):
    pts = np.column_stack([np.linspace(0.55, 1.45, 31), np.zeros(31), np.zeros(31)])
    values = psi(pts, 0.01, ball3, cond)
    assert np.all((values > 0) & (values < 1))
    assert np.all(np.diff(values) < 0)


def test_psi_rejects_bad_arguments(ball3, cond):
    with pytest.raises(DomainError):
        psi(np.array([1.0, 0.0, 0.0]), 0.0, ball3, cond)
    with pytest.raises(DomainError):
        psi(np.array([0.0, 0.0, 0.0]), 0.1, ball3, cond)
    with pytest.raises(DomainError):
        psi_lambda(np.array([1.0, 0.0, 0.0]), -1.0, ball3, cond)


def test_s_star_at_zero(cond):
    # curvature_term = -(N-1) H = -2 para la bola unitaria en N = 3
    assert s_star(0.0, cond, -2.0) == pytest.approx(-2.0 / 3.0, rel=1e-14)
    assert s_star(0.0, cond, 0.0) == 0.0


@pytest.mark.parametrize('z', [-2.5, -0.4, 0.3, 1.7])
def test_s_star_solves_forced_equation(cond, z):
    term = -2.0
    sigma = cond.sigma_plus if z > 0 else cond.sigma_minus
    side = SIDE_INSIDE if z > 0 else SIDE_OUTSIDE
    forcing = term * sigma * phi_prime(z, cond, side)
    residual = -sigma * s_star_second(z, cond, term) + s_star(z, cond, term) - forcing
    assert abs(residual) < 1e-13


def test_s_star_flux_continuity(cond):
    term = -2.0
    left = s_star_prime(-1e-12, cond, term)
    right = s_star_prime(1e-12, cond, term)
    assert cond.sigma_minus * left == pytest.approx(cond.sigma_plus * right, abs=1e-10)


def test_profile_second_derivatives():
    xi = np.array([-1.5, 0.0, 0.7])
    h = 1e-5
    from curvlab.closedforms import F_prime, F_second, f_prime, f_second
    np.testing.assert_allclose(f_second(xi), (f_prime(xi + h) - f_prime(xi - h)) / (2 * h), atol=1e-8)
    assert F_second(0.0, SIDE_INSIDE) == pytest.approx(-0.5)
    assert F_second(0.0, SIDE_OUTSIDE) == pytest.approx(0.5)
    assert F_second(0.4) == pytest.approx((F_prime(0.4 + h) - F_prime(0.4 - h)) / (2 * h), abs=1e-8)


def _radial_laplacian(fn, r, h=1e-4):
    point = lambda rr: np.array([rr, 0.0, 0.0])
    u0, up, um = fn(point(r)), fn(point(r + h)), fn(point(r - h))
    return (up - 2 * u0 + um) / h ** 2 + (2.0 / r) * (up - um) / (2 * h)


@pytest.mark.parametrize('r', [0.9, 1.1])
def test_psi_heat_rhs_matches_finite_differences(ball3, cond, r):
    from curvlab.closedforms import psi_heat_rhs
    t, dt = 0.01, 1e-7
    x = np.array([r, 0.0, 0.0])
    sigma = cond.sigma_plus if r < 1.0 else cond.sigma_minus
    psi_t = (psi(x, t + dt, ball3, cond) - psi(x, t - dt, ball3, cond)) / (2 * dt)
    lap = _radial_laplacian(lambda p: psi(p, t, ball3, cond), r)
    assert psi_heat_rhs(x, t, ball3, cond) == pytest.approx(psi_t - sigma * lap, rel=1e-4, abs=1e-5)


@pytest.mark.parametrize('r', [0.9, 1.2])
def test_psi_lambda_rhs_matches_finite_differences(ball3, cond, r):
    from curvlab.closedforms import psi_lambda_helmholtz_rhs
    lam = 100.0
    x = np.array([r, 0.0, 0.0])
    sigma = cond.sigma_plus if r < 1.0 else cond.sigma_minus
    chi = 1.0 if r < 1.0 else 0.0
    value = float(psi_lambda(x, lam, ball3, cond))
    lap = _radial_laplacian(lambda p: float(psi_lambda(p, lam, ball3, cond)), r)
    expected = -sigma * lap + lam * value - lam * chi
    assert psi_lambda_helmholtz_rhs(x, lam, ball3, cond) == pytest.approx(expected, rel=1e-4, abs=1e-4)


def test_barrier_rhs_vanishes_on_flat_interface(halfspace, cond):
    from curvlab.closedforms import psi_heat_rhs, psi_lambda_helmholtz_rhs
    x = np.array([0.0, 0.0, 0.05])
    assert psi_heat_rhs(x, 0.01, halfspace, cond) == 0.0
    assert psi_lambda_helmholtz_rhs(x, 100.0, halfspace, cond) == 0.0
