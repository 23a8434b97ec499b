import math

import numpy as np
import pytest

from curvlab.errors import DomainError, NumericError
from curvlab.specfun import (
    BesselOrder,
    bessel_i,
    bessel_i_prime,
    bessel_i_ratio,
    bessel_k,
    bessel_k_prime,
    bessel_k_ratio,
    erf,
    gamma_fn,
    log_bessel_i,
    log_bessel_k,
)


def test_erf_values():
    assert erf(0.0) == 0.0
    assert erf(1.0) == pytest.approx(0.8427007929, abs=1e-10)
    assert erf(-1.0) == pytest.approx(-0.8427007929, abs=1e-10)
    with pytest.raises(DomainError):
        erf(np.inf)


def test_gamma_half_integers():
    assert gamma_fn(0.5) == pytest.approx(math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(2.5) == pytest.approx(0.75 * math.sqrt(math.pi), rel=1e-14)
    assert gamma_fn(5.0) == pytest.approx(24.0, rel=1e-14)


@pytest.mark.parametrize('x', [0.0, -1.0])
def test_gamma_rejects_non_positive(x):
    with pytest.raises(DomainError):
        gamma_fn(x)


def test_bessel_half_order_closed_forms():
    # I_{1/2}(x) = sqrt(2/(pi x)) sinh x, K_{1/2}(x) = sqrt(pi/(2x)) e^{-x}
    assert bessel_i(0.5, 1.0) == pytest.approx(0.9376748883, abs=1e-10)
    assert bessel_k(0.5, 1.0) == pytest.approx(0.4610685044, abs=1e-10)
    x = np.array([0.3, 2.0, 7.5])
    np.testing.assert_allclose(bessel_i(0.5, x), np.sqrt(2 / (np.pi * x)) * np.sinh(x), rtol=1e-13)
    np.testing.assert_allclose(bessel_k(0.5, x), np.sqrt(np.pi / (2 * x)) * np.exp(-x), rtol=1e-13)


@pytest.mark.parametrize('nu', [0.0, 0.5, 1.0])
@pytest.mark.parametrize('x', [0.1, 1.0, 25.0])
def test_wronskian(nu, x):
    w = bessel_i(nu, x) * bessel_k_prime(nu, x) - bessel_i_prime(nu, x) * bessel_k(nu, x)
    assert w == pytest.approx(-1.0 / x, rel=1e-10)


def test_ratios_stay_finite_for_large_arguments():
    # I_0(1e4) desborda, el cociente no
    ratio = bessel_i_ratio(0.5, 1e4 - 1.0, 1e4)
    assert ratio == pytest.approx(math.exp(-1.0), rel=1e-3)
    ratio_k = bessel_k_ratio(0.5, 1e4 + 1.0, 1e4)
    assert ratio_k == pytest.approx(math.exp(-1.0), rel=1e-3)


def test_log_forms_match_direct_values():
    assert log_bessel_i(1.0, 3.0) == pytest.approx(math.log(bessel_i(1.0, 3.0)), rel=1e-13)
    assert log_bessel_k(0.0, 3.0) == pytest.approx(math.log(bessel_k(0.0, 3.0)), rel=1e-13)
    assert np.isfinite(log_bessel_i(0.5, 1e4))


def test_invalid_order_and_argument():
    with pytest.raises(DomainError):
        BesselOrder(2.0)
    with pytest.raises(DomainError):
        bessel_i(0.3, 1.0)
    with pytest.raises(DomainError):
        bessel_k(0.0, 0.0)
    with pytest.raises(DomainError):
        bessel_i(0.0, np.nan)


def test_order_for_dimension():
    assert BesselOrder.for_dimension(2).nu == 0.0
    assert BesselOrder.for_dimension(3).nu == 0.5


def test_bessel_k_underflow_is_reported():
    with pytest.raises(NumericError):
        bessel_k(0.0, 800.0)
    with pytest.raises(NumericError):
        bessel_k_prime(0.5, np.array([1.0, 800.0]))
    expected = -800.0 + 0.5 * math.log(math.pi / 1600.0)
    assert log_bessel_k(0.5, 800.0) == pytest.approx(expected, rel=1e-12)
