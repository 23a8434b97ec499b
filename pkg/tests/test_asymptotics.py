import math

import numpy as np
import pytest

from curvlab.asymptotics import (
    MeasureTrace,
    blowup_profile,
    cumulative_excess,
    ell_measure,
    expected_lambda_limit,
    expected_time_limit,
    extract_curvature,
    geometric_subsequence,
    interface_uniformity,
    isothermic_spread,
    karamata_check,
    lambda_functional,
    laplace_stieltjes,
    measure_from_function,
    richardson_extrapolate,
    standard_measure,
    time_functional,
)
from curvlab.closedforms import interface_constant
from curvlab.elliptic import solve_radial_bessel
from curvlab.errors import DomainError
from curvlab.parabolic import TimeTrace

TIMES = np.geomspace(1e-4, 1.0, 200)


def _trace(values, times=TIMES):
    return TimeTrace(point=(1.0, 0.0, 0.0), times=times, values=values)


# Richardson

def test_richardson_linear_model_is_exact():
    h = np.array([0.4, 0.2, 0.1, 0.05])
    result = richardson_extrapolate(zip(h, 5.0 + 2.0 * h))
    assert result.limit_estimate == pytest.approx(5.0, abs=1e-12)
    assert result.error_estimate < 1e-12
    assert result.model_consistent


def test_richardson_removes_two_corrections():
    h = np.array([0.1, 0.05, 0.025])
    result = richardson_extrapolate(zip(h, 1.0 + h + h ** 2), levels=2)
    assert result.limit_estimate == pytest.approx(1.0, abs=1e-3)
    assert result.levels == 2
    frame = result.to_frame()
    assert list(frame.columns) == ['parameter', 'value', 'extrapolant', 'error']
    assert len(frame) == 3


def test_richardson_constant_sequence():
    result = richardson_extrapolate([(1.0, 3.0), (0.5, 3.0), (0.25, 3.0)])
    assert result.limit_estimate == 3.0
    assert result.error_estimate == 0.0
    assert result.model_consistent


def test_richardson_flags_oscillating_sequence():
    h = [0.4, 0.2, 0.1, 0.05, 0.025]
    result = richardson_extrapolate(zip(h, [1.0, 2.0, 1.0, 2.0, 1.0]))
    assert not result.model_consistent
    assert 'model-inconsistent' in result.model


def test_richardson_exponent_half():
    h = np.array([0.16, 0.04, 0.01, 0.0025])
    result = richardson_extrapolate(zip(h, 2.0 - 3.0 * np.sqrt(h)), exponent=0.5, levels=1)
    assert result.limit_estimate == pytest.approx(2.0, abs=1e-12)


@pytest.mark.parametrize('seq', [
    [(0.1, 1.0), (0.05, 1.0)],
    [(0.1, 1.0), (0.2, 1.0), (0.05, 1.0)],
    [(0.1, 1.0), (0.05, np.nan), (0.025, 1.0)],
])
def test_richardson_rejects_bad_sequences(seq):
    with pytest.raises(DomainError):
        richardson_extrapolate(seq)


def test_richardson_footer():
    result = richardson_extrapolate([(0.4, 5.8), (0.2, 5.4), (0.1, 5.2)])
    footer = result.footer(expected=5.0)
    assert footer['rel_err'] == pytest.approx(0.0, abs=1e-12)
    assert set(footer) == {'limit', 'error', 'model', 'expected', 'rel_err'}


def test_geometric_subsequence():
    assert geometric_subsequence([1, 2, 4, 8, 16, 32], factor=4, count=5) == [0, 2, 4]
    assert geometric_subsequence([1, 2, 4, 8, 16, 32], factor=2, count=3) == [0, 1, 2]
    with pytest.raises(DomainError):
        geometric_subsequence([1, 2], factor=1.0)


# Funcional en lambda

def test_lambda_functional_from_bessel_oracle(ball3, cond):
    lams = [1e2, 1e3, 1e4, 1e5, 1e6]
    values = [(lam, solve_radial_bessel(ball3, cond, lam).interface_value) for lam in lams]
    seq = lambda_functional(values, cond)
    np.testing.assert_allclose(seq.step_sizes(), np.asarray(lams) ** -0.5)
    result = seq.extrapolate()
    expected = expected_lambda_limit(cond, -2.0)
    assert expected == pytest.approx(-2.0 / 3.0)
    assert result.limit_estimate == pytest.approx(expected, rel=5e-3)
    assert extract_curvature(result.limit_estimate, cond, 3) == pytest.approx(1.0, rel=5e-3)


def test_lambda_functional_validation(cond):
    with pytest.raises(DomainError):
        lambda_functional([(1.0, 0.3), (2.0, 0.3)], cond)
    with pytest.raises(DomainError):
        lambda_functional([(3.0, 0.3), (2.0, 0.3), (4.0, 0.3)], cond)


def test_extract_curvature_routes(cond):
    assert extract_curvature(expected_time_limit(cond, -2.0), cond, 3, route='time') == pytest.approx(1.0)
    assert extract_curvature(expected_lambda_limit(cond, -1.0), cond, 2) == pytest.approx(1.0)
    with pytest.raises(DomainError):
        extract_curvature(1.0, cond, 3, route='space')


def test_interface_uniformity_and_spread():
    report = interface_uniformity([1.0, 2.1, 0.5], [1.0, 2.0, 0.5])
    assert report.worst_index == 1
    assert report.max_rel_error == pytest.approx(0.05)
    np.testing.assert_allclose(isothermic_spread(np.array([[1.0, 2.0, 3.0], [2.0, 2.0, 2.0]])), [2.0, 0.0])
    traces = [_trace(np.full(len(TIMES), v)) for v in (0.2, 0.5)]
    np.testing.assert_allclose(isothermic_spread(traces), 0.3)


# Funcional temporal

def test_time_functional_on_exact_square_root_trace(cond):
    C = -0.75
    trace = _trace(interface_constant(cond) + C * np.sqrt(TIMES))
    seq = time_functional(trace, cond)
    assert seq.parameters[0] == pytest.approx(1e-3, rel=0.05)
    np.testing.assert_allclose(seq.values, (2.0 / 3.0) * C, rtol=1e-10)
    assert seq.max_head_uncertainty < 1e-12
    assert seq.head_constant == pytest.approx(C)


def test_time_functional_extrapolates_linear_correction(cond):
    C, D = -1.0, 0.5
    trace = _trace(interface_constant(cond) + C * np.sqrt(TIMES) + D * TIMES)
    result = time_functional(trace, cond).extrapolate(factor=4, count=5)
    assert result.limit_estimate == pytest.approx((2.0 / 3.0) * C, abs=5e-3)


def test_cumulative_excess_head_window(cond):
    times = np.geomspace(1e-4, 1.0, 12)
    with pytest.raises(DomainError):
        cumulative_excess(_trace(np.full(12, 0.3), times), cond)


def test_time_functional_needs_enough_decades(cond):
    times = np.geomspace(1e-4, 1e-2, 100)
    with pytest.raises(DomainError):
        time_functional(_trace(np.full(100, 0.3), times), cond)


# Laplace-Stieltjes

def test_laplace_of_constant_is_constant():
    result = laplace_stieltjes(_trace(np.ones(len(TIMES))), 100.0)
    assert result.value == pytest.approx(1.0, abs=1e-12)
    assert result.error < 1e-12


def test_laplace_of_square_root():
    lam = 200.0
    result = laplace_stieltjes(_trace(np.sqrt(TIMES)), lam)
    assert result.value == pytest.approx(math.gamma(1.5) / math.sqrt(lam), rel=1e-9)


def test_laplace_domain_limits():
    trace = _trace(np.ones(len(TIMES)))
    with pytest.raises(DomainError):
        laplace_stieltjes(trace, 2000.0)
    with pytest.raises(DomainError):
        laplace_stieltjes(trace, 10.0)
    with pytest.raises(DomainError):
        laplace_stieltjes(trace, 0.0)


# Karamata

@pytest.mark.parametrize('name, alpha', [('sqrt_t', 1.5), ('lebesgue', 1.0)])
def test_karamata_standard_measures(name, alpha):
    measure, measure_alpha = standard_measure(name, TIMES)
    assert measure_alpha == alpha
    report = karamata_check(measure, alpha)
    assert report.passed
    assert report.ratio == pytest.approx(math.gamma(alpha + 1.0), rel=1e-8)
    assert 'PASS' in report.summary_line()


def test_karamata_with_correction_term():
    measure = measure_from_function(lambda t: t ** 1.5 + t ** 2, TIMES, name='perturbed')
    report = karamata_check(measure, 1.5)
    assert report.ratio == pytest.approx(math.gamma(2.5), rel=1e-2)


def test_karamata_wrong_exponent_fails():
    measure, _ = standard_measure('lebesgue', TIMES)
    report = karamata_check(measure, 1.5)
    assert not report.passed


def test_measure_must_be_nondecreasing():
    with pytest.raises(DomainError):
        MeasureTrace(times=[0.1, 0.2, 0.3], cumulative=[0.0, 0.2, 0.1])
    with pytest.raises(DomainError):
        standard_measure('cauchy', TIMES)


def test_ell_measure_requires_lower_barrier(cond):
    trace = _trace(interface_constant(cond) - 0.1 * np.sqrt(TIMES))
    measure = ell_measure(trace, cond, K=1.0)
    assert np.all(np.diff(measure.cumulative) >= 0)
    with pytest.raises(DomainError):
        ell_measure(trace, cond, K=0.0)


# Perfil de blow-up

def test_blowup_profile_on_ball(ball3, cond):
    lam = 1e6
    sol = solve_radial_bessel(ball3, cond, lam)
    profile = blowup_profile(sol, ball3, np.array([1.0, 0.0, 0.0]), cond, lam)
    assert profile.curvature_term == pytest.approx(-2.0)
    assert profile.reference_at_zero == pytest.approx(-2.0 / 3.0)
    assert profile.value_at_zero == pytest.approx(-2.0 / 3.0, abs=5e-3)
    assert profile.max_abs_error(z_max=2.0) < 0.02
    assert list(profile.to_frame().columns) == ['z', 's_lambda', 's_star']


def test_blowup_window_must_fit_in_tube(ball3, cond):
    sol = solve_radial_bessel(ball3, cond, 100.0)
    with pytest.raises(DomainError):
        blowup_profile(sol, ball3, np.array([1.0, 0.0, 0.0]), cond, 100.0)


def test_blowup_on_halfspace_is_null(halfspace, cond):
    from curvlab.elliptic import FlatSolution
    lam = 400.0
    profile = blowup_profile(FlatSolution(halfspace, cond, lam), halfspace, np.zeros(3), cond, lam)
    assert profile.max_abs_value() < 1e-12


def test_laplace_of_smooth_trace_matches_quadrature():
    from scipy.integrate import quad
    lam = 100.0
    result = laplace_stieltjes(_trace(1.0 / (1.0 + TIMES)), lam)
    exact, _ = quad(lambda t: lam * math.exp(-lam * t) / (1.0 + t), 0.0, np.inf)
    assert result.value == pytest.approx(exact, abs=1e-5)
    assert result.error < 1e-4


@pytest.mark.parametrize('lam', [1e4, 1e5, 1e6])
def test_blowup_profile_bounded_by_calibrated_constant(ball3, cond, lam):
    from curvlab.audit import calibrate_K
    K = calibrate_K(ball3, cond, headroom=1.0)
    profile = blowup_profile(solve_radial_bessel(ball3, cond, lam), ball3, np.array([1.0, 0.0, 0.0]), cond, lam)
    assert abs(profile.z[0]) == pytest.approx(16.0)
    assert profile.max_abs_value() <= K
    assert np.max(np.abs(profile.reference)) <= K
