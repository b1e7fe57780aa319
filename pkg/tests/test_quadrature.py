import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from meixner_cliquet import (
    ConvergenceFailure,
    DomainError,
    NonFiniteIntegrand,
    QuadConfig,
    integrate_finite,
    integrate_principal_value,
    integrate_semi_infinite,
)
from meixner_cliquet.quadrature import gauss_legendre_rule, integrate_intervals


def test_polynomial():
    assert integrate_finite(lambda x: x**2, 0.0, 1.0).value == pytest.approx(1 / 3, abs=1e-14)


def test_sine():
    assert integrate_finite(np.sin, 0.0, math.pi).value == pytest.approx(2.0, abs=1e-12)


def test_log_endpoint_singularity_with_open_rule():
    res = integrate_finite(lambda x: np.log(1.0 / x), 0.0, 1.0)
    assert res.converged
    assert res.value == pytest.approx(1.0, abs=1e-9)


def test_exponential_half_line():
    res = integrate_semi_infinite(lambda x: np.exp(-x), 0.0)
    assert res.value == pytest.approx(1.0, abs=1e-10)


def test_gaussian_two_half_lines():
    f = lambda x: np.exp(-x * x)
    right = integrate_semi_infinite(f, 0.0)
    left = integrate_semi_infinite(lambda x: f(-x), 0.0)
    assert right.value + left.value == pytest.approx(math.sqrt(math.pi), abs=1e-9)


def test_one_minus_cos_over_x_squared_with_tail():
    # shape of the distribution-method integrand; tail beyond X is 1/X - int_X cos/x^2
    from scipy.special import sici

    def f(x):
        return 2.0 * np.sin(x / 2.0) ** 2 / (x * x)

    def tail(X):
        si, ci = sici(X)
        cos_tail = math.cos(X) / X - (math.pi / 2 - si)
        return 1.0 / X - cos_tail, 1e-16

    res = integrate_semi_infinite(f, 0.0, 1.0, tail=tail)
    assert res.value == pytest.approx(math.pi / 2, abs=1e-9)
    # brute-force panel sum as a second opinion
    edges = np.arange(0.0, 2000.0 * math.pi + 1e-9, math.pi)
    vals, _, _ = integrate_intervals(f, edges, QuadConfig(abs_tol=1e-12, rel_tol=1e-12))
    brute = float(np.sum(vals)) + tail(edges[-1])[0]
    assert brute == pytest.approx(math.pi / 2, abs=1e-9)


def test_principal_value_odd():
    res = integrate_principal_value(lambda x: 1.0 / x, 0.0, -1.0, 1.0)
    assert res.value == pytest.approx(0.0, abs=1e-14)


def test_principal_value_with_regular_part():
    res = integrate_principal_value(lambda x: 1.0 / x + 1.0, 0.0, -1.0, 1.0)
    assert res.value == pytest.approx(2.0, abs=1e-12)


def test_principal_value_exp_over_x(oracles):
    res = integrate_principal_value(lambda x: np.exp(x) / x, 0.0, -2.0, 2.0)
    assert res.value == pytest.approx(oracles["pv_exp_over_x"], abs=1e-10)
    assert res.value == pytest.approx(4.9542343 + 0.0489005, abs=1e-6)
    # symmetric Riemann pairs at shrinking spacing converge to the same value
    for n in (2000, 20000):
        h = 2.0 / n
        x = (np.arange(n) + 0.5) * h
        pair = np.sum((np.exp(x) - np.exp(-x)) / x) * h
        assert pair == pytest.approx(res.value, abs=5.0 / n**2 * 10)


def test_principal_value_asymmetric_interval():
    # PV int_{-1}^{3} dx / x = log 3
    res = integrate_principal_value(lambda x: 1.0 / x, 0.0, -1.0, 3.0)
    assert res.value == pytest.approx(math.log(3.0), abs=1e-11)


def test_non_finite_integrand_raises():
    with pytest.raises(NonFiniteIntegrand):
        integrate_finite(lambda x: np.where(np.abs(x - 0.5) < 0.1, np.nan, 1.0), 0.0, 1.0)


def test_semi_infinite_convergence_failure():
    cfg = QuadConfig(max_subdivisions=5)
    with pytest.raises(ConvergenceFailure):
        integrate_semi_infinite(lambda x: 1.0 / (1.0 + x), 0.0, 1.0, cfg)


def test_budget_exhaustion_reports_unconverged():
    cfg = QuadConfig(abs_tol=1e-15, rel_tol=1e-15, max_subdivisions=3)
    res = integrate_finite(lambda x: np.abs(np.sin(200 * x)), 0.0, 1.0, cfg)
    assert not res.converged


def test_bad_arguments():
    with pytest.raises(DomainError):
        integrate_finite(np.sin, 1.0, 0.0)
    with pytest.raises(DomainError):
        integrate_principal_value(lambda x: 1 / x, 2.0, -1.0, 1.0)
    with pytest.raises(DomainError):
        QuadConfig(abs_tol=0.0)
    with pytest.raises(DomainError):
        integrate_semi_infinite(np.exp, 0.0, decay_hint=-1.0)


def test_gauss_legendre_rule_integrates_degree_2n_minus_1():
    x, w = gauss_legendre_rule(7)
    assert np.sum(w * x**12) == pytest.approx(2.0 / 13.0, abs=1e-15)


# known closed forms: the reported error estimate must bound the true error
CORPUS = [
    (lambda x: np.exp(x), 0.0, 1.0, math.e - 1.0),
    (lambda x: 1.0 / (1.0 + x * x), -5.0, 5.0, 2.0 * math.atan(5.0)),
    (lambda x: np.sqrt(x), 0.0, 1.0, 2.0 / 3.0),
    (lambda x: 1.0 / np.sqrt(x), 0.0, 1.0, 2.0),
    (lambda x: np.cos(50.0 * x), 0.0, 1.0, math.sin(50.0) / 50.0),
    (lambda x: np.log(x), 0.0, 2.0, 2.0 * math.log(2.0) - 2.0),
    (lambda x: np.abs(x - 0.3), 0.0, 1.0, 0.29),
    (lambda x: x**9, -1.0, 2.0, (2.0**10 - 1.0) / 10.0),
    (lambda x: np.exp(-100.0 * (x - 0.5) ** 2), 0.0, 1.0, math.sqrt(math.pi / 100.0) * math.erf(5.0)),
    (lambda x: 1.0 / (1e-4 + (x - 0.5) ** 2), 0.0, 1.0, 2.0 / 1e-2 * math.atan(0.5 / 1e-2)),
]


@pytest.mark.parametrize("case", range(len(CORPUS)))
def test_error_estimate_bounds_true_error(case):
    f, a, b, exact = CORPUS[case]
    res = integrate_finite(f, a, b)
    assert res.converged
    assert abs(res.value - exact) <= res.error_estimate + 1e-15 * abs(exact)
    # and agrees with an independent adaptive routine
    ref, _ = quad(f, a, b, limit=500, epsabs=1e-13, epsrel=1e-13)
    assert res.value == pytest.approx(ref, abs=1e-8)


coef = st.floats(-10.0, 10.0)


@settings(max_examples=60, deadline=None)
@given(coef, coef, st.floats(0.1, 5.0))
def test_linearity(a, b, freq):
    f = lambda x: np.exp(-x) * np.sin(freq * x)
    g = lambda x: 1.0 / (1.0 + x)
    r_f = integrate_finite(f, 0.0, 3.0)
    r_g = integrate_finite(g, 0.0, 3.0)
    r_c = integrate_finite(lambda x: a * f(x) + b * g(x), 0.0, 3.0)
    bound = abs(a) * r_f.error_estimate + abs(b) * r_g.error_estimate + r_c.error_estimate + 1e-13
    assert abs(r_c.value - (a * r_f.value + b * r_g.value)) <= bound


@settings(max_examples=60, deadline=None)
@given(st.floats(0.05, 2.95))
def test_interval_additivity(c):
    f = lambda x: np.sqrt(x) * np.cos(3.0 * x)
    whole = integrate_finite(f, 0.0, 3.0)
    left = integrate_finite(f, 0.0, c)
    right = integrate_finite(f, c, 3.0)
    bound = whole.error_estimate + left.error_estimate + right.error_estimate + 1e-13
    assert abs(left.value + right.value - whole.value) <= bound
