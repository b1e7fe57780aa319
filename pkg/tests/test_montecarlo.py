import math

import numpy as np
import pytest
from scipy import stats

from meixner_cliquet import (
    CliquetContract,
    DomainError,
    MeixnerParams,
    build_sampler,
    cdf,
    cumulants,
    expected_z1_quadrature,
    floor_value,
    invert,
    mc_expectation,
    mc_expected_z1,
    mc_price,
    mc_price_batch,
    sample_y,
)
from meixner_cliquet.market import PeriodLaw


@pytest.fixture(scope="module")
def symmetric_table():
    return build_sampler(PeriodLaw(MeixnerParams(0.3, 0.0, 0.04, 0.0), 1.0))


def test_table_structure(canon_table):
    p = canon_table.law.params
    # F rounds to 1 in the far right tail; the logit, built from both masses, stays strictly increasing
    assert np.all(np.diff(canon_table.logit) > 0)
    assert np.all(np.diff(canon_table.cdf) >= 0)
    low = canon_table.cdf < 0.5
    assert np.all(np.diff(canon_table.cdf[low]) > 0)
    assert np.all(np.diff(canon_table.x) > 0)
    assert canon_table.cdf[0] < 1e-9 and canon_table.cdf[-1] > 1 - 1e-9
    assert canon_table.tail_exponents == ((p.beta + math.pi) / p.alpha, (p.beta - math.pi) / p.alpha)
    assert canon_table.max_inversion_error < 1e-8


def test_table_cdf_column_matches_cdf(canon_table):
    idx = np.linspace(0, canon_table.x.size - 1, 40).astype(int)
    np.testing.assert_allclose(canon_table.cdf[idx], cdf(canon_table.law.params, 1.0, canon_table.x[idx]), rtol=1e-8, atol=1e-12)


def test_round_trip(canon_table):
    p = canon_table.law.params
    for prob in (0.01, 0.5, 0.99):
        assert cdf(p, 1.0, invert(canon_table, prob)) == pytest.approx(prob, abs=1e-7)
    probs = np.array([1e-6, 1e-3, 0.2, 0.7, 0.999, 1 - 1e-6])
    np.testing.assert_allclose(cdf(p, 1.0, invert(canon_table, probs)), probs, rtol=1e-6)


def test_tail_inversion_beyond_grid(canon_table):
    # analytic exponential tails: quantiles keep decreasing/increasing at the expected rate
    lo = invert(canon_table, np.array([1e-14, 1e-15]))
    hi = invert(canon_table, np.array([1 - 1e-13, 1 - 1e-14]))
    rl, rr = canon_table.tail_exponents
    assert lo[0] - lo[1] == pytest.approx(math.log(10.0) / rl, rel=0.05)
    assert hi[1] - hi[0] == pytest.approx(math.log(10.0) / -rr, rel=0.05)


def test_symmetric_median(symmetric_table):
    assert abs(invert(symmetric_table, 0.5)) < 1e-8
    assert invert(symmetric_table, 0.2) == pytest.approx(-invert(symmetric_table, 0.8), abs=1e-8)


def test_bad_inputs(canon_table):
    with pytest.raises(DomainError):
        build_sampler(canon_table.law, resolution=100)
    with pytest.raises(DomainError):
        invert(canon_table, 1.0)
    with pytest.raises(DomainError):
        sample_y(canon_table, 0, 1)
    with pytest.raises(DomainError):
        sample_y(canon_table, 10, -1)
    with pytest.raises(DomainError):
        sample_y(canon_table, 10, 1, workers=0)


def test_reproducible(canon_table):
    a = sample_y(canon_table, 200_000, seed=3)
    b = sample_y(canon_table, 200_000, seed=3)
    c = sample_y(canon_table, 200_000, seed=3, workers=4)
    assert np.array_equal(a, b) and np.array_equal(a, c)
    assert not np.array_equal(a, sample_y(canon_table, 200_000, seed=4))
    # a shorter run is a prefix of a longer one
    assert np.array_equal(sample_y(canon_table, 1000, seed=3), a[:1000])


def test_estimates_identical_for_any_worker_count(canon_model, canon_contract):
    one = mc_price(canon_model, canon_contract, 50_000, seed=9)
    many = mc_price(canon_model, canon_contract, 50_000, seed=9, workers=3)
    assert one == many


def test_ks_against_cdf(canon_table):
    y = sample_y(canon_table, 10**5, seed=21)
    p = canon_table.law.params
    res = stats.kstest(y, lambda v: cdf(p, 1.0, v))
    assert res.statistic < stats.kstwo.ppf(0.99, y.size)


def _batch_se(values, batches=100):
    parts = np.array_split(values, batches)
    def stat(f):
        s = np.array([f(q) for q in parts])
        return f(values), s.std(ddof=1) / math.sqrt(batches)
    return stat


def test_sample_moments(canon_table):
    y = sample_y(canon_table, 10**6, seed=33)
    c = cumulants(canon_table.law.params, 1.0)
    stat = _batch_se(y)
    checks = [
        (np.mean, c.mean),
        (lambda v: np.var(v, ddof=1), c.variance),
        (lambda v: stats.skew(v), c.skewness),
        (lambda v: stats.kurtosis(v, fisher=False), c.kurtosis),
    ]
    for f, target in checks:
        value, se = stat(f)
        assert abs(value - target) < 4 * se


def test_degenerate_and_scaling(canon_model):
    k = CliquetContract(1.0, 0.5, 0.02, 12, 1.0)
    est = mc_price(canon_model, k, 1000, seed=1)
    assert est.value == floor_value(canon_model, k) and est.std_error == 0.0
    a = mc_price(canon_model, CliquetContract(1.0, 0.02, 0.08, 12, 1.0), 20_000, seed=2)
    b = mc_price(canon_model, CliquetContract(2.0, 0.02, 0.08, 12, 1.0), 20_000, seed=2)
    assert b.value == 2 * a.value and b.std_error == 2 * a.std_error
    assert a.to_dict() == {"value": a.value, "std_error": a.std_error, "paths": 20_000, "seed": 2}


def test_batch_matches_single(canon_model):
    ks = [CliquetContract(1.0, g, c, 12, 1.0) for c, g in [(0.08, 0.02), (0.0, 0.05), (0.16, 0.0)]]
    batch = mc_price_batch(canon_model, ks, 20_000, seed=8)
    for k, est in zip(ks, batch):
        assert mc_price(canon_model, k, 20_000, seed=8) == est
    with pytest.raises(DomainError):
        mc_price_batch(canon_model, [ks[0], CliquetContract(1.0, 0.02, 0.08, 4, 1.0)], 100, seed=1)
    assert mc_price_batch(canon_model, [], 100, seed=1) == []


def test_expected_z1_bounds(canon_model, canon_contract):
    est = mc_expected_z1(canon_model, canon_contract, 10**5, seed=4)
    assert est.value <= 0.08 - 0.02 / 12 + 4 * est.std_error
    zero = mc_expected_z1(canon_model, CliquetContract(1.0, 0.0, 0.0, 12, 1.0), 10**5, seed=4)
    assert zero.value <= 0.0


def test_expected_z1_brackets_quadrature(canon_model, canon_contract):
    est = mc_expected_z1(canon_model, canon_contract, 10**6, seed=5)
    assert abs(est.value - expected_z1_quadrature(canon_model, canon_contract)) < 4 * est.std_error


@pytest.mark.slow
def test_standard_error_scaling(canon_model, canon_contract):
    errs = [mc_expected_z1(canon_model, canon_contract, m, seed=6).std_error for m in (10**5, 10**6, 10**7)]
    for small, large in zip(errs, errs[1:]):
        assert small / large == pytest.approx(math.sqrt(10.0), rel=0.1)


def test_returns_never_breach_minus_one(canon_table):
    y = sample_y(canon_table, 10**5, seed=12)
    assert np.all(np.expm1(y) > -1.0)
    est = mc_expectation(canon_table, lambda v: np.expm1(v) > -1.0, 10**5, seed=12)
    assert est.value == 1.0
