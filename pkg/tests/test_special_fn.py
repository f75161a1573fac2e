import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from goflevels import special_fn as sf
from oracles import binom_upper_sum, log_binom_upper_sum


@pytest.mark.parametrize(
    "i, n, x, expected",
    [(1, 1, 0.3, 0.3), (1, 5, 0.2, 1 - 0.8**5), (3, 10, 0.5, 0.9453125)],
)
def test_beta_cdf_examples(i, n, x, expected):
    assert sf.beta_cdf(i, n, x) == pytest.approx(expected, abs=1e-15)


def test_beta_cdf_matches_binomial_sum():
    for n in (1, 7, 40, 150):
        for i in (1, n // 2 + 1, n):
            for x in (0.01, 0.3, 0.77):
                assert sf.beta_cdf(i, n, x) == pytest.approx(binom_upper_sum(n, x, i), rel=1e-12, abs=1e-300)


def test_beta_cdf_domain_errors():
    with pytest.raises(ValueError):
        sf.beta_cdf(0, 5, 0.5)
    with pytest.raises(ValueError):
        sf.beta_cdf(6, 5, 0.5)
    with pytest.raises(ValueError):
        sf.beta_cdf(2, 5, 1.2)
    with pytest.raises(ValueError):
        sf.beta_cdf(2, 5, -0.1)


def test_beta_cdf_monotone():
    x = np.linspace(0, 1, 201)
    for n in (5, 60):
        for i in (1, 3, n):
            assert np.all(np.diff(sf.beta_cdf(i, n, x)) >= 0)
        vals = sf.beta_cdf(np.arange(1, n + 1), n, 0.4)
        assert np.all(np.diff(vals) <= 0)


@pytest.mark.parametrize("p", [0.0, 0.13, 0.5, 1.0])
def test_beta_inv_single_uniform_is_identity(p):
    assert sf.beta_inv(1, 1, p) == pytest.approx(p, abs=1e-15)


def test_beta_inv_round_trips():
    assert sf.beta_inv(1, 5, 0.67232) == pytest.approx(0.2, abs=1e-12)
    assert sf.beta_inv(3, 10, 0.9453125) == pytest.approx(0.5, abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(
    n=st.integers(1, 400),
    frac=st.floats(0, 1),
    logit=st.floats(-23.0, 23.0),
)
def test_beta_inv_inverts_cdf(n, frac, logit):
    i = 1 + int(frac * (n - 1))
    p = 1.0 / (1.0 + math.exp(-logit))
    p = min(max(p, 1e-10), 1 - 1e-10)
    x = sf.beta_inv(i, n, p)
    assert sf.beta_cdf(i, n, x) == pytest.approx(p, abs=1e-10)


def test_beta_inv_tiny_level_is_accurate():
    x = sf.beta_inv(3, 10, 1e-300)
    assert sf.beta_cdf(3, 10, x) == pytest.approx(1e-300, rel=1e-6)


def test_binom_tail_examples():
    assert sf.binom_tail(17, 0.3, 0) == 1.0
    assert sf.binom_tail(10, 0.5, 3) == pytest.approx(0.9453125, abs=1e-15)
    with pytest.raises(ValueError):
        sf.binom_tail(10, 0.5, 11)
    with pytest.raises(ValueError):
        sf.binom_tail(10, 0.5, -1)


def test_beta_binomial_duality_grid():
    x = np.round(np.arange(0.01, 1.0, 0.01), 2)
    gap = 0.0
    for n in range(1, 201):
        i = np.arange(1, n + 1)[:, None]
        gap = max(gap, np.max(np.abs(sf.beta_cdf(i, n, x[None, :]) - sf.binom_tail(n, x[None, :], i))))
    assert gap <= 1e-12


def test_log_binom_tail_below_double_range():
    # P(Bin(2000, 0.01) >= 1500) is far below 1e-300
    val = sf.log_binom_tail(2000, 0.01, 1500)
    assert val < -3000
    assert val == pytest.approx(log_binom_upper_sum(2000, 0.01, 1500), rel=1e-12)


def test_log_binom_tail_agrees_with_linear_scale():
    for n, p, k in [(50, 0.2, 10), (300, 0.01, 9), (1000, 0.5, 600)]:
        assert sf.log_binom_tail(n, p, k) == pytest.approx(math.log(sf.binom_tail(n, p, k)), rel=1e-12)


def test_log_beta_tails():
    assert sf.log_beta_cdf(3, 10, 0.5) == pytest.approx(math.log(0.9453125), rel=1e-13)
    assert sf.log_beta_sf(3, 10, 0.5) == pytest.approx(math.log(1 - 0.9453125), rel=1e-12)


def test_poisson_pmf_examples():
    for lam in (0.3, 2.0, 17.0):
        assert sf.poisson_pmf(lam, 0) == pytest.approx(math.exp(-lam), rel=1e-14)
    assert sf.poisson_pmf(1, 1) == pytest.approx(math.exp(-1), rel=1e-14)
    assert sf.poisson_pmf(2, 3) == pytest.approx(8 * math.exp(-2) / 6, rel=1e-14)
    with pytest.raises(ValueError):
        sf.poisson_pmf(0.0, 2)
    with pytest.raises(ValueError):
        sf.poisson_pmf(-1.0, 2)


def test_normal_cdf_pdf():
    cdf, pdf = sf.normal_cdf_pdf(0.0)
    assert cdf == 0.5
    assert pdf == pytest.approx(0.3989423, abs=1e-7)
    assert sf.normal_cdf_pdf(1.959964)[0] == pytest.approx(0.975, abs=1e-7)
    x = np.linspace(-8, 8, 33)
    c, p = sf.normal_cdf_pdf(x)
    assert np.all(np.abs(c + sf.normal_cdf_pdf(-x)[0] - 1.0) <= 1e-14)
    assert np.allclose(p, np.exp(-x * x / 2) / math.sqrt(2 * math.pi), rtol=1e-14)
    assert sf.normal_sf(10.0) == pytest.approx(7.619853024160527e-24, rel=1e-12)


def test_log_factorial_values():
    assert sf.log_factorial(0) == 0.0
    assert sf.log_factorial(5) == pytest.approx(math.log(120), rel=1e-15)
    for k in (1, 17, 100, 256, 257, 300, 1000, 10**6):
        assert sf.log_factorial(k) == pytest.approx(math.lgamma(k + 1), rel=1e-14)


def test_stirling_truncation_at_100():
    exact = sf.log_factorial(100)
    rel = abs(sf.stirling_log_factorial(100) - exact) / exact
    assert 0 < rel < 1 / 100


def test_stirling_relative_error_bounded_by_c_over_k():
    def rel_err(k):
        return abs(sf.stirling_log_factorial(k) - sf.log_factorial(k)) / sf.log_factorial(k)

    # fit C on small k, then check that C/k bounds the error far beyond
    c = max(rel_err(k) * k for k in range(2, 101))
    for k in np.unique(np.logspace(2, 7, 60).astype(int)):
        assert rel_err(k) <= c / k
