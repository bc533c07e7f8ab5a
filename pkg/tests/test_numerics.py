import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from bayes_rasp.errors import DomainError
from bayes_rasp.numerics import (
    RngStream,
    find_root_decreasing,
    log_gamma,
    lower_incomplete_gamma,
    regularized_incomplete_beta,
    sample_gamma,
    sample_inverse_gamma,
)


@pytest.mark.parametrize("x, expected", [(1.0, 0.0), (2.0, 0.0), (0.5, 0.5 * math.log(math.pi))])
def test_log_gamma_known_values(x, expected):
    assert log_gamma(x) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("x", [0.0, -1.0, float("nan")])
def test_log_gamma_rejects_nonpositive(x):
    with pytest.raises(DomainError):
        log_gamma(x)


def test_incomplete_beta_endpoints_and_closed_form():
    assert regularized_incomplete_beta(0.0, 2.3, 1.7) == 0.0
    assert regularized_incomplete_beta(1.0, 2.3, 1.7) == 1.0
    assert regularized_incomplete_beta(0.25, 1, 2) == pytest.approx(0.4375, abs=1e-14)


@given(st.floats(0.05, 20), st.floats(0.05, 20), st.floats(0.0, 1.0))
@settings(max_examples=60, deadline=None)
def test_incomplete_beta_matches_high_precision(p, b, x):
    ref = float(mpmath.betainc(p, b, 0, x, regularized=True))
    assert regularized_incomplete_beta(x, p, b) == pytest.approx(ref, abs=1e-10)


def test_incomplete_beta_monotone_in_x():
    xs = np.linspace(0, 1, 1001)
    vals = regularized_incomplete_beta(xs, 3.5, 0.7)
    assert np.all(np.diff(vals) >= 0)


@pytest.mark.parametrize("args", [(-0.1, 1, 1), (1.1, 1, 1), (0.5, 0, 1), (0.5, 1, -2)])
def test_incomplete_beta_domain(args):
    with pytest.raises(DomainError):
        regularized_incomplete_beta(*args)


@pytest.mark.parametrize("t", [0.0, 0.3, 2.0, 10.0])
def test_lower_incomplete_gamma_unit_shape(t):
    assert lower_incomplete_gamma(1.0, t) == pytest.approx(-math.expm1(-t), rel=1e-12, abs=1e-300)


def test_lower_incomplete_gamma_zero_limit():
    assert lower_incomplete_gamma(3.7, 0.0) == 0.0


@pytest.mark.parametrize("s, t", [(0.5, 1.0), (2.5, 0.7), (7.0, 12.0), (0.1, 3.0)])
def test_lower_incomplete_gamma_quadrature(s, t):
    ref, _ = integrate.quad(lambda u: u ** (s - 1) * math.exp(-u), 0, t, epsabs=1e-14, epsrel=1e-13, limit=200)
    assert lower_incomplete_gamma(s, t) == pytest.approx(ref, rel=1e-8)


@pytest.mark.parametrize("s, t", [(0.0, 1.0), (1.0, -1.0)])
def test_lower_incomplete_gamma_domain(s, t):
    with pytest.raises(DomainError):
        lower_incomplete_gamma(s, t)


class TestRootFinder:
    def test_sign_change(self):
        assert find_root_decreasing(lambda x: 1 - x, 0, 2, 1e-10) == pytest.approx(1.0, abs=1e-10)

    def test_saturates_low(self):
        assert find_root_decreasing(lambda x: -1.0, 0, 2, 1e-10) == 0.0

    def test_saturates_high(self):
        assert find_root_decreasing(lambda x: 1.0, 0, 2, 1e-10) == 2.0

    @pytest.mark.parametrize("tol", [0.0, -1e-3])
    def test_bad_tolerance(self, tol):
        with pytest.raises(DomainError):
            find_root_decreasing(lambda x: 1 - x, 0, 2, tol)

    @given(st.floats(-5, 5), st.floats(1e-8, 1e-3))
    @settings(max_examples=50, deadline=None)
    def test_bracket_width(self, root, tol):
        x = find_root_decreasing(lambda u: math.tanh(root - u), -10, 10, tol)
        assert abs(x - root) <= tol


class TestRngStream:
    def test_same_key_same_draws(self):
        a = RngStream(7, 3).uniform(50)
        b = RngStream(7, 3).uniform(50)
        np.testing.assert_array_equal(a, b)

    def test_distinct_streams_differ(self):
        a = RngStream(7, 3).uniform(1000)
        b = RngStream(7, 4).uniform(1000)
        assert not np.array_equal(a, b)
        assert abs(np.corrcoef(a, b)[0, 1]) < 0.12

    def test_children_independent_of_parent_use(self):
        parent = RngStream(11)
        first = parent.child(5).uniform(10)
        parent.uniform(1000)
        np.testing.assert_array_equal(first, RngStream(11).child(5).uniform(10))

    def test_negative_seed(self):
        with pytest.raises(DomainError):
            RngStream(-1)


def test_sample_gamma_moments():
    x = sample_gamma(2.0, 4.0, RngStream(1), size=10**6)
    se_mean = math.sqrt(0.125 / x.size)
    assert abs(x.mean() - 0.5) < 3 * se_mean
    # SE of the sample variance: sqrt((mu4 - sigma^4) / N); gamma kurtosis excess is 6/shape
    sigma2 = 0.125
    se_var = math.sqrt((sigma2**2 * (2 + 6 / 2.0)) / x.size)
    assert abs(x.var(ddof=1) - sigma2) < 3 * se_var


def test_sample_gamma_deterministic():
    assert sample_gamma(2.0, 4.0, RngStream(9)) == sample_gamma(2.0, 4.0, RngStream(9))


def test_sample_inverse_gamma_reciprocal_is_gamma():
    x = sample_inverse_gamma(3.0, 6.0, RngStream(2), size=10**5)
    assert stats.kstest(1 / x, stats.gamma(3.0, scale=1 / 6.0).cdf).pvalue > 0.01


def test_sample_inverse_gamma_mean():
    x = sample_inverse_gamma(3.0, 6.0, RngStream(3), size=10**6)
    se = x.std(ddof=1) / math.sqrt(x.size)
    assert abs(x.mean() - 3.0) < 3 * se
    assert sample_inverse_gamma(3.0, 6.0, RngStream(4)) == sample_inverse_gamma(3.0, 6.0, RngStream(4))


@pytest.mark.parametrize("fn", [sample_gamma, sample_inverse_gamma])
def test_samplers_domain(fn):
    with pytest.raises(DomainError):
        fn(0.0, 1.0, RngStream(0))
