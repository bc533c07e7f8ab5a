import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from bayes_rasp.censoring import Design, HcsSample
from bayes_rasp.decision import (
    AW,
    AWO,
    REJ,
    Action,
    Stage,
    a1_statistic,
    a2_statistic,
    classify,
    consumer_values_exp,
    consumer_values_weibull,
    decide,
    expected_rebate_ig,
    posterior_params_exp,
    posttest_decision_exp,
    posttest_decision_weibull,
    pretest_acceptance_value_exp,
    pretest_decision,
    pretest_expected_rebate_exp,
    rebate,
    sample_weibull_posterior,
    thresholds_exp,
)
from bayes_rasp.errors import DivergenceError
from bayes_rasp.lifetime import Exponential
from bayes_rasp.numerics import RngStream
from bayes_rasp.scenario import ConsumerProfile, ExpConsumerPrior, WarrantyPolicy, WeibullPriorPair

POLICY = WarrantyPolicy(5, 10, 2, 0.5)


def ig_expect(g, shape, scale):
    """E[g(theta)] for theta ~ IG(shape, scale), by quadrature in probability space."""
    dist = stats.invgamma(shape, scale=scale)
    val, _ = integrate.quad(lambda u: g(dist.ppf(u)), 0, 1, epsabs=1e-12, epsrel=1e-11, limit=400)
    return val


def shortfall(theta, t):
    # integral of 1 - exp(-x/theta) over [0, t]
    return t - theta * -math.expm1(-t / theta)


def rebate_given_theta(theta, policy):
    life = Exponential(theta)
    if policy.w2 > policy.w1:
        return policy.price * life.integrated_cdf(policy.w1, policy.w2) / (policy.w2 - policy.w1)
    return policy.price * float(life.cdf(policy.w1))


class TestRebate:
    def test_out_of_warranty(self):
        assert rebate(10.0, POLICY) == 0.0 and rebate(25.0, POLICY) == 0.0

    def test_continuous_at_w1(self):
        assert rebate(5.0 - 1e-12, POLICY) == pytest.approx(2.5)
        assert rebate(5.0, POLICY) == pytest.approx(2.5)

    def test_pro_rata_midpoint(self):
        assert rebate(7.5, POLICY) == pytest.approx(1.25)

    @pytest.mark.parametrize("theta", [1.0, 6.0, 40.0])
    def test_expectation_identity(self, theta):
        life = Exponential(theta)
        direct, _ = integrate.quad(lambda x: rebate(x, POLICY) * float(life.pdf(x)), 0, 10, points=[5])
        assert direct == pytest.approx(rebate_given_theta(theta, POLICY), rel=1e-9)


class TestPretest:
    consumer = ConsumerProfile(10, 5, 9, 15)
    prior = ExpConsumerPrior(2, 3)

    def test_acceptance_value(self):
        assert pretest_acceptance_value_exp(self.consumer, self.prior) == pytest.approx(40 / 3, rel=1e-12)

    def test_acceptance_value_without_lifetime_loss(self):
        assert pretest_acceptance_value_exp(ConsumerProfile(0, 5, 9, 15), self.prior) == 5.0

    def test_expected_rebate(self):
        assert pretest_expected_rebate_exp(POLICY, self.prior) == pytest.approx(2.5 - 0.5 * 9 * (1 / 8 - 1 / 13), rel=1e-12)

    def test_no_warranty_window(self):
        assert pretest_expected_rebate_exp(WarrantyPolicy(0, 0, 2, 0.5), self.prior) == 0.0

    @pytest.mark.parametrize("beta", [3.0, 300.0, 3e4])
    def test_acceptance_value_quadrature(self, beta):
        prior = ExpConsumerPrior(2.5, beta)
        ref = 10 / 15 * ig_expect(lambda t: shortfall(t, 15), 2.5, beta) + 5
        assert pretest_acceptance_value_exp(self.consumer, prior) == pytest.approx(ref, abs=1e-6)

    @given(st.floats(1.2, 12), st.floats(0.1, 50), st.floats(0, 20), st.floats(1e-3, 20))
    @settings(max_examples=40, deadline=None)
    def test_expected_rebate_quadrature(self, alpha, beta, w1, width):
        policy = WarrantyPolicy(w1, w1 + width, 2.0, 0.5)
        ref = ig_expect(lambda t: rebate_given_theta(t, policy), alpha, beta)
        assert pretest_expected_rebate_exp(policy, ExpConsumerPrior(alpha, beta)) == pytest.approx(ref, abs=1e-6)

    def test_free_replacement_limit(self):
        policy = WarrantyPolicy(4, 4, 2, 0.5)
        ref = ig_expect(lambda t: rebate_given_theta(t, policy), 0.8, 3.0)
        assert pretest_expected_rebate_exp(policy, ExpConsumerPrior(0.8, 3.0)) == pytest.approx(ref, abs=1e-6)

    def test_divergent_prior(self):
        with pytest.raises(DivergenceError):
            pretest_acceptance_value_exp(self.consumer, ExpConsumerPrior(1.0, 3.0))

    @pytest.mark.parametrize("a3, action", [(9, Action.REJECT), (12, Action.ACCEPT_WITH_WARRANTY),
                                            (1e6, Action.ACCEPT_NO_WARRANTY)])
    def test_pretest_decision(self, a3, action):
        out = pretest_decision(ConsumerProfile(10, 5, a3, 15), POLICY, self.prior)
        assert out.action is action and out.stage is Stage.PRE_TEST

    def test_example1_values(self):
        out = pretest_decision(self.consumer, POLICY, self.prior)
        assert out.e1 == pytest.approx(40 / 3 - 9)
        assert out.e2 == pytest.approx(40 / 3 - 2.2837 + 0.5 - 9, abs=1e-4)


class TestPosterior:
    prior = ExpConsumerPrior(2, 3)

    def test_no_failures_shift_scale(self):
        s = HcsSample.from_failures([], Design(4, 2, 1.5))
        assert posterior_params_exp(self.prior, s) == ExpConsumerPrior(2, 9)

    def test_null_design(self):
        assert posterior_params_exp(self.prior, None) == self.prior

    def test_conjugacy(self):
        s = HcsSample.from_failures([0.4, 1.1, 2.0], Design(6, 4, 3.0))
        post = posterior_params_exp(self.prior, s)
        kernel = lambda t: stats.invgamma.pdf(t, 2, scale=3) * t ** (-s.d) * np.exp(-s.v / t)
        const, _ = integrate.quad(kernel, 0, np.inf, epsabs=0, epsrel=1e-12, limit=400)
        grid = np.linspace(1e-3, 60, 2001)
        unnorm = kernel(grid) / const
        np.testing.assert_allclose(unnorm, stats.invgamma(post.alpha1, scale=post.beta1).pdf(grid), atol=1e-6)


class TestStatistics:
    consumer = ConsumerProfile(10, 5, 9, 15)
    prior = ExpConsumerPrior(2, 3)

    def test_a1_vanishes_for_large_v(self):
        assert 0 < a1_statistic(1e9, 2, self.consumer, self.prior) < 1e-6

    def test_a2_limit_is_cs(self):
        # the statistic is net of the warranty price and E[q] vanishes
        assert a2_statistic(1e9, 2, POLICY, self.prior) == pytest.approx(-POLICY.cw, abs=1e-6)

    def test_divergence(self):
        with pytest.raises(DivergenceError):
            a1_statistic(1.0, 0, self.consumer, ExpConsumerPrior(0.9, 1.0))

    @given(st.floats(0.01, 200), st.integers(0, 8))
    @settings(max_examples=40, deadline=None)
    def test_a1_quadrature(self, v, d):
        ref = ig_expect(lambda t: shortfall(t, 15), 2 + d, 3 + v)
        assert a1_statistic(v, d, self.consumer, self.prior) == pytest.approx(ref, abs=1e-6)

    @given(st.floats(0.01, 200), st.integers(0, 8))
    @settings(max_examples=40, deadline=None)
    def test_a2_quadrature(self, v, d):
        ref = ig_expect(lambda t: rebate_given_theta(t, POLICY), 2 + d, 3 + v) - POLICY.cw
        assert a2_statistic(v, d, POLICY, self.prior) == pytest.approx(ref, abs=1e-6)

    @staticmethod
    def _draws(gen, size, premise):
        alpha = gen.uniform(1.05, 10, size)
        beta = gen.uniform(0.1, 50, size)
        d = gen.integers(0, 10, size)
        v1 = gen.uniform(0, 100, size)
        v2 = v1 + gen.uniform(1e-3, 100, size)
        L = gen.uniform(0.5, 30, size)
        w1 = gen.uniform(0, 1, size) * L
        w2 = w1 + gen.uniform(1e-3, 1, size) * (L - w1)
        price = 2.5
        if premise:
            # the warranty window sits inside [0, L] and a1/L dominates the rebate slope
            a1 = L * price / (w2 - w1) * gen.uniform(1, 5, size)
        else:
            w1, w2 = w1 * 3, w2 * 3
            a1 = L * price / (w2 - w1) * gen.uniform(0.01, 1, size)
        return alpha, beta, d, v1, v2, L, a1, w1, w2

    @staticmethod
    def _violations(alpha, beta, d, v1, v2, L, a1, w1, w2):
        bad_a1 = bad_diff = 0
        for i in range(alpha.size):
            c = ConsumerProfile(a1[i], 1.0, 1.0, L[i])
            pol = WarrantyPolicy(w1[i], w2[i], 2.0, 0.5)
            pr = ExpConsumerPrior(alpha[i], beta[i])
            s1, s2 = (a1_statistic(v, d[i], c, pr) for v in (v1[i], v2[i]))
            t1, t2 = (a2_statistic(v, d[i], pol, pr) for v in (v1[i], v2[i]))
            bad_a1 += not s1 >= s2
            lhs, rhs = a1[i] / L[i] * s2 - t2, a1[i] / L[i] * s1 - t1
            bad_diff += lhs > rhs + 1e-12 * max(1.0, abs(rhs))
        return bad_a1, bad_diff

    def test_monotone_in_v(self):
        draws = self._draws(np.random.default_rng(99), 10_000, premise=True)
        assert self._violations(*draws) == (0, 0)

    def test_difference_needs_premise(self):
        # with a heavy rebate outside [0, L] the difference statistic can increase in v
        bad_a1, bad_diff = self._violations(*self._draws(np.random.default_rng(7), 2000, premise=False))
        assert bad_a1 == 0 and bad_diff > 0


class TestThresholds:
    consumer = ConsumerProfile(10, 5, 9, 15)
    prior = ExpConsumerPrior(2, 3)

    def test_ordering(self):
        th = thresholds_exp(Design(5, 2, 5.75), self.consumer, POLICY, self.prior)
        for c1, c2 in zip(th.c1, th.c2):
            assert 0 <= c2 <= c1 <= 5 * 5.75

    def test_grid_scan(self, table1_design):
        th = thresholds_exp(table1_design, self.consumer, POLICY, self.prior)
        top = table1_design.n * table1_design.t0
        grid = np.linspace(0, top, 100_001)
        step = grid[1] - grid[0]
        for d in range(table1_design.r + 1):
            e1, e2 = consumer_values_exp(2 + d, 3 + grid, (10, 5, 9, 15), POLICY)
            codes = classify(e1, e2)
            regions = np.array([th.region(v, d) for v in grid[::50]])
            near = np.min(np.abs(grid[::50, None] - np.array([th.c1[d], th.c2[d]])), axis=1) <= step
            assert np.all((regions == codes[::50]) | near)
            # first grid point accepted without warranty sits just above c1
            awo = grid[codes == AWO]
            if awo.size:
                assert abs(awo[0] - th.c1[d]) <= step
            aw_or_better = grid[codes != REJ]
            if aw_or_better.size:
                assert abs(aw_or_better[0] - th.c2[d]) <= step

    def test_huge_rejection_loss(self):
        th = thresholds_exp(Design(5, 2, 5.75), ConsumerProfile(10, 5, 1e6, 15), POLICY, self.prior)
        assert all(c == 0 for c in th.c1)

    def test_posttest_agrees_with_direct_rule(self, table1_design):
        th = thresholds_exp(table1_design, self.consumer, POLICY, self.prior)
        gen = np.random.default_rng(3)
        size = 100_000
        d = gen.integers(0, 3, size)
        v = gen.uniform(0, 28.75, size)
        direct = classify(*consumer_values_exp(2 + d, 3 + v, (10, 5, 9, 15), POLICY))
        c1, c2 = np.array(th.c1)[d], np.array(th.c2)[d]
        via_thresholds = np.where(v > c1, AWO, np.where(v > c2, AW, REJ))
        tol = 1e-8 * 28.75
        ambiguous = (np.abs(v - c1) < tol) | (np.abs(v - c2) < tol)
        assert np.all((direct == via_thresholds) | ambiguous)

    @pytest.mark.parametrize("failures", [[], [0.5], [1.0, 3.0], [5.0]])
    def test_posttest_decision_regions(self, failures, table1_design):
        s = HcsSample.from_failures(failures, table1_design)
        th = thresholds_exp(table1_design, self.consumer, POLICY, self.prior)
        out = posttest_decision_exp(s, self.consumer, POLICY, self.prior)
        assert out.code == th.region(s.v, s.d) and out.stage is Stage.POST_TEST


class TestWeibullConsumer:
    consumer = ConsumerProfile(12000, 5000, 8250, 0.5)
    policy = WarrantyPolicy(0.2, 0.3, 2000, 200)

    @pytest.mark.parametrize("theta", [0.2, 1.0, 5.0])
    def test_unit_shape_nests_exponential(self, theta):
        acc, q = consumer_values_weibull((1.0, 1.0 / theta), self.consumer, self.policy)
        c = self.consumer
        assert acc == pytest.approx(c.a1 / c.L * shortfall(theta, c.L) + c.a2, rel=1e-12)
        assert q == pytest.approx(rebate_given_theta(theta, self.policy), rel=1e-12)

    def test_everlasting_product(self):
        acc, q = consumer_values_weibull((1.5, 1e-12), self.consumer, self.policy)
        assert acc == pytest.approx(self.consumer.a2, rel=1e-9) and q == pytest.approx(0.0, abs=1e-6)

    @given(st.floats(0.3, 5), st.floats(0.05, 10))
    @settings(max_examples=40, deadline=None)
    def test_quadrature(self, alpha, lam):
        cdf = lambda x: -math.expm1(-lam * x**alpha)
        c, p = self.consumer, self.policy
        acc_ref = c.a1 / c.L * integrate.quad(cdf, 0, c.L, epsabs=1e-14, epsrel=1e-13)[0] + c.a2
        q_ref = p.price / (p.w2 - p.w1) * integrate.quad(cdf, p.w1, p.w2, epsabs=1e-14, epsrel=1e-13)[0]
        acc, q = consumer_values_weibull((alpha, lam), c, p)
        assert acc == pytest.approx(acc_ref, abs=1e-8 * max(1.0, acc_ref))
        assert q == pytest.approx(q_ref, abs=1e-8 * max(1.0, q_ref))


def grid_posterior_means(prior, sample, na=800, nl=800):
    """Posterior means of (alpha, lambda) by direct 2-D quadrature of prior times likelihood."""
    (u, v), (c, dd) = prior.shape_hyper, prior.rate_hyper
    n, r, t0 = sample.design
    x = np.asarray(sample.failures)
    a = np.linspace(1e-3, 6, na)[:, None]
    lam = np.linspace(1e-3, 8, nl)[None, :]
    end = t0 if sample.d < r else x[-1]
    va = (x[:, None, None] ** a[None]).sum(axis=0) + (n - sample.d) * end**a
    loglik = sample.d * (np.log(a) + np.log(lam)) + (a - 1) * np.log(x).sum() - lam * va
    logp = loglik + (u - 1) * np.log(a) - v * a + (c - 1) * np.log(lam) - dd * lam
    w = np.exp(logp - logp.max())
    w /= w.sum()
    return float((w * a).sum()), float((w * lam).sum())


class TestWeibullPosterior:
    prior = WeibullPriorPair((11.23, 10), (22.52, 10))
    sample = HcsSample.from_failures((0.103, 0.151, 0.230, 0.405, 0.420), Design(10, 5, 0.481))

    def test_means_match_grid(self):
        draws = sample_weibull_posterior(self.prior, self.sample, 100_000, RngStream(1))
        ma, ml = grid_posterior_means(self.prior, self.sample)
        assert draws[:, 0].mean() == pytest.approx(ma, rel=0.02)
        assert draws[:, 1].mean() == pytest.approx(ml, rel=0.02)

    def test_conditional_rate_is_gamma(self):
        from bayes_rasp.decision import _ShapeMarginal

        draws = sample_weibull_posterior(self.prior, self.sample, 100_000, RngStream(2))
        m = _ShapeMarginal(self.prior, self.sample)
        z = draws[:, 1] * (m.v_alpha(draws[:, 0]) + m.dd)
        shape = m.c + m.d
        assert abs(z.mean() - shape) < 3 * math.sqrt(shape / z.size)
        assert stats.kstest(z, stats.gamma(shape).cdf).pvalue > 0.01

    def test_deterministic(self):
        a = sample_weibull_posterior(self.prior, self.sample, 500, RngStream(5))
        b = sample_weibull_posterior(self.prior, self.sample, 500, RngStream(5))
        np.testing.assert_array_equal(a, b)

    def test_no_failures_fallback(self):
        s = HcsSample.from_failures((), Design(10, 5, 0.481))
        draws = sample_weibull_posterior(self.prior, s, 20_000, RngStream(3))
        ma, ml = grid_posterior_means(self.prior, HcsSample.from_failures((), Design(10, 5, 0.481)))
        assert draws[:, 0].mean() == pytest.approx(ma, rel=0.03)
        assert draws[:, 1].mean() == pytest.approx(ml, rel=0.03)

    def test_e2_identity(self, application):
        out = posttest_decision_weibull(self.sample, application.consumer, application.warranty,
                                        application.consumer_prior, 2000, RngStream(4))
        draws = sample_weibull_posterior(application.consumer_prior, self.sample, 2000, RngStream(4))
        _, q = consumer_values_weibull((draws[:, 0], draws[:, 1]), application.consumer, application.warranty)
        assert out.e2 == pytest.approx(out.e1 - (q.mean() - application.warranty.cw), rel=1e-12)


def test_decide_stops_at_pretest():
    c = ConsumerProfile(10, 5, 12, 15)
    out = decide(HcsSample.from_failures([1.0], Design(5, 2, 5.75)), c, POLICY, ExpConsumerPrior(2, 3))
    assert out.stage is Stage.PRE_TEST and out.action is Action.ACCEPT_WITH_WARRANTY


def test_expected_rebate_vectorizes():
    vals = expected_rebate_ig(np.array([2.0, 3.0]), np.array([3.0, 5.0]), POLICY)
    assert vals.shape == (2,)
