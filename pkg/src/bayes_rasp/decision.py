"""The consumer's staged decision: pre-test check, posterior update, post-test check.

Three actions are possible at each stage: accept without warranty, accept
with the combined FRW/PRW warranty, or reject. A pre-test rejection means
"run the life test"; a post-test rejection is final.

For the exponential model everything reduces to two posterior expectations
under the inverse-gamma posterior IG(A, B):

* the expected shortfall ``E[int_0^t F_theta(x) dx]``, which gives the
  acceptance value for t = L and the expected rebate via t = w1, w2;
* both have closed forms, written here with ``expm1``/``log1p`` so they stay
  accurate when A is close to 1.

The Weibull model has no closed form; posterior draws come from an adaptive
rejection sampler for the log-concave shape marginal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import optimize, special, stats

from .ars import AdaptiveRejectionSampler
from .censoring import Design, HcsSample
from .errors import DivergenceError, DomainError
from .lifetime import Weibull
from .numerics import RngStream, find_root_decreasing
from .scenario import ConsumerProfile, ExpConsumerPrior, WarrantyPolicy, WeibullPriorPair


class Action(str, Enum):
    ACCEPT_NO_WARRANTY = "AcceptNoWarranty"
    ACCEPT_WITH_WARRANTY = "AcceptWithWarranty"
    REJECT = "Reject"


class Stage(str, Enum):
    PRE_TEST = "PreTest"
    POST_TEST = "PostTest"


# integer action codes used by the vectorized engines
AWO, AW, REJ = 0, 1, 2
_ACTIONS = (Action.ACCEPT_NO_WARRANTY, Action.ACCEPT_WITH_WARRANTY, Action.REJECT)


@dataclass(frozen=True)
class DecisionOutcome:
    action: Action
    stage: Stage
    e1: float | None = None
    e2: float | None = None

    @property
    def code(self) -> int:
        return _ACTIONS.index(self.action)

    def to_dict(self) -> dict:
        return {"action": self.action.value, "stage": self.stage.value, "e1": self.e1, "e2": self.e2}


def classify(e1, e2):
    """Vectorized action rule: AWO if e1 <= 0, else AW if e2 <= 0, else reject."""
    e1, e2 = np.asarray(e1), np.asarray(e2)
    return np.where(e1 <= 0, AWO, np.where(e2 <= 0, AW, REJ))


def _outcome(e1: float, e2: float, stage: Stage) -> DecisionOutcome:
    return DecisionOutcome(_ACTIONS[int(classify(e1, e2))], stage, float(e1), float(e2))


def rebate(x, policy: WarrantyPolicy):
    """Refund for a unit failing at age ``x``: full on [0, w1), pro-rata on [w1, w2)."""
    x = np.asarray(x, float)
    if np.any(x < 0):
        raise DomainError("lifetime must be nonnegative")
    w1, w2, price = policy.w1, policy.w2, policy.price
    if w2 > w1:
        pro = price * (w2 - x) / (w2 - w1)
    else:
        pro = np.zeros_like(x)
    out = np.where(x < w1, price, np.where(x < w2, pro, 0.0))
    return float(out) if out.ndim == 0 else out


# ---------------------------------------------------------------- exponential


def _expm1_over(z, a):
    """expm1(a*z)/a with the a -> 0 limit z."""
    a = np.asarray(a, float)
    small = np.abs(a) < 1e-10
    safe = np.where(small, 1.0, a)
    return np.where(small, z * (1 + 0.5 * a * z), np.expm1(safe * z) / safe)


def expected_shortfall_ig(shape, scale, t):
    """E[int_0^t F_theta(x) dx] for theta ~ IG(shape, scale).

    Equals ``t + B/(A-1) * [(B/(B+t))^(A-1) - 1]``; finite for every A > 0.
    """
    a, b, t = np.asarray(shape, float), np.asarray(scale, float), np.asarray(t, float)
    return t + b * _expm1_over(-np.log1p(t / b), a - 1.0)


def expected_rebate_ig(shape, scale, policy: WarrantyPolicy):
    """E[q(X)] when X is exponential with mean theta ~ IG(shape, scale)."""
    a, b = np.asarray(shape, float), np.asarray(scale, float)
    price, w1, w2 = policy.price, policy.w1, policy.w2
    if w2 > w1:
        return price * (expected_shortfall_ig(a, b, w2) - expected_shortfall_ig(a, b, w1)) / (w2 - w1)
    # pure FRW: price * E[F(w1)]
    return price * -np.expm1(-a * np.log1p(w1 / b))


def _shortfall_scalar(a: float, b: float, t: float) -> float:
    # scalar twin of expected_shortfall_ig, used inside root finding
    z = -math.log1p(t / b)
    am1 = a - 1.0
    return t + b * (math.expm1(am1 * z) / am1 if abs(am1) > 1e-10 else z * (1 + 0.5 * am1 * z))


def _scalar_values(a: float, b: float, consumer: ConsumerProfile, policy: WarrantyPolicy) -> tuple[float, float]:
    e1 = consumer.a1 / consumer.L * _shortfall_scalar(a, b, consumer.L) + consumer.a2 - consumer.a3
    w1, w2 = policy.w1, policy.w2
    if w2 > w1:
        eq = policy.price * (_shortfall_scalar(a, b, w2) - _shortfall_scalar(a, b, w1)) / (w2 - w1)
    else:
        eq = -policy.price * math.expm1(-a * math.log1p(w1 / b))
    return e1, e1 - (eq - policy.cw)


def _require_finite_mean(shape: float, what: str):
    if not shape > 1:
        raise DivergenceError(f"{what} requires inverse-gamma shape > 1, got {shape:g}", term=what)


def pretest_acceptance_value_exp(consumer: ConsumerProfile, prior: ExpConsumerPrior) -> float:
    """Prior expected loss of accepting: (a1/L) E[int_0^L F] + a2."""
    _require_finite_mean(prior.alpha1, "acceptance value")
    s = expected_shortfall_ig(prior.alpha1, prior.beta1, consumer.L)
    return float(consumer.a1 / consumer.L * s + consumer.a2)


def pretest_expected_rebate_exp(policy: WarrantyPolicy, prior: ExpConsumerPrior) -> float:
    """Prior expected rebate; ``w1 == w2`` is the pure free-replacement limit."""
    if policy.w2 > policy.w1:
        _require_finite_mean(prior.alpha1, "expected rebate")
    return float(expected_rebate_ig(prior.alpha1, prior.beta1, policy))


def posterior_params_exp(prior: ExpConsumerPrior, sample: HcsSample | None) -> ExpConsumerPrior:
    if sample is None or sample.design.is_null:
        return prior
    return ExpConsumerPrior(prior.alpha1 + sample.d, prior.beta1 + sample.v)


def a1_statistic(v, d, consumer: ConsumerProfile, prior: ExpConsumerPrior):
    """Posterior expected shortfall over [0, L] given total time on test v and d failures."""
    shape = prior.alpha1 + np.asarray(d, float)
    if np.any(shape <= 1):
        raise DivergenceError("A1 statistic requires alpha1 + d > 1", term="A1")
    out = expected_shortfall_ig(shape, prior.beta1 + np.asarray(v, float), consumer.L)
    return float(out) if np.ndim(out) == 0 else out


def a2_statistic(v, d, policy: WarrantyPolicy, prior: ExpConsumerPrior):
    """Posterior expected rebate net of the warranty price: E[q(X) | data] - cw."""
    shape = prior.alpha1 + np.asarray(d, float)
    if policy.w2 > policy.w1 and np.any(shape <= 1):
        raise DivergenceError("A2 statistic requires alpha1 + d > 1", term="A2")
    out = expected_rebate_ig(shape, prior.beta1 + np.asarray(v, float), policy) - policy.cw
    return float(out) if np.ndim(out) == 0 else out


def consumer_values_exp(shape, scale, consumer, policy):
    """Vectorized (e1, e2) for IG(shape, scale) beliefs.

    ``consumer`` fields may be arrays (random consumers); everything broadcasts.
    """
    a1, a2, a3, L = consumer
    accept = a1 / L * expected_shortfall_ig(shape, scale, L) + a2
    e1 = accept - a3
    e2 = e1 - (expected_rebate_ig(shape, scale, policy) - policy.cw)
    return e1, e2


def _consumer_tuple(c: ConsumerProfile):
    return (c.a1, c.a2, c.a3, c.L)


def pretest_decision(consumer: ConsumerProfile, policy: WarrantyPolicy, prior) -> DecisionOutcome:
    """Decide before testing; ``Reject`` at this stage means "run the life test"."""
    if isinstance(prior, ExpConsumerPrior):
        value = pretest_acceptance_value_exp(consumer, prior)
        rebate_mean = pretest_expected_rebate_exp(policy, prior)
    elif isinstance(prior, WeibullPriorPair):
        value, rebate_mean = prior_consumer_values_weibull(prior, consumer, policy)
    else:
        raise DomainError(f"unsupported prior {type(prior).__name__}")
    e1 = value - consumer.a3
    return _outcome(e1, e1 - rebate_mean + policy.cw, Stage.PRE_TEST)


def posttest_decision_exp(sample: HcsSample, consumer: ConsumerProfile, policy: WarrantyPolicy,
                          prior: ExpConsumerPrior) -> DecisionOutcome:
    post = posterior_params_exp(prior, sample)
    e1, e2 = consumer_values_exp(post.alpha1, post.beta1, _consumer_tuple(consumer), policy)
    return _outcome(float(e1), float(e2), Stage.POST_TEST)


@dataclass(frozen=True)
class Thresholds:
    """Cuts on v per failure count d = 0..r.

    v > c1[d] accepts without warranty, c2[d] < v <= c1[d] accepts with
    warranty, v <= c2[d] rejects.
    """

    c_raw: tuple[float, ...]
    cprime_raw: tuple[float, ...]
    c1: tuple[float, ...]
    c2: tuple[float, ...]

    def region(self, v: float, d: int) -> int:
        if v > self.c1[d]:
            return AWO
        if v > self.c2[d]:
            return AW
        return REJ


def thresholds_exp(design: Design, consumer: ConsumerProfile, policy: WarrantyPolicy,
                   prior: ExpConsumerPrior) -> Thresholds:
    """Roots in v of the two post-test statistics for each d, clamped to [0, nT0].

    Both statistics decrease in v, so each cut is found by bisection to an
    interval width of 1e-9 * nT0; a statistic that never crosses saturates
    at the nearer end.
    """
    design.require_testable()
    n, r, t0 = design
    top = n * t0
    tol = 1e-9 * top
    c_raw, cp_raw, c1, c2 = [], [], [], []
    for d in range(r + 1):
        shape = prior.alpha1 + d
        if shape <= 1:
            raise DivergenceError(f"thresholds require alpha1 + d > 1 (d={d})", term=f"c({d})")

        def e(v, k):
            return _scalar_values(shape, prior.beta1 + v, consumer, policy)[k]

        c = find_root_decreasing(lambda v: e(v, 0), 0.0, top, tol)
        cp = find_root_decreasing(lambda v: e(v, 1), 0.0, top, tol)
        hi = min(max(0.0, c), top)
        c_raw.append(c)
        cp_raw.append(cp)
        c1.append(hi)
        c2.append(min(max(0.0, cp), hi))
    return Thresholds(tuple(c_raw), tuple(cp_raw), tuple(c1), tuple(c2))


# -------------------------------------------------------------------- Weibull


def consumer_values_weibull(theta, consumer: ConsumerProfile, policy: WarrantyPolicy):
    """Acceptance value and expected rebate Q for Weibull parameters ``(alpha, lambda)``."""
    alpha, lam = (np.asarray(p, float) for p in theta)
    if np.any(alpha <= 0) or np.any(lam <= 0):
        raise DomainError("Weibull parameters must be positive")
    life = Weibull(alpha, lam)
    L = consumer.L
    accept = consumer.a1 * (1.0 - life.integrated_sf(L) / L) + consumer.a2
    w1, w2 = policy.w1, policy.w2
    if w2 > w1:
        q = policy.price * life.integrated_cdf(w1, w2) / (w2 - w1)
    else:
        q = policy.price * life.cdf(w1)
    return accept, q


def _quantile_rule(shape: float, rate: float, m: int):
    # Gauss-Legendre in probability space: E[g(X)] = int_0^1 g(F^-1(u)) du
    u, w = special.roots_legendre(m)
    return stats.gamma.ppf(0.5 * (u + 1), shape, scale=1.0 / rate), 0.5 * w


def gamma_quantile_grid(prior: WeibullPriorPair, nodes: int = 96):
    """Quadrature nodes and weights for the shape and rate priors."""
    return _quantile_rule(*prior.shape_hyper, nodes), _quantile_rule(*prior.rate_hyper, nodes)


def prior_consumer_values_weibull(prior: WeibullPriorPair, consumer: ConsumerProfile,
                                  policy: WarrantyPolicy, nodes: int = 96) -> tuple[float, float]:
    """Prior means of the acceptance value and of Q by tensor quadrature."""
    (xa, wa), (xl, wl) = gamma_quantile_grid(prior, nodes)
    acc, q = consumer_values_weibull((xa[:, None], xl[None, :]), consumer, policy)
    w = wa[:, None] * wl[None, :]
    return float((acc * w).sum()), float((q * w).sum())


class _ShapeMarginal:
    """Log posterior of the Weibull shape with the rate integrated out."""

    def __init__(self, prior: WeibullPriorPair, sample: HcsSample):
        (self.u, self.v), (self.c, self.dd) = prior.shape_hyper, prior.rate_hyper
        n, r, t0 = sample.design
        d = sample.d
        x = np.asarray(sample.failures, float)
        if d < r:
            times, mult = np.append(x, t0), np.append(np.ones(d), n - d)
        else:
            times, mult = x, np.append(np.ones(d - 1), 1 + n - r)
        keep = mult > 0
        self.logt, self.mult = np.log(times[keep]), mult[keep]
        self.d = d
        self.sum_log_x = float(np.log(x).sum()) if d else 0.0
        self.sample = sample

    def v_alpha(self, a):
        a = np.asarray(a, float)
        return (self.mult[:, None] * np.exp(np.multiply.outer(self.logt, a))).sum(axis=0).reshape(a.shape)

    def _v_and_slope(self, a):
        a = np.atleast_1d(np.asarray(a, float))
        terms = self.mult[:, None] * np.exp(np.multiply.outer(self.logt, a))
        return terms.sum(axis=0), (terms * self.logt[:, None]).sum(axis=0)

    def logpdf(self, a):
        a = np.asarray(a, float)
        va, _ = self._v_and_slope(a)
        out = ((self.u + self.d - 1) * np.log(a) - self.v * a + (a - 1) * self.sum_log_x
               - (self.c + self.d) * np.log(va + self.dd))
        return out.reshape(a.shape)

    def grad(self, a):
        a = np.asarray(a, float)
        va, slope = self._v_and_slope(a)
        out = (self.u + self.d - 1) / a - self.v + self.sum_log_x - (self.c + self.d) * slope / (va + self.dd)
        return out.reshape(a.shape)

    def log_likelihood_ratio(self, a):
        """Log of posterior / prior for the shape, up to a constant."""
        a = np.asarray(a, float)
        va, _ = self._v_and_slope(a)
        return (self.d * np.log(a) + (a - 1) * self.sum_log_x - (self.c + self.d) * np.log(va + self.dd)).reshape(a.shape)

    def abscissae(self):
        hi = 1.0
        while self.grad(hi) > 0:
            hi *= 2.0
        lo = hi
        while self.grad(lo) < 0:
            lo /= 2.0
        mode = lo if lo == hi else optimize.brentq(lambda a: float(self.grad(a)), lo, hi, xtol=1e-12)
        h = 1e-4 * mode
        curv = float(self.grad(mode + h) - self.grad(mode - h)) / (2 * h)
        s = 1.0 / math.sqrt(-curv) if curv < 0 else 0.5 * mode
        pts = mode + s * np.array([-2.0, -1.0, 0.05, 1.0, 2.0])
        return np.sort(np.where(pts > 0, pts, mode * np.array([0.3, 0.6, 1.0, 1.0, 1.0])))


def sample_weibull_posterior(prior: WeibullPriorPair, sample: HcsSample, count: int,
                             rng: RngStream) -> np.ndarray:
    """Joint posterior draws of (alpha, lambda), returned with shape ``(count, 2)``.

    The shape marginal is log-concave once at least one failure is observed
    (and u + d >= 1) and is sampled exactly by adaptive rejection; otherwise
    sampling-importance-resampling with the prior as proposal is used. The
    rate is then conjugate: Gamma(c + d, v_alpha + dd).
    """
    if count < 1:
        raise DomainError("count must be at least 1")
    gen = rng.generator
    m = _ShapeMarginal(prior, sample)
    if sample.d >= 1 and m.u + m.d >= 1:
        ars = AdaptiveRejectionSampler(m.logpdf, m.grad, m.abscissae())
        alpha = ars.sample(count, gen)
    else:
        pool = max(20 * count, 2000)
        prop = gen.gamma(m.u, 1.0 / m.v, pool)
        logw = m.log_likelihood_ratio(prop)
        w = np.exp(logw - logw.max())
        alpha = prop[gen.choice(pool, size=count, p=w / w.sum())]
    lam = gen.gamma(m.c + m.d, 1.0 / (m.v_alpha(alpha) + m.dd))
    return np.column_stack((alpha, lam))


def posttest_decision_weibull(sample: HcsSample, consumer: ConsumerProfile, policy: WarrantyPolicy,
                              prior: WeibullPriorPair, s2: int, rng: RngStream) -> DecisionOutcome:
    """Posterior-mean decision from ``s2`` posterior draws."""
    draws = sample_weibull_posterior(prior, sample, s2, rng)
    accept, q = consumer_values_weibull((draws[:, 0], draws[:, 1]), consumer, policy)
    e1 = float(np.mean(accept)) - consumer.a3
    e2 = e1 - (float(np.mean(q)) - policy.cw)
    return _outcome(e1, e2, Stage.POST_TEST)


def posttest_decision(sample: HcsSample, consumer: ConsumerProfile, policy: WarrantyPolicy, prior,
                      *, s2: int = 10_000, rng: RngStream | None = None) -> DecisionOutcome:
    if isinstance(prior, ExpConsumerPrior):
        return posttest_decision_exp(sample, consumer, policy, prior)
    return posttest_decision_weibull(sample, consumer, policy, prior, s2, rng or RngStream(0))


def decide(sample: HcsSample | None, consumer: ConsumerProfile, policy: WarrantyPolicy, prior,
           *, s2: int = 10_000, rng: RngStream | None = None) -> DecisionOutcome:
    """Full pipeline: pre-test check, and the post-test check if the test is needed."""
    pre = pretest_decision(consumer, policy, prior)
    if pre.action is not Action.REJECT or sample is None:
        return pre
    return posttest_decision(sample, consumer, policy, prior, s2=s2, rng=rng)
