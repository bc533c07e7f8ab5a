"""Random decision-making sampling plan: the consumer's utility parameters and
prior hyper-parameters are unknown to the manufacturer and modeled as
independent uniforms.

For each simulated sample the manufacturer draws K consumers, runs each one
through the pre-test and post-test checks, and weights its utilities by the
post-test action frequencies among consumers who asked for the test.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import partial

import numpy as np

from .censoring import HcsBatch, HcsSample
from .decision import AW, AWO, REJ, classify, consumer_values_exp
from .errors import DomainError
from .evaluation import PlanEvaluation
from .montecarlo import McConfig, run_blocks, to_evaluation
from .numerics import RngStream
from .scenario import RdspBounds, Scenario, WarrantyPolicy

_PARAMS = ("a1", "a2", "a3", "L", "alpha1", "beta1")


@dataclass(frozen=True)
class ActionProbabilities:
    p0_awo: float
    p0_aw: float
    p0_r: float
    p1_awo: float
    p1_aw: float
    p1_r: float
    conditional_defined: bool = True

    @property
    def pretest(self):
        return (self.p0_awo, self.p0_aw, self.p0_r)

    @property
    def posttest(self):
        return (self.p1_awo, self.p1_aw, self.p1_r)

    @property
    def unconditional(self):
        """Overall action frequencies with the pre-test stage folded in."""
        return (self.p0_awo + self.p0_r * self.p1_awo,
                self.p0_aw + self.p0_r * self.p1_aw,
                self.p0_r * self.p1_r)


def draw_consumers(bounds: RdspBounds, shape, gen: np.random.Generator) -> dict:
    u = gen.random(tuple(shape) + (len(_PARAMS),))
    out = {}
    for i, name in enumerate(_PARAMS):
        lo, hi = getattr(bounds, name)
        out[name] = lo + (hi - lo) * u[..., i]
    return out


def _counts(v, d, bounds: RdspBounds, policy: WarrantyPolicy, gen, k: int):
    """Pre-test and post-test action counts for B samples x K consumers, each of shape (B, 3)."""
    c = draw_consumers(bounds, (np.size(v), k), gen)
    consumer = (c["a1"], c["a2"], c["a3"], c["L"])
    pre = classify(*consumer_values_exp(c["alpha1"], c["beta1"], consumer, policy))
    d = np.asarray(d, float).reshape(-1, 1)
    v = np.asarray(v, float).reshape(-1, 1)
    post = classify(*consumer_values_exp(c["alpha1"] + d, c["beta1"] + v, consumer, policy))
    tested = pre == REJ
    pre_counts = np.stack([(pre == a).sum(axis=1) for a in (AWO, AW, REJ)], axis=1)
    post_counts = np.stack([((post == a) & tested).sum(axis=1) for a in (AWO, AW, REJ)], axis=1)
    return pre_counts, post_counts


def _conditional(post_counts):
    # rows with no tested consumer fall back to (0, 0, 1)
    tested = post_counts.sum(axis=1, keepdims=True)
    fallback = np.array([0.0, 0.0, 1.0])
    with np.errstate(invalid="ignore", divide="ignore"):
        p = post_counts / tested
    return np.where(tested > 0, p, fallback), tested[:, 0] > 0


def estimate_action_probabilities(sample: HcsSample, bounds: RdspBounds, policy: WarrantyPolicy,
                                  rng: RngStream) -> ActionProbabilities:
    """Action frequencies over ``bounds.K`` random consumers facing the same sample."""
    pre, post = _counts(sample.v, sample.d, bounds, policy, rng.generator, bounds.K)
    p0 = pre[0] / bounds.K
    p1, ok = _conditional(post)
    if not ok[0]:
        warnings.warn("no drawn consumer asked for a life test; conditional probabilities set to (0, 0, 1)",
                      RuntimeWarning, stacklevel=2)
    return ActionProbabilities(*map(float, p0), *map(float, p1[0]), conditional_defined=bool(ok[0]))


def _rdsp_weights(bounds: RdspBounds, scenario: Scenario, batch: HcsBatch, gen, s2):
    pre, post = _counts(batch.v, batch.d, bounds, scenario.warranty, gen, bounds.K)
    p1, _ = _conditional(post)
    p0 = pre / bounds.K
    uncond = p0 * np.array([1.0, 1.0, 0.0]) + p0[:, [REJ]] * p1
    return p1, np.column_stack((p0, uncond))


def evaluate_plan_rdsp(design, scenario: Scenario, bounds: RdspBounds | None, cfg: McConfig) -> PlanEvaluation:
    """Manufacturer utility when each replicate's consumer response is the
    post-test action mix of ``K`` random consumers (conditional on reaching the test)."""
    if scenario.model != "exponential":
        raise DomainError("the random-consumer plan is defined for the exponential model")
    bounds = bounds or scenario.rdsp
    if bounds is None:
        raise DomainError("scenario has no rdsp bounds")
    mean, se = run_blocks(design, scenario, cfg, partial(_rdsp_weights, bounds))
    extra = [float(x) for x in mean[7:]]
    return to_evaluation(
        design, scenario, mean, se,
        s1=cfg.s1, seed=cfg.seed, K=bounds.K,
        pretest=extra[:3], unconditional=extra[3:],
    )
