"""Pre-posterior Monte Carlo evaluation of a life-test design.

Each replicate draws a lot parameter from the manufacturer's prior, simulates
one censored sample, lets the consumer decide on it, and scores the
manufacturer's utility using the true lot parameter. Replicates are grouped
in fixed-size blocks; block ``k`` always uses the substream ``seed/k`` and
block sums are combined in block order, so results do not depend on how many
workers run the blocks.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special

from .censoring import Design, HcsBatch, simulate_hcs_batch
from .decision import AW, AWO, REJ, classify, consumer_values_exp, posttest_decision_weibull
from .errors import DomainError
from .evaluation import PlanEvaluation
from .lifetime import Exponential, Weibull
from .numerics import RngStream
from .scenario import ManufacturerProfile, Scenario, WarrantyPolicy

BLOCK_SIZE = 2048

# per-replicate quantities accumulated by every engine, in this order
_COLUMNS = ("psi", "p_awo", "p_aw", "p_r", "e_d", "e_eta", "l_w")


@dataclass(frozen=True)
class McConfig:
    s1: int = 100_000
    s2: int = 1_000
    seed: int = 0
    parallel_width: int = 1

    def __post_init__(self):
        if self.s1 < 1 or self.s2 < 1:
            raise DomainError("s1 and s2 must be at least 1")
        if self.seed < 0:
            raise DomainError("seed must be nonnegative")
        if self.parallel_width < 1:
            raise DomainError("parallel_width must be at least 1")


def manufacturer_acceptance_moment(theta, profile: ManufacturerProfile):
    """E[X^q | theta]; ``theta`` is a mean (exponential) or an ``(alpha, lambda)`` pair (Weibull)."""
    q = profile.q
    if isinstance(theta, tuple):
        alpha, lam = (np.asarray(t, float) for t in theta)
        if np.any(alpha <= 0) or np.any(lam <= 0):
            raise DomainError("Weibull parameters must be positive")
        return np.power(lam, -q / alpha) * special.gamma(q / alpha + 1.0)
    theta = np.asarray(theta, float)
    if np.any(theta <= 0):
        raise DomainError("theta must be positive")
    return np.power(theta, q) * math.gamma(q + 1.0)


def lot_expected_rebate(lifetime, policy: WarrantyPolicy):
    """E[q(X) | theta] for a lot with the given lifetime law."""
    if policy.w2 > policy.w1:
        return policy.price * lifetime.integrated_cdf(policy.w1, policy.w2) / (policy.w2 - policy.w1)
    return policy.price * lifetime.cdf(policy.w1)


def draw_lots(scenario: Scenario, size: int, gen: np.random.Generator):
    """Lot parameters from the manufacturer's prior and the matching lifetime law (shape (size, 1))."""
    p = scenario.manufacturer_prior
    if scenario.model == "exponential":
        theta = p.beta2 / gen.gamma(p.alpha2, 1.0, size)
        return theta, Exponential(theta[:, None])
    (u, v), (c, dd) = p.shape_hyper, p.rate_hyper
    alpha = gen.gamma(u, 1.0 / v, size)
    lam = gen.gamma(c, 1.0 / dd, size)
    return (alpha, lam), Weibull(alpha[:, None], lam[:, None])


# An action model maps (scenario, batch, generator, s2) to weights of shape (B, 3)
# over (accept without warranty, accept with warranty, reject), plus optional
# extra per-replicate columns (B, m) to be averaged alongside (or None).
ActionModel = Callable[[Scenario, HcsBatch, np.random.Generator, int], tuple]


def deterministic_consumer(scenario: Scenario, batch: HcsBatch, gen: np.random.Generator, s2: int):
    """One-hot weights from the scenario's consumer deciding on each sample."""
    c = scenario.consumer
    if scenario.model == "exponential":
        prior = scenario.consumer_prior
        e1, e2 = consumer_values_exp(prior.alpha1 + batch.d, prior.beta1 + batch.v,
                                     (c.a1, c.a2, c.a3, c.L), scenario.warranty)
        codes = classify(e1, e2)
    else:
        rng = _GeneratorStream(gen)
        codes = np.array([
            posttest_decision_weibull(batch.sample(i), c, scenario.warranty, scenario.consumer_prior, s2, rng).code
            for i in range(batch.d.size)
        ])
    return np.eye(3)[codes], None


class _GeneratorStream:
    # lets samplers that expect an RngStream draw from a block's generator
    def __init__(self, gen):
        self.generator = gen


def _block(args) -> np.ndarray:
    design, scenario, s2, seed, k, size, model = args
    gen = RngStream(seed).child(k).generator
    theta, life = draw_lots(scenario, size, gen)
    batch = simulate_hcs_batch(life, design, gen.random((size, design.r)))
    weights, extra = model(scenario, batch, gen, s2)
    m, pol = scenario.manufacturer, scenario.warranty
    gain = m.b1 * manufacturer_acceptance_moment(theta, m) - m.b2
    net_rebate = np.ravel(lot_expected_rebate(life, pol)) - pol.cw
    w_awo, w_aw, w_r = weights[:, AWO], weights[:, AW], weights[:, REJ]
    l_w = w_aw * net_rebate
    psi = (w_awo + w_aw) * gain - l_w + w_r * m.b3 - m.b5 * batch.d - m.b6 * batch.eta
    cols = np.stack((psi, w_awo, w_aw, w_r, batch.d.astype(float), batch.eta, l_w))
    if extra is not None:
        cols = np.vstack((cols, np.asarray(extra, float).T))
    return np.stack((cols.sum(axis=1), (cols**2).sum(axis=1)))


def run_blocks(design: Design, scenario: Scenario, cfg: McConfig, model: ActionModel,
               block_size: int = BLOCK_SIZE) -> tuple[np.ndarray, np.ndarray]:
    """Means and standard errors of the per-replicate columns (standard ones first, then extras)."""
    design.require_testable()
    nblocks = -(-cfg.s1 // block_size)
    jobs = [
        (design, scenario, cfg.s2, cfg.seed, k, min(block_size, cfg.s1 - k * block_size), model)
        for k in range(nblocks)
    ]
    if cfg.parallel_width > 1 and nblocks > 1:
        with ProcessPoolExecutor(max_workers=cfg.parallel_width) as pool:
            parts = list(pool.map(_block, jobs))
    else:
        parts = [_block(j) for j in jobs]
    total = parts[0].copy()
    for part in parts[1:]:  # fixed order keeps the floating-point sum reproducible
        total += part
    n = cfg.s1
    mean = total[0] / n
    var = np.maximum(total[1] / n - mean**2, 0.0) * (n / max(n - 1, 1))
    return mean, np.sqrt(var / n)


def to_evaluation(design: Design, scenario: Scenario, mean, se, **extras) -> PlanEvaluation:
    vals = dict(zip(_COLUMNS, mean[: len(_COLUMNS)]))
    vals["psi"] -= scenario.manufacturer.b4 * design.n
    return PlanEvaluation(design, *(float(vals[k]) for k in _COLUMNS),
                          se={k: float(s) for k, s in zip(_COLUMNS, se)}, extras=extras)


def evaluate_plan_mc(design: Design, scenario: Scenario, cfg: McConfig) -> PlanEvaluation:
    """Monte Carlo estimate of the manufacturer's expected utility, with standard errors."""
    mean, se = run_blocks(design, scenario, cfg, deterministic_consumer)
    return to_evaluation(design, scenario, mean, se, s1=cfg.s1, s2=cfg.s2, seed=cfg.seed)


@dataclass
class SimulationResult:
    batch: HcsBatch
    actions: np.ndarray

    @property
    def frequencies(self) -> tuple[np.ndarray, np.ndarray]:
        """Empirical (AWO, AW, R) frequencies and their binomial standard errors."""
        n = self.actions.size
        if n == 0:
            return np.zeros(3), np.zeros(3)
        p = np.bincount(self.actions, minlength=3) / n
        return p, np.sqrt(p * (1 - p) / n)


def simulate_decisions(design: Design, scenario: Scenario, count: int, seed: int, s2: int = 1_000) -> SimulationResult:
    """Samples drawn from the manufacturer's prior predictive and the consumer's post-test action on each.

    Uses the same per-block substreams as :func:`evaluate_plan_mc`.
    """
    design.require_testable()
    if count < 0:
        raise DomainError("count must be nonnegative")
    xs, ds, etas, acts = [np.empty((0, design.r))], [np.empty(0, int)], [np.empty(0)], [np.empty(0, int)]
    for k in range(-(-count // BLOCK_SIZE)):
        size = min(BLOCK_SIZE, count - k * BLOCK_SIZE)
        gen = RngStream(seed).child(k).generator
        _, life = draw_lots(scenario, size, gen)
        batch = simulate_hcs_batch(life, design, gen.random((size, design.r)))
        weights, _ = deterministic_consumer(scenario, batch, gen, s2)
        xs.append(batch.x)
        ds.append(batch.d)
        etas.append(batch.eta)
        acts.append(weights.argmax(axis=1))
    batch = HcsBatch(np.concatenate(xs), np.concatenate(ds), np.concatenate(etas), design)
    return SimulationResult(batch, np.concatenate(acts))
