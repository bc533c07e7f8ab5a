"""Closed-form manufacturer utility for exponential lifetimes.

Every expectation the manufacturer needs has the form

    E_prior[ theta^l * exp(-w/theta) * 1{V in (y1, y2], D = d} ]

with the inverse-gamma prior. The (V, D) density is a finite signed mixture
of shifted gamma densities, and integrating one mixture term against the
prior gives a gamma factor times an incomplete-beta increment (see
:func:`h_term`). The v = nT0 atom at d = 0 contributes a pure gamma factor.

Alternating sums grow like binomial coefficients, so precision degrades for
large n; designs with n <= 30 are the supported range here, larger n should
go to the Monte Carlo engine.
"""

from __future__ import annotations

import math

from scipy import special

from .censoring import (
    Design,
    density_components,
    prior_expected_duration,
    prior_expected_failures,
)
from .decision import (
    AW,
    AWO,
    REJ,
    Thresholds,
    classify,
    consumer_values_exp,
    consumer_values_weibull,
    expected_rebate_ig,
    gamma_quantile_grid,
    pretest_decision,
    thresholds_exp,
)
from .errors import DivergenceError, DomainError
from .evaluation import PlanEvaluation
from .scenario import ExpManufacturerPrior, Scenario

MAX_STABLE_N = 30


def h_term(w: float, l: float, j: int, d: int, s1: float, s2: float,
           prior: ExpManufacturerPrior, design: Design) -> float:
    """Gamma(b) / (beta2 + w + shift)^b * [I_s2(d, b) - I_s1(d, b)] with b = alpha2 - l.

    The shift is (n + j - d) T0. This is the double integral over theta and
    y of theta^(-b-1) exp(-(beta2 + w + shift)/theta) times a gamma(d, 1/theta)
    density in y - shift, restricted to the y-range mapped onto [s1, s2].
    """
    b = prior.alpha2 - l
    if not b > 0:
        raise DivergenceError(f"h_term requires alpha2 > l (alpha2={prior.alpha2}, l={l})", term=f"H(w={w},l={l})")
    if not (0 <= s1 <= 1 and 0 <= s2 <= 1):
        raise DomainError("s1, s2 must lie in [0, 1]")
    shift = (design.n + j - d) * design.t0
    scale = math.exp(math.lgamma(b) - b * math.log(prior.beta2 + w + shift))
    return scale * (special.betainc(d, b, s2) - special.betainc(d, b, s1))


def s_point(x: float, w: float, j: int, d: int, prior: ExpManufacturerPrior, design: Design) -> float:
    """Map a v-limit onto the incomplete-beta argument for mixture term ``j``.

    The limit is first clamped below at the term's shift (the density vanishes there).
    """
    shift = (design.n + j - d) * design.t0
    h = max(x, shift)
    return (h - shift) / (h + prior.beta2 + w)


def _log_prior_const(prior: ExpManufacturerPrior) -> float:
    return prior.alpha2 * math.log(prior.beta2) - math.lgamma(prior.alpha2)


def region_moment(l: float, w: float, d: int, y1: float, y2: float,
                  prior: ExpManufacturerPrior, design: Design) -> float:
    """E_prior[theta^l exp(-w/theta) 1{y1 < V <= y2, D = d}] for d >= 1."""
    if y2 <= y1:
        return 0.0
    b = prior.alpha2 - l
    if not b > 0:
        raise DivergenceError(f"moment of order {l} needs alpha2 > {l}", term=f"moment(l={l})")
    c0 = _log_prior_const(prior)
    terms = []
    for coef, j in density_components(d, design):
        s1 = s_point(y1, w, j, d, prior, design)
        s2 = s_point(y2, w, j, d, prior, design)
        if s2 > s1:
            shift = (design.n + j - d) * design.t0
            scale = math.exp(c0 + math.lgamma(b) - b * math.log(prior.beta2 + w + shift))
            terms.append(coef * scale * (special.betainc(d, b, s2) - special.betainc(d, b, s1)))
    return math.fsum(terms)


def atom_moment(l: float, w: float, prior: ExpManufacturerPrior, design: Design) -> float:
    """E_prior[theta^l exp(-w/theta) 1{D = 0}]: the v = nT0 point mass."""
    b = prior.alpha2 - l
    if not b > 0:
        raise DivergenceError(f"moment of order {l} needs alpha2 > {l}", term=f"atom(l={l})")
    top = design.n * design.t0
    return math.exp(_log_prior_const(prior) + math.lgamma(b) - b * math.log(prior.beta2 + w + top))


def _regions(th: Thresholds, d: int, top: float):
    # (action, lower, upper) intervals in v for failure count d
    return ((AWO, th.c1[d], top), (AW, th.c2[d], th.c1[d]), (REJ, 0.0, th.c2[d]))


def _atom_action(scenario: Scenario, design: Design) -> int:
    prior = scenario.consumer_prior
    c = scenario.consumer
    e1, e2 = consumer_values_exp(prior.alpha1, prior.beta1 + design.n * design.t0,
                                 (c.a1, c.a2, c.a3, c.L), scenario.warranty)
    return int(classify(e1, e2))


def action_moments(l: float, w: float, scenario: Scenario, design: Design, th: Thresholds) -> list[float]:
    """The moment E[theta^l exp(-w/theta); action] for each of the three actions."""
    prior = scenario.manufacturer_prior
    top = design.n * design.t0
    acc = [[], [], []]
    acc[_atom_action(scenario, design)].append(atom_moment(l, w, prior, design))
    for d in range(1, design.r + 1):
        for action, lo, hi in _regions(th, d, top):
            acc[action].append(region_moment(l, w, d, lo, hi, prior, design))
    return [math.fsum(a) for a in acc]


def _require_exponential(scenario: Scenario):
    if scenario.model != "exponential":
        raise DomainError("the closed-form engine supports the exponential model only")


def evaluate_plan_exp(design: Design, scenario: Scenario) -> PlanEvaluation:
    """Expected utility of running the life test ``design`` (exponential model)."""
    _require_exponential(scenario)
    design.require_testable()
    if design.n > MAX_STABLE_N:
        raise DomainError(f"exact engine supports n <= {MAX_STABLE_N}; use the Monte Carlo engine")
    m = scenario.manufacturer
    prior = scenario.manufacturer_prior
    pol = scenario.warranty
    if not prior.alpha2 > max(m.q, 1.0):
        raise DivergenceError("exact evaluation needs alpha2 > max(q, 1)", term="alpha2")
    th = thresholds_exp(design, scenario.consumer, pol, scenario.consumer_prior)

    p_awo, p_aw, p_r = action_moments(0.0, 0.0, scenario, design, th)

    mq = action_moments(m.q, 0.0, scenario, design, th)
    accept_moment = math.gamma(m.q + 1.0) * (mq[AWO] + mq[AW])

    # E[(E[q|theta] - cw) 1_AW]; E[q|theta] = price - price/(w2-w1) * theta (e^{-w1/theta} - e^{-w2/theta})
    if pol.w2 > pol.w1:
        k1 = action_moments(1.0, pol.w1, scenario, design, th)[AW]
        k2 = action_moments(1.0, pol.w2, scenario, design, th)[AW]
        l_w = pol.cs * p_aw - pol.price / (pol.w2 - pol.w1) * (k1 - k2)
    else:
        k = action_moments(0.0, pol.w1, scenario, design, th)[AW]
        l_w = pol.cs * p_aw - pol.price * k

    e_d = prior_expected_failures(prior, design)
    e_eta = prior_expected_duration(prior, design)
    psi = (m.b1 * accept_moment - m.b2 * (p_awo + p_aw) - l_w + m.b3 * p_r
           - m.b4 * design.n - m.b5 * e_d - m.b6 * e_eta)
    return PlanEvaluation(design, psi, p_awo, p_aw, p_r, e_d, e_eta, l_w,
                          extras={"thresholds": {"c1": list(th.c1), "c2": list(th.c2)}})


def manufacturer_prior_moment(scenario: Scenario) -> float:
    """Prior mean of E[X^q | theta]."""
    m = scenario.manufacturer
    if scenario.model == "exponential":
        p = scenario.manufacturer_prior
        if not p.alpha2 > m.q:
            raise DivergenceError("accept baseline needs alpha2 > q", term="E[X^q]")
        return math.exp(m.q * math.log(p.beta2) + math.lgamma(p.alpha2 - m.q) - math.lgamma(p.alpha2)
                        + math.lgamma(m.q + 1.0))
    from .montecarlo import manufacturer_acceptance_moment

    (xa, wa), (xl, wl) = gamma_quantile_grid(scenario.manufacturer_prior)
    vals = manufacturer_acceptance_moment((xa[:, None], xl[None, :]), m)
    return float((vals * wa[:, None] * wl[None, :]).sum())


def manufacturer_prior_rebate(scenario: Scenario) -> float:
    """Prior mean of E[q(X) | theta] under the manufacturer's prior."""
    if scenario.model == "exponential":
        p = scenario.manufacturer_prior
        return float(expected_rebate_ig(p.alpha2, p.beta2, scenario.warranty))
    (xa, wa), (xl, wl) = gamma_quantile_grid(scenario.manufacturer_prior)
    _, q = consumer_values_weibull((xa[:, None], xl[None, :]), scenario.consumer, scenario.warranty)
    return float((q * wa[:, None] * wl[None, :]).sum())


def baseline_utilities(scenario: Scenario) -> tuple[float, float, float]:
    """Manufacturer utility of (accept without warranty, accept with warranty, reject) with no test."""
    m = scenario.manufacturer
    gain = m.b1 * manufacturer_prior_moment(scenario) - m.b2
    with_warranty = gain - manufacturer_prior_rebate(scenario) + scenario.warranty.cw
    return gain, with_warranty, m.b3


def no_test_outcome(scenario: Scenario):
    """Pre-test consumer decision and the manufacturer utility it implies."""
    pre = pretest_decision(scenario.consumer, scenario.warranty, scenario.consumer_prior)
    return pre, baseline_utilities(scenario)[pre.code]
