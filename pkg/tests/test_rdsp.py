import math
import warnings

import numpy as np
import pytest

from bayes_rasp.censoring import Design, HcsSample
from bayes_rasp.decision import posttest_decision_exp, pretest_decision
from bayes_rasp.errors import DomainError
from bayes_rasp.evaluation import FIELDS
from bayes_rasp.montecarlo import McConfig, evaluate_plan_mc
from bayes_rasp.numerics import RngStream
from bayes_rasp.rdsp import ActionProbabilities, estimate_action_probabilities, evaluate_plan_rdsp
from bayes_rasp.scenario import RdspBounds


@pytest.fixture
def point_bounds(example1):
    return RdspBounds.point_mass(example1.consumer, example1.consumer_prior, K=50)


@pytest.mark.parametrize("failures", [[], [0.7], [0.4, 2.2]])
def test_point_mass_is_indicator(example1, point_bounds, table1_design, failures):
    s = HcsSample.from_failures(failures, table1_design)
    probs = estimate_action_probabilities(s, point_bounds, example1.warranty, RngStream(1))
    pre = pretest_decision(example1.consumer, example1.warranty, example1.consumer_prior)
    post = posttest_decision_exp(s, example1.consumer, example1.warranty, example1.consumer_prior)
    assert probs.pretest == tuple(float(i == pre.code) for i in range(3))
    assert probs.posttest == tuple(float(i == post.code) for i in range(3))


def test_conditional_triple_sums_to_one(example2, table1_design):
    s = HcsSample.from_failures([1.0], table1_design)
    probs = estimate_action_probabilities(s, example2.rdsp, example2.warranty, RngStream(2))
    assert probs.conditional_defined
    assert sum(probs.posttest) == pytest.approx(1.0)
    assert sum(probs.unconditional) == pytest.approx(1.0)


def test_pretest_probabilities_stable_across_seeds(example2, table1_design):
    from dataclasses import replace

    bounds = replace(example2.rdsp, K=100_000)
    s = HcsSample.from_failures([1.0], table1_design)
    a = estimate_action_probabilities(s, bounds, example2.warranty, RngStream(3)).pretest
    b = estimate_action_probabilities(s, bounds, example2.warranty, RngStream(4)).pretest
    for pa, pb in zip(a, b):
        se = math.sqrt(max(pa * (1 - pa), 1e-12) * 2 / bounds.K)
        assert abs(pa - pb) < 3 * se


def test_no_tested_consumer_warns(example1, table1_design):
    bounds = RdspBounds.point_mass(example1.consumer.__class__(10, 5, 1e6, 15), example1.consumer_prior, K=10)
    s = HcsSample.from_failures([1.0], table1_design)
    with pytest.warns(RuntimeWarning):
        probs = estimate_action_probabilities(s, bounds, example1.warranty, RngStream(5))
    assert not probs.conditional_defined and probs.posttest == (0.0, 0.0, 1.0)


def test_unconditional_folds_stages():
    p = ActionProbabilities(0.1, 0.2, 0.7, 0.5, 0.3, 0.2)
    np.testing.assert_allclose(p.unconditional, (0.1 + 0.35, 0.2 + 0.21, 0.14))


def test_point_mass_reduces_to_deterministic_consumer(example1, point_bounds, table1_design):
    cfg = McConfig(s1=30_000, seed=6)
    rd = evaluate_plan_rdsp(table1_design, example1, point_bounds, cfg)
    mc = evaluate_plan_mc(table1_design, example1, cfg)
    for f in FIELDS:
        assert abs(getattr(rd, f) - getattr(mc, f)) <= 3 * mc.se[f] + 1e-9


def test_reproducible_and_worker_invariant(example2):
    design = Design(3, 3, 4.73)
    a = evaluate_plan_rdsp(design, example2, None, McConfig(s1=2500, seed=8))
    b = evaluate_plan_rdsp(design, example2, None, McConfig(s1=2500, seed=8, parallel_width=2))
    assert a.to_dict() == b.to_dict()


def test_extras_report_pretest_and_unconditional(example2):
    ev = evaluate_plan_rdsp(Design(3, 3, 4.73), example2, None, McConfig(s1=500, seed=1))
    assert sum(ev.extras["pretest"]) == pytest.approx(1.0)
    assert sum(ev.extras["unconditional"]) == pytest.approx(1.0)


def test_weibull_refused(application):
    with pytest.raises(DomainError):
        evaluate_plan_rdsp(Design(3, 3, 0.4), application, None, McConfig(s1=10))


def test_missing_bounds(example1):
    with pytest.raises(DomainError):
        evaluate_plan_rdsp(Design(3, 3, 4.0), example1, None, McConfig(s1=10))
