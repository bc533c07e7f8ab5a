"""Bayesian acceptance sampling plans for Type-I hybrid censored life tests
with an optional rebate warranty."""

from .censoring import NULL_DESIGN, Design, HcsSample, generate_hcs_sample, joint_density
from .decision import Action, DecisionOutcome, Stage, decide, posttest_decision, pretest_decision
from .errors import DivergenceError, DomainError, InvalidSampleError, ScenarioError
from .evaluation import PlanEvaluation
from .exact import baseline_utilities, evaluate_plan_exp
from .montecarlo import McConfig, evaluate_plan_mc
from .numerics import RngStream
from .optimizer import SearchSpace, optimize
from .rdsp import evaluate_plan_rdsp
from .scenario import Scenario, bundled_scenario, load_scenario

__version__ = "0.1.0"

__all__ = [
    "Action", "DecisionOutcome", "Design", "DivergenceError", "DomainError", "HcsSample",
    "InvalidSampleError", "McConfig", "NULL_DESIGN", "PlanEvaluation", "RngStream", "Scenario",
    "ScenarioError", "SearchSpace", "Stage", "baseline_utilities", "bundled_scenario", "decide",
    "evaluate_plan_exp", "evaluate_plan_mc", "evaluate_plan_rdsp", "generate_hcs_sample",
    "joint_density", "load_scenario", "optimize", "posttest_decision", "pretest_decision",
]
