"""Design search over (n, r, T0).

For every (n, r) with n <= n_max the utility is scanned on a coarse T0 grid,
then refined by golden-section search inside the best coarse cell and its
neighbours (the utility need not be unimodal in T0, so no global shape is
assumed). The best test plan is finally compared with the no-test outcome.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from functools import partial
from pathlib import Path

import numpy as np

from .censoring import NULL_DESIGN, Design
from .decision import Action, DecisionOutcome
from .errors import DomainError
from .evaluation import CSV_HEADER, PlanEvaluation
from .exact import baseline_utilities, evaluate_plan_exp, no_test_outcome
from .montecarlo import McConfig, evaluate_plan_mc
from .rdsp import evaluate_plan_rdsp
from .scenario import Scenario

ENGINES = ("exact", "mc", "rdsp")
_INVPHI = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class SearchSpace:
    n_max: int = 12
    t_min: float = 0.1
    t_max: float = 20.0
    coarse_steps: int = 48
    refine_iters: int = 16
    engine: str = "exact"
    top_k: int = 10  # designs re-evaluated at the larger budget (simulation engines)

    def __post_init__(self):
        if self.n_max < 1:
            raise DomainError("n_max must be at least 1")
        if not 0 < self.t_min < self.t_max:
            raise DomainError("need 0 < t_min < t_max")
        if self.coarse_steps < 2 or self.refine_iters < 0:
            raise DomainError("coarse_steps must be >= 2 and refine_iters >= 0")
        if self.engine not in ENGINES:
            raise DomainError(f"engine must be one of {ENGINES}")

    @property
    def grid(self) -> np.ndarray:
        return np.linspace(self.t_min, self.t_max, self.coarse_steps)


@dataclass
class OptimizationResult:
    design: Design
    psi: float
    evaluation: PlanEvaluation | None
    action: Action | None  # the no-test action when it wins, else None
    pretest: DecisionOutcome
    baselines: tuple[float, float, float]
    trace: list[PlanEvaluation] = field(default_factory=list, repr=False)

    def to_dict(self) -> dict:
        n, r, t0 = self.design
        return {
            "design": [n, r, t0],
            "psi": self.psi,
            "action": self.action.value if self.action else "LifeTest",
            "pretest": self.pretest.to_dict(),
            "baselines": {
                "accept_no_warranty": self.baselines[0],
                "accept_with_warranty": self.baselines[1],
                "reject": self.baselines[2],
            },
            "evaluation": self.evaluation.to_dict() if self.evaluation else None,
            "evaluated_designs": len(self.trace),
        }


def _rank_key(ev: PlanEvaluation):
    n, r, t0 = ev.design
    return (-ev.psi, n, r, t0)


def _evaluator(scenario: Scenario, engine: str, cfg: McConfig | None):
    if engine == "exact":
        return partial(_eval_exact, scenario=scenario)
    fn = _eval_mc if engine == "mc" else _eval_rdsp
    return partial(fn, scenario=scenario, cfg=cfg)


def _eval_exact(design, scenario):
    return evaluate_plan_exp(design, scenario)


def _eval_mc(design, scenario, cfg):
    return evaluate_plan_mc(design, scenario, cfg)


def _eval_rdsp(design, scenario, cfg):
    return evaluate_plan_rdsp(design, scenario, None, cfg)


def search_pair(n: int, r: int, space: SearchSpace, evaluate) -> list[PlanEvaluation]:
    """Coarse scan plus golden-section refinement of T0 for a fixed (n, r)."""
    grid = space.grid
    seen: dict[float, PlanEvaluation] = {}

    def f(t0: float) -> float:
        t0 = float(min(max(t0, space.t_min), space.t_max))
        if t0 not in seen:
            seen[t0] = evaluate(Design(n, r, t0))
        return seen[t0].psi

    vals = [f(t) for t in grid]
    i = int(np.argmax(vals))
    a, b = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    c, d = b - _INVPHI * (b - a), a + _INVPHI * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(space.refine_iters):
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - _INVPHI * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INVPHI * (b - a)
            fd = f(d)
    return list(seen.values())


def _search_job(args):
    n, r, space, evaluate = args
    return search_pair(n, r, space, evaluate)


def optimize(scenario: Scenario, space: SearchSpace, cfg: McConfig | None = None,
             workers: int = 1) -> OptimizationResult:
    """Best design, or the null design when skipping the test is at least as good.

    If the consumer already accepts before testing, no test is run and the
    corresponding no-test utility is returned. Otherwise the best plan is
    compared with the utility ``b3`` of an untested, rejected lot.
    """
    pre, no_test_psi = no_test_outcome(scenario)
    baselines = baseline_utilities(scenario)
    if pre.action is not Action.REJECT:
        return OptimizationResult(NULL_DESIGN, no_test_psi, None, pre.action, pre, baselines)

    screening = cfg or McConfig(s1=10_000)
    if workers > 1:  # parallelism moves from replicates to design pairs
        screening = replace(screening, parallel_width=1)
    evaluate = _evaluator(scenario, space.engine, screening)
    pairs = [(n, r, space, evaluate) for n in range(1, space.n_max + 1) for r in range(1, n + 1)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(pool.map(_search_job, pairs))
    else:
        chunks = [_search_job(p) for p in pairs]
    trace = [ev for chunk in chunks for ev in chunk]
    if not trace:
        raise DomainError("empty search space")
    ranked = sorted(trace, key=_rank_key)

    if space.engine != "exact":
        # second stage: re-score the leaders with ten times the replicates (same seed)
        final_cfg = replace(screening, s1=screening.s1 * 10, parallel_width=max(workers, screening.parallel_width))
        final = _evaluator(scenario, space.engine, final_cfg)
        leaders = [final(ev.design) for ev in ranked[: space.top_k]]
        trace.extend(leaders)
        ranked = sorted(leaders, key=_rank_key)

    best = ranked[0]
    if baselines[2] > best.psi:
        return OptimizationResult(NULL_DESIGN, baselines[2], best, Action.REJECT, pre, baselines, trace)
    return OptimizationResult(best.design, best.psi, best, None, pre, baselines, trace)


def write_trace(path: str | Path, trace: list[PlanEvaluation]):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_HEADER)
        for ev in trace:
            w.writerow(ev.csv_row())
