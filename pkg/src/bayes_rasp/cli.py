"""Command-line interface: ``bayes-rasp <verb> ...``.

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""

from __future__ import annotations

import csv
import io
import json
import math
from pathlib import Path

import click

from .censoring import NULL_DESIGN, Design, HcsSample
from .decision import Action
from .decision import decide as run_decision
from .errors import DivergenceError, DomainError, InvalidSampleError, ScenarioError
from .exact import evaluate_plan_exp, manufacturer_prior_rebate, no_test_outcome
from .montecarlo import McConfig, evaluate_plan_mc, simulate_decisions
from .optimizer import SearchSpace, optimize, write_trace
from .rdsp import estimate_action_probabilities, evaluate_plan_rdsp
from .numerics import RngStream
from .scenario import Scenario, bundled_scenario, load_scenario
from .tables import APPLICATION_DECISIONS, TABLES

INPUT_ERRORS = (ScenarioError, InvalidSampleError, DomainError, json.JSONDecodeError, FileNotFoundError)


def _scenario(ref: str) -> Scenario:
    if Path(ref).exists():
        return load_scenario(ref)
    try:
        return bundled_scenario(ref)
    except ScenarioError:
        raise ScenarioError(f"{ref}: no such file or bundled scenario") from None


def _engine(scenario: Scenario, engine: str) -> str:
    if engine == "auto":
        return "exact" if scenario.model == "exponential" else "mc"
    return engine


def _emit(text: str, out: str | None):
    # output is produced only after all work succeeded, so failures leave no partial files
    if out:
        Path(out).write_text(text)
    else:
        click.echo(text, nl=not text.endswith("\n"))


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_default)


def _default(o):
    if hasattr(o, "item"):
        return o.item()
    if hasattr(o, "tolist"):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o).__name__}")


def _evaluate(design: Design, sc: Scenario, engine: str, cfg: McConfig):
    if engine == "exact":
        return evaluate_plan_exp(design, sc)
    if engine == "mc":
        return evaluate_plan_mc(design, sc, cfg)
    return evaluate_plan_rdsp(design, sc, None, cfg)


def common(f):
    f = click.option("--out", type=click.Path(dir_okay=False), default=None, help="Write output here instead of stdout.")(f)
    f = click.option("--engine", type=click.Choice(["auto", "exact", "mc", "rdsp"]), default="auto", show_default=True)(f)
    f = click.option("--threads", type=click.IntRange(min=1), default=1, show_default=True,
                     help="Worker processes (results do not depend on it).")(f)
    f = click.option("--seed", type=click.IntRange(min=0, max=2**64 - 1), default=0, show_default=True)(f)
    return f


def mc_options(f):
    f = click.option("--s2", type=click.IntRange(min=1), default=1000, show_default=True,
                     help="Posterior draws per replicate (Weibull).")(f)
    f = click.option("--s1", type=click.IntRange(min=1), default=100_000, show_default=True,
                     help="Outer Monte Carlo replicates.")(f)
    return f


def design_option(f):
    return click.option("--design", "design", nargs=3, type=(int, int, float), required=True,
                        metavar="N R T0", help="Life-test plan.")(f)


@click.group()
@click.version_option(package_name="artifact")
def cli():
    """Bayesian reliability acceptance sampling under hybrid censoring and warranty."""


@cli.command("evaluate")
@click.argument("scenario")
@design_option
@mc_options
@common
def evaluate_cmd(scenario, design, s1, s2, seed, threads, engine, out):
    """Expected manufacturer utility of one life-test plan."""
    sc = _scenario(scenario)
    eng = _engine(sc, engine)
    ev = _evaluate(Design(*design), sc, eng, McConfig(s1=s1, s2=s2, seed=seed, parallel_width=threads))
    _emit(_json({"engine": eng, **ev.to_dict()}), out)


@cli.command("optimize")
@click.argument("scenario")
@click.option("--n-max", type=click.IntRange(min=1), default=12, show_default=True)
@click.option("--t-min", type=float, default=None, help="Smallest T0 [default: 0.1 for exponential, 0.05 for Weibull].")
@click.option("--t-max", type=float, default=None, help="Largest T0 [default: 20 for exponential, 2 for Weibull].")
@click.option("--coarse-steps", type=click.IntRange(min=2), default=48, show_default=True)
@click.option("--refine-iters", type=click.IntRange(min=0), default=16, show_default=True)
@click.option("--s1", type=click.IntRange(min=1), default=10_000, show_default=True,
              help="Screening replicates (simulation engines; leaders re-scored with 10x).")
@click.option("--s2", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--trace", type=click.Path(dir_okay=False), default=None, help="Write the search trace CSV here.")
@common
def optimize_cmd(scenario, n_max, t_min, t_max, coarse_steps, refine_iters, s1, s2, trace, seed, threads, engine, out):
    """Search (n, r, T0) for the plan maximizing the manufacturer's utility."""
    sc = _scenario(scenario)
    weibull = sc.model == "weibull"
    space = SearchSpace(
        n_max=n_max,
        t_min=t_min if t_min is not None else (0.05 if weibull else 0.1),
        t_max=t_max if t_max is not None else (2.0 if weibull else 20.0),
        coarse_steps=coarse_steps,
        refine_iters=refine_iters,
        engine=_engine(sc, engine),
    )
    res = optimize(sc, space, McConfig(s1=s1, s2=s2, seed=seed), workers=threads)
    if trace:
        write_trace(trace, res.trace)
    _emit(_json({"engine": space.engine, **res.to_dict()}), out)


def _read_samples(path: str) -> list[HcsSample]:
    data = json.loads(Path(path).read_text())
    if isinstance(data, dict) and "samples" in data:
        data = data["samples"]
    items = data if isinstance(data, list) else [data]
    return [HcsSample.from_dict(item) for item in items]


@cli.command("decide")
@click.argument("scenario")
@click.argument("data", type=click.Path(exists=True, dir_okay=False))
@click.option("--s2", type=click.IntRange(min=1), default=10_000, show_default=True,
              help="Posterior draws for the Weibull decision.")
@common
def decide_cmd(scenario, data, s2, seed, threads, engine, out):
    """Consumer decision (pre-test, then post-test) on observed censored data.

    DATA is one sample object, a list of them, or the output of ``simulate``.
    """
    sc = _scenario(scenario)
    try:
        samples = _read_samples(data)
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, InvalidSampleError):
            raise
        raise InvalidSampleError(f"{data}: {exc}") from None
    rng = RngStream(seed)
    results = []
    for i, s in enumerate(samples):
        o = run_decision(s, sc.consumer, sc.warranty, sc.consumer_prior, s2=s2, rng=rng.child(i))
        results.append({"sample": s.to_dict(), "decision": o.to_dict()})
    _emit(_json(results[0] if len(results) == 1 else results), out)


@cli.command("simulate")
@click.argument("scenario")
@design_option
@click.option("--count", "-N", type=click.IntRange(min=0), default=1000, show_default=True)
@click.option("--s2", type=click.IntRange(min=1), default=1000, show_default=True)
@common
def simulate_cmd(scenario, design, count, s2, seed, threads, engine, out):
    """Draw censored samples from the prior predictive with the consumer's decisions."""
    sc = _scenario(scenario)
    d = Design(*design)
    res = simulate_decisions(d, sc, count, seed, s2)
    p, se = res.frequencies
    names = ("AcceptNoWarranty", "AcceptWithWarranty", "Reject")
    doc = {
        "design": list(design),
        "count": count,
        "seed": seed,
        "frequencies": dict(zip(names, p.tolist())),
        "standard_errors": dict(zip(names, se.tolist())),
        "samples": [res.batch.sample(i).to_dict() for i in range(count)],
        "actions": [names[a] for a in res.actions],
    }
    _emit(json.dumps(doc), out)


@cli.command("rdsp")
@click.argument("scenario")
@design_option
@click.option("--s1", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--data", type=click.Path(exists=True, dir_okay=False), default=None,
              help="Also report action probabilities of random consumers facing this sample.")
@common
def rdsp_cmd(scenario, design, s1, data, seed, threads, engine, out):
    """Random-consumer plan evaluation (uniform consumer parameters)."""
    sc = _scenario(scenario)
    if sc.rdsp is None:
        raise ScenarioError(f"{scenario}: no 'rdsp' block")
    d = Design(*design)
    ev = evaluate_plan_rdsp(d, sc, None, McConfig(s1=s1, seed=seed, parallel_width=threads))
    doc = {"evaluation": ev.to_dict()}
    if data:
        probs = [estimate_action_probabilities(s, sc.rdsp, sc.warranty, RngStream(seed).child(i))
                 for i, s in enumerate(_read_samples(data))]
        doc["action_probabilities"] = [
            {"pretest": p.pretest, "posttest_given_test": p.posttest, "unconditional": p.unconditional,
             "conditional_defined": p.conditional_defined} for p in probs
        ]
    _emit(_json(doc), out)


_REPRO_FIELDS = ("psi", "p_awo", "p_aw", "p_r", "e_d", "e_eta", "l_w")


def _deviation_rows(table_key, label, published, computed):
    rows = []
    for k in ("design",) + _REPRO_FIELDS:
        pv, cv = published[k], computed.get(k)
        if k == "design":
            rows.append([table_key, label, k, " ".join(map(str, pv)), " ".join(f"{x:g}" for x in cv), "", ""])
            continue
        dev = rel = ""
        if cv is not None and not (isinstance(pv, float) and math.isnan(pv)):
            dev = f"{cv - pv:.4g}"
            rel = f"{(cv - pv) / pv:.4g}" if pv else ""
        rows.append([table_key, label, k, "" if isinstance(pv, float) and math.isnan(pv) else pv,
                     "" if cv is None else f"{cv:.6g}", dev, rel])
    return rows


def _no_test_fields(sc: Scenario, code: int) -> dict:
    # probability mass on the untested action; the warranty loss is the prior net rebate
    l_w = manufacturer_prior_rebate(sc) - sc.warranty.cw if code == 1 else 0.0
    return {"p_awo": float(code == 0), "p_aw": float(code == 1), "p_r": float(code == 2),
            "e_d": 0.0, "e_eta": 0.0, "l_w": l_w}


@cli.command("reproduce")
@click.argument("table_id", type=click.Choice(sorted(TABLES)))
@click.option("--mode", type=click.Choice(["auto", "optimize", "evaluate"]), default="auto", show_default=True,
              help="Re-optimize each row or evaluate the published design "
                   "(auto: optimize for closed-form tables, evaluate for simulation tables).")
@click.option("--s1", type=click.IntRange(min=1), default=100_000, show_default=True)
@click.option("--s2", type=click.IntRange(min=1), default=1000, show_default=True)
@click.option("--n-max", type=click.IntRange(min=1), default=12, show_default=True)
@common
def reproduce_cmd(table_id, mode, s1, s2, n_max, seed, threads, engine, out):
    """Recompute a published table; prints published vs computed values with deviations (CSV)."""
    table = TABLES[table_id]
    base = bundled_scenario(table.scenario)
    eng = table.engine if engine == "auto" else engine
    if mode == "auto":
        mode = "optimize" if eng == "exact" else "evaluate"
    cfg = McConfig(s1=s1, s2=s2, seed=seed, parallel_width=threads)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["table", "row", "field", "published", "computed", "deviation", "relative_deviation"])
    for row in table.rows:
        sc = base.with_overrides(**row.overrides)
        label = " ".join(f"{k}={v}" for k, v in row.overrides.items()) or "base"
        published = {"design": row.design, "psi": row.psi, "p_awo": row.probs[0], "p_aw": row.probs[1],
                 "p_r": row.probs[2], "e_d": row.e_d, "e_eta": row.e_eta, "l_w": row.l_w}
        if mode == "optimize":
            weibull = sc.model == "weibull"
            space = SearchSpace(n_max=n_max, t_min=0.05 if weibull else 0.1, t_max=2.0 if weibull else 20.0, engine=eng)
            res = optimize(sc, space, McConfig(s1=max(s1 // 10, 1), s2=s2, seed=seed), workers=threads)
            ev = res.evaluation if res.action is None else None
            computed = {"design": tuple(res.design), "psi": res.psi}
        elif row.design[0] == 0:
            # published plan is "no test": report the pre-test outcome
            pre, psi = no_test_outcome(sc)
            ev = None
            computed = {"design": tuple(NULL_DESIGN), "psi": psi, **_no_test_fields(sc, pre.code)}
        else:
            d = Design(*row.design)
            ev = _evaluate(d, sc, eng, cfg)
            computed = {"design": tuple(d)}
        if ev is not None:
            computed.update({k: getattr(ev, k) for k in _REPRO_FIELDS})
            if mode == "optimize":
                computed["psi"] = res.psi
        elif mode == "optimize":
            # no-test outcome: probability mass sits on the pre-test action
            computed.update(_no_test_fields(sc, res.pretest.code if res.action is not Action.REJECT else 2))
        w.writerows(_deviation_rows(table_id, label, published, computed))
    if table_id == "app":
        sc = base
        for i, (fails, e1, e2, action) in enumerate(APPLICATION_DECISIONS, start=1):
            s = HcsSample.from_failures(fails, Design(10, 5, 0.481))
            o = run_decision(s, sc.consumer, sc.warranty, sc.consumer_prior, s2=10_000, rng=RngStream(seed).child(i))
            label = f"dataset{i}"
            w.writerow(["app", label, "e1", e1, f"{o.e1:.6g}", f"{o.e1 - e1:.4g}", f"{(o.e1 - e1) / e1:.4g}"])
            w.writerow(["app", label, "e2", e2, f"{o.e2:.6g}", f"{o.e2 - e2:.4g}", f"{(o.e2 - e2) / e2:.4g}"])
            w.writerow(["app", label, "decision", action, o.action.value, "", ""])
    _emit(buf.getvalue(), out)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, prog_name="bayes-rasp", standalone_mode=False)
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except click.ClickException as exc:
        exc.show()
        return 2
    except click.exceptions.Abort:
        click.echo("aborted", err=True)
        return 1
    except DivergenceError as exc:
        click.echo(f"numerical error ({exc.term or 'unknown term'}): {exc}", err=True)
        return 3
    except INPUT_ERRORS as exc:
        click.echo(f"input error: {exc}", err=True)
        return 2
    except (ArithmeticError, FloatingPointError) as exc:
        click.echo(f"numerical error: {exc}", err=True)
        return 3
    return 0
