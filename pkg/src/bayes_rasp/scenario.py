"""Parameter bundles for both negotiating parties and their JSON form.

A scenario file looks like::

    {
      "model": "exponential",
      "consumer": {"a1": 10, "a2": 5, "a3": 9, "L": 15},
      "manufacturer": {"b1": 10, "b2": 5, "b3": 25, "b4": 1, "b5": 0.5, "b6": 0.5, "q": 0.8},
      "warranty": {"w1": 5, "w2": 10, "cs": 2, "cw": 0.5},
      "priors": {"consumer": {"alpha1": 2, "beta1": 3},
                 "manufacturer": {"alpha2": 1.8, "beta2": 18}},
      "rdsp": {"a1": [10, 20], "a2": [1, 7], "a3": [3, 12], "L": [12, 18],
               "alpha1": [1, 8], "beta1": [1.5, 3.5], "K": 500}
    }

Weibull priors are written ``{"shape_hyper": [u, v], "rate_hyper": [c, d]}``
(gamma shape and rate for the Weibull shape and rate respectively).
"""

from __future__ import annotations

import json
from dataclasses import MISSING, asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from .errors import ScenarioError

MODELS = ("exponential", "weibull")


@dataclass(frozen=True)
class ConsumerProfile:
    a1: float
    a2: float
    a3: float
    L: float

    def __post_init__(self):
        if not self.a1 >= 0:
            raise ScenarioError("consumer.a1 must be nonnegative")
        if not self.L > 0:
            raise ScenarioError("consumer.L must be positive")


@dataclass(frozen=True)
class WarrantyPolicy:
    """Combined free-replacement / pro-rata rebate warranty.

    Full refund of ``cs + cw`` on [0, w1), linearly decreasing refund on
    [w1, w2), nothing afterwards. ``cm`` is carried along but enters no utility.
    """

    w1: float
    w2: float
    cs: float
    cw: float
    cm: float = 0.0

    def __post_init__(self):
        if not 0 <= self.w1 <= self.w2:
            raise ScenarioError("warranty requires 0 <= w1 <= w2")
        if self.cs < 0 or self.cw < 0:
            raise ScenarioError("warranty prices cs, cw must be nonnegative")

    @property
    def price(self) -> float:
        return self.cs + self.cw


@dataclass(frozen=True)
class ExpConsumerPrior:
    """Inverse-gamma prior (shape alpha1, scale beta1) on the exponential mean."""

    alpha1: float
    beta1: float

    def __post_init__(self):
        if not (self.alpha1 > 0 and self.beta1 > 0):
            raise ScenarioError("consumer prior requires alpha1 > 0 and beta1 > 0")


@dataclass(frozen=True)
class ExpManufacturerPrior:
    alpha2: float
    beta2: float

    def __post_init__(self):
        if not (self.alpha2 > 0 and self.beta2 > 0):
            raise ScenarioError("manufacturer prior requires alpha2 > 0 and beta2 > 0")


@dataclass(frozen=True)
class WeibullPriorPair:
    """Independent gamma priors: shape ~ Gamma(u, v), rate ~ Gamma(c, dd) (rate-parametrized)."""

    shape_hyper: tuple[float, float]
    rate_hyper: tuple[float, float]

    def __post_init__(self):
        vals = (*self.shape_hyper, *self.rate_hyper)
        if len(vals) != 4 or not all(v > 0 for v in vals):
            raise ScenarioError("Weibull hyper-parameters must be four positive numbers")


@dataclass(frozen=True)
class ManufacturerProfile:
    b1: float
    b2: float
    b3: float
    b4: float
    b5: float
    b6: float
    q: float

    def __post_init__(self):
        if not self.b1 > 0:
            raise ScenarioError("manufacturer.b1 must be positive")
        if not self.q > 0:
            raise ScenarioError("manufacturer.q must be positive")


@dataclass(frozen=True)
class RdspBounds:
    """Uniform ranges for the consumer's parameters under the random-consumer plan."""

    a1: tuple[float, float]
    a2: tuple[float, float]
    a3: tuple[float, float]
    L: tuple[float, float]
    alpha1: tuple[float, float]
    beta1: tuple[float, float]
    K: int = 500

    def __post_init__(self):
        for f in ("a1", "a2", "a3", "L", "alpha1", "beta1"):
            lo, hi = getattr(self, f)
            if lo > hi:
                raise ScenarioError(f"rdsp.{f}: low bound exceeds high bound")
        for f in ("a1", "L", "alpha1", "beta1"):
            if getattr(self, f)[0] <= 0:
                raise ScenarioError(f"rdsp.{f} bounds must be positive")
        if self.K < 1:
            raise ScenarioError("rdsp.K must be at least 1")

    @classmethod
    def point_mass(cls, consumer: ConsumerProfile, prior: ExpConsumerPrior, K: int = 1) -> "RdspBounds":
        pt = lambda v: (v, v)  # noqa: E731
        return cls(pt(consumer.a1), pt(consumer.a2), pt(consumer.a3), pt(consumer.L),
                   pt(prior.alpha1), pt(prior.beta1), K)


@dataclass(frozen=True)
class Scenario:
    model: str
    consumer: ConsumerProfile
    manufacturer: ManufacturerProfile
    warranty: WarrantyPolicy
    consumer_prior: ExpConsumerPrior | WeibullPriorPair
    manufacturer_prior: ExpManufacturerPrior | WeibullPriorPair
    rdsp: RdspBounds | None = None
    units: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if self.model not in MODELS:
            raise ScenarioError(f"model must be one of {MODELS}")
        want = ExpConsumerPrior if self.model == "exponential" else WeibullPriorPair
        if not isinstance(self.consumer_prior, want):
            raise ScenarioError(f"consumer prior does not match model {self.model!r}")
        want = ExpManufacturerPrior if self.model == "exponential" else WeibullPriorPair
        if not isinstance(self.manufacturer_prior, want):
            raise ScenarioError(f"manufacturer prior does not match model {self.model!r}")

    def with_overrides(self, **overrides: float) -> "Scenario":
        """Copy with individual parameters replaced, e.g. ``a3=12`` or ``b1=20``."""
        groups = {
            "consumer": self.consumer,
            "manufacturer": self.manufacturer,
            "warranty": self.warranty,
            "consumer_prior": self.consumer_prior,
            "manufacturer_prior": self.manufacturer_prior,
        }
        changes: dict[str, dict[str, Any]] = {}
        for key, val in overrides.items():
            for gname, obj in groups.items():
                if key in {f.name for f in fields(obj)}:
                    changes.setdefault(gname, {})[key] = val
                    break
            else:
                raise ScenarioError(f"unknown parameter override {key!r}")
        return replace(self, **{g: replace(groups[g], **kv) for g, kv in changes.items()})

    def to_dict(self) -> dict:
        out = {
            "model": self.model,
            "consumer": asdict(self.consumer),
            "manufacturer": asdict(self.manufacturer),
            "warranty": asdict(self.warranty),
            "priors": {
                "consumer": _prior_to_dict(self.consumer_prior),
                "manufacturer": _prior_to_dict(self.manufacturer_prior),
            },
        }
        if self.rdsp is not None:
            out["rdsp"] = {k: (list(v) if isinstance(v, tuple) else v) for k, v in asdict(self.rdsp).items()}
        if self.units:
            out["units"] = dict(self.units)
        return out


def _prior_to_dict(p) -> dict:
    if isinstance(p, WeibullPriorPair):
        return {"shape_hyper": list(p.shape_hyper), "rate_hyper": list(p.rate_hyper)}
    if isinstance(p, ExpConsumerPrior):
        return {"alpha1": p.alpha1, "beta1": p.beta1}
    return {"alpha2": p.alpha2, "beta2": p.beta2}


def _build(cls, data: Any, path: str, *, tuples: tuple[str, ...] = ()):
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: expected an object")
    names = {f.name for f in fields(cls)}
    required = {f.name for f in fields(cls) if f.default is MISSING and f.default_factory is MISSING}
    unknown = set(data) - names
    if unknown:
        raise ScenarioError(f"{path}: unknown key(s) {sorted(unknown)}")
    missing = required - set(data)
    if missing:
        raise ScenarioError(f"{path}: missing key(s) {sorted(missing)}")
    kwargs = {}
    for k, v in data.items():
        if k in tuples:
            if not (isinstance(v, (list, tuple)) and len(v) == 2 and all(_is_num(x) for x in v)):
                raise ScenarioError(f"{path}.{k}: expected a [low, high] pair of numbers")
            v = (float(v[0]), float(v[1]))
        elif k == "K":
            if not isinstance(v, int) or isinstance(v, bool):
                raise ScenarioError(f"{path}.K: expected an integer")
        elif not _is_num(v):
            raise ScenarioError(f"{path}.{k}: expected a number, got {v!r}")
        else:
            v = float(v)
        kwargs[k] = v
    try:
        return cls(**kwargs)
    except ScenarioError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _is_num(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def scenario_from_dict(data: Any) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario: expected a JSON object")
    allowed = {"model", "consumer", "manufacturer", "warranty", "priors", "rdsp", "units", "comment"}
    unknown = set(data) - allowed
    if unknown:
        raise ScenarioError(f"scenario: unknown key(s) {sorted(unknown)}")
    for key in ("model", "consumer", "manufacturer", "warranty", "priors"):
        if key not in data:
            raise ScenarioError(f"scenario: missing key {key!r}")
    model = data["model"]
    if model not in MODELS:
        raise ScenarioError(f"model: expected one of {MODELS}, got {model!r}")
    priors = data["priors"]
    if not isinstance(priors, dict) or set(priors) != {"consumer", "manufacturer"}:
        raise ScenarioError("priors: expected exactly the keys 'consumer' and 'manufacturer'")
    if model == "exponential":
        cprior = _build(ExpConsumerPrior, priors["consumer"], "priors.consumer")
        mprior = _build(ExpManufacturerPrior, priors["manufacturer"], "priors.manufacturer")
    else:
        pair = ("shape_hyper", "rate_hyper")
        cprior = _build(WeibullPriorPair, priors["consumer"], "priors.consumer", tuples=pair)
        mprior = _build(WeibullPriorPair, priors["manufacturer"], "priors.manufacturer", tuples=pair)
    rdsp = None
    if data.get("rdsp") is not None:
        rdsp = _build(RdspBounds, data["rdsp"], "rdsp",
                      tuples=("a1", "a2", "a3", "L", "alpha1", "beta1"))
    units = data.get("units") or {}
    if not isinstance(units, dict):
        raise ScenarioError("units: expected an object")
    return Scenario(
        model=model,
        consumer=_build(ConsumerProfile, data["consumer"], "consumer"),
        manufacturer=_build(ManufacturerProfile, data["manufacturer"], "manufacturer"),
        warranty=_build(WarrantyPolicy, data["warranty"], "warranty"),
        consumer_prior=cprior,
        manufacturer_prior=mprior,
        rdsp=rdsp,
        units=units,
    )


def load_scenario(path: str | Path) -> Scenario:
    """Read and validate a scenario JSON file.

    Malformed JSON is reported with its line and column.
    """
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return scenario_from_dict(data)


def bundled_scenario(name: str) -> Scenario:
    """Load one of the packaged fixtures (``example1``, ``example2_rdsp``, ``application``...)."""
    from importlib import resources

    fname = name if name.endswith(".json") else f"{name}.json"
    with resources.as_file(resources.files("bayes_rasp") / "data" / fname) as p:
        if not p.exists():
            raise ScenarioError(f"no bundled scenario named {name!r}")
        return load_scenario(p)
