"""Type-I hybrid censoring: designs, samples, the (V, D) law and test-cost moments.

A life test with design ``(n, r, T0)`` puts ``n`` units on test and stops at
``min(x_(r), T0)``. For exponential lifetimes the total time on test ``v`` is
sufficient for the mean, and its joint law with the failure count ``d`` is a
point mass at ``n*T0`` (for ``d = 0``) plus finite alternating mixtures of
shifted gamma densities.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import DomainError, InvalidSampleError
from .numerics import RngStream, quad
from .scenario import ExpManufacturerPrior


@dataclass(frozen=True)
class Design:
    """Life-test plan ``(n, r, T0)``; ``Design(0, 0, 0)`` means no test at all."""

    n: int
    r: int
    t0: float

    def __post_init__(self):
        if not (0 <= self.r <= self.n) or self.t0 < 0:
            raise DomainError(f"invalid design {self}: need 0 <= r <= n and T0 >= 0")

    @property
    def is_null(self) -> bool:
        return self.n == 0

    def require_testable(self):
        if self.n < 1 or self.r < 1 or not self.t0 > 0:
            raise DomainError(f"design {tuple(self)} does not describe a life test")

    def __iter__(self):
        return iter((self.n, self.r, self.t0))

    def __str__(self) -> str:
        return f"({self.n}, {self.r}, {self.t0:g})"


NULL_DESIGN = Design(0, 0, 0.0)


def v_statistic(failures: Sequence[float], d: int, design: Design) -> float:
    """Total time on test under Type-I hybrid censoring."""
    _check_failures(failures, d, design)
    n, r, t0 = design
    if d == 0:
        return n * t0
    total = math.fsum(failures[:d])
    if d < r:
        return total + (n - d) * t0
    return total + (n - r) * failures[r - 1]


def power_v_statistic(failures: Sequence[float], d: int, design: Design, shape) -> float:
    """Weibull analogue of :func:`v_statistic` with every time raised to ``shape``."""
    n, r, t0 = design
    x = np.asarray(failures[:d], float)
    shape = np.asarray(shape, float)
    xs = np.power.outer(x, shape).sum(axis=0) if d else np.zeros_like(shape)
    if d < r:
        return xs + (n - d) * np.power(t0, shape)
    return xs + (n - r) * np.power(x[-1], shape)


def _check_failures(failures, d, design):
    if d != len(failures):
        raise InvalidSampleError(f"d={d} but {len(failures)} failure times given")
    if d > design.r:
        raise InvalidSampleError(f"d={d} exceeds the failure cap r={design.r}")
    if any(b < a for a, b in zip(failures, failures[1:])):
        raise InvalidSampleError("failure times must be nondecreasing")
    if any(x < 0 for x in failures):
        raise InvalidSampleError("failure times must be nonnegative")


@dataclass(frozen=True)
class HcsSample:
    """Observed Type-I hybrid censored data together with the design that produced it."""

    failures: tuple[float, ...]
    d: int
    eta: float
    design: Design

    def __post_init__(self):
        object.__setattr__(self, "failures", tuple(float(x) for x in self.failures))
        _check_failures(self.failures, self.d, self.design)
        t0 = self.design.t0
        if self.eta > t0 * (1 + 1e-12):
            raise InvalidSampleError("test duration exceeds T0")
        if self.failures and self.failures[-1] > self.eta * (1 + 1e-12):
            raise InvalidSampleError("failure observed after the end of the test")
        if self.d < self.design.r and not math.isclose(self.eta, t0, rel_tol=1e-9):
            raise InvalidSampleError("a test with fewer than r failures must run until T0")

    @property
    def v(self) -> float:
        return v_statistic(self.failures, self.d, self.design)

    @classmethod
    def from_failures(cls, failures: Sequence[float], design: Design) -> "HcsSample":
        """Build a sample from the failure times seen before the test stopped."""
        failures = tuple(failures)
        d = len(failures)
        eta = failures[-1] if d == design.r and d > 0 else design.t0
        return cls(failures, d, eta, design)

    def to_dict(self) -> dict:
        n, r, t0 = self.design
        return {"failures": list(self.failures), "d": self.d, "eta": self.eta, "n": n, "r": r, "t0": t0}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: dict) -> "HcsSample":
        keys = {"failures", "d", "eta", "n", "r", "t0"}
        if not isinstance(data, dict) or set(data) - keys or keys - set(data) - {"eta"}:
            raise InvalidSampleError(f"sample must have exactly the keys {sorted(keys)}")
        try:
            design = Design(int(data["n"]), int(data["r"]), float(data["t0"]))
        except DomainError as exc:
            raise InvalidSampleError(str(exc)) from None
        failures = [float(x) for x in data["failures"]]
        d = int(data["d"])
        if "eta" not in data:
            return cls.from_failures(failures, design) if d == len(failures) else cls(failures, d, design.t0, design)
        return cls(failures, d, float(data["eta"]), design)

    @classmethod
    def from_json(cls, text: str) -> "HcsSample":
        return cls.from_dict(json.loads(text))


def generate_hcs_sample(lifetime, design: Design, rng: RngStream) -> HcsSample:
    """Draw one censored sample by sequential construction of uniform order statistics.

    ``lifetime`` fixes the parameters for the whole lot; the i-th order
    statistic is obtained from the (i-1)-th through
    ``U_(i) = 1 - (1 - U_(i-1)) (1 - U_i)^(1/(n-i+1))``, kept on the log
    survival scale for accuracy.
    """
    design.require_testable()
    n, r, t0 = design
    log_s = 0.0
    failures: list[float] = []
    for i in range(1, r + 1):
        u = rng.uniform()
        log_s += math.log1p(-u) / (n - i + 1)
        x = float(lifetime.from_log_sf(log_s))
        if x > t0:
            break
        failures.append(x)
    return HcsSample.from_failures(failures, design)


@dataclass
class HcsBatch:
    """Vectorized samples: ``x`` holds the first ``r`` order statistics (NaN past ``d``)."""

    x: np.ndarray
    d: np.ndarray
    eta: np.ndarray
    design: Design

    @property
    def v(self) -> np.ndarray:
        n, r, t0 = self.design
        xs = np.where(np.isnan(self.x), 0.0, self.x).sum(axis=1)
        last = self.x[:, r - 1]
        return np.where(self.d < r, xs + (n - self.d) * t0, xs + (n - r) * np.nan_to_num(last))

    def sample(self, i: int) -> HcsSample:
        d = int(self.d[i])
        return HcsSample(tuple(self.x[i, :d]), d, float(self.eta[i]), self.design)


def simulate_hcs_batch(lifetime, design: Design, uniforms: np.ndarray) -> HcsBatch:
    """Vectorized form of :func:`generate_hcs_sample`.

    ``lifetime`` parameters must broadcast against shape ``(B, 1)`` and
    ``uniforms`` has shape ``(B, r)``.
    """
    design.require_testable()
    n, r, t0 = design
    steps = np.log1p(-uniforms) / (n - np.arange(r))
    x = lifetime.from_log_sf(np.cumsum(steps, axis=1))
    failed = x <= t0
    d = failed.sum(axis=1)
    x = np.where(failed, x, np.nan)
    eta = np.where(d == r, np.nan_to_num(x[:, r - 1]), t0)
    return HcsBatch(x, d, eta, design)


def density_components(d: int, design: Design) -> list[tuple[float, int]]:
    """Mixture terms of the (V, D = d) density as ``(coefficient, j)`` pairs.

    Each term is ``coef * exp(-s/theta) * Gamma(y - s; shape d, rate 1/theta)``
    with shift ``s = (n - d + j) * T0``; for ``d = r`` the uncensored leading
    term appears with ``j = d - n`` (zero shift).
    """
    n, r, _ = design
    if not 1 <= d <= r:
        return []
    if d < r:
        return [(math.comb(n, d) * math.comb(d, i) * (-1) ** i, i) for i in range(d + 1)]
    out = [(1.0, r - n)]
    scale = r * math.comb(n, r)
    for k in range(1, r + 1):
        out.append((scale * (-1) ** k / (n - r + k) * math.comb(r - 1, k - 1), k))
    return out


def _gamma_pdf(y, shape, rate):
    if y <= 0:
        return 0.0
    return math.exp(shape * math.log(rate) - math.lgamma(shape) + (shape - 1) * math.log(y) - rate * y)


def joint_density(y: float, d: int, theta: float, design: Design) -> float:
    """Density of (V, D) at ``(y, d)`` for exponential mean ``theta``.

    For ``d = 0`` the law is an atom at ``n*T0``; its probability mass is
    returned when ``y == n*T0`` and 0 elsewhere.
    """
    if not theta > 0:
        raise DomainError("theta must be positive")
    n, r, t0 = design
    if d < 0 or d > r:
        raise DomainError(f"d must lie in 0..{r}")
    total = n * t0
    if d == 0:
        return math.exp(-total / theta) if math.isclose(y, total) else 0.0
    if y <= 0 or y > total or (d < r and y <= (n - d) * t0):
        return 0.0
    terms = []
    for coef, j in density_components(d, design):
        shift = (n - d + j) * t0
        if y > shift:
            terms.append(coef * math.exp(-shift / theta) * _gamma_pdf(y - shift, d, 1.0 / theta))
    return max(math.fsum(terms), 0.0)


def _binom_pmf(n: int, j: int, p: float) -> float:
    return math.comb(n, j) * p**j * (1.0 - p) ** (n - j)


def expected_failures_given_theta(lifetime, design: Design) -> float:
    """E[D | theta]: the binomial failure count before T0, capped at r."""
    n, r, t0 = design
    if n == 0 or t0 == 0:
        return 0.0
    p = float(lifetime.cdf(t0))
    return math.fsum(min(j, r) * _binom_pmf(n, j, p) for j in range(n + 1))


def expected_duration_given_theta(lifetime, design: Design) -> float:
    """E[eta | theta] = T0 P(X_(r) > T0) + E[X_(r); X_(r) <= T0]."""
    n, r, t0 = design
    if n == 0 or t0 == 0:
        return 0.0
    p = float(lifetime.cdf(t0))
    tail = 1.0 - math.fsum(_binom_pmf(n, j, p) for j in range(r, n + 1))
    const = r * math.comb(n, r)

    def integrand(x):
        f = float(lifetime.cdf(x))
        return x * f ** (r - 1) * (1.0 - f) ** (n - r) * float(lifetime.pdf(x))

    return t0 * tail + const * quad(integrand, 0.0, t0, tol=1e-10)


def _survival_power_mean(prior: ExpManufacturerPrior, m: float, t0: float) -> float:
    """Prior mean of exp(-m*t0/theta) under the inverse-gamma prior."""
    return math.exp(prior.alpha2 * (math.log(prior.beta2) - math.log(prior.beta2 + m * t0)))


def prior_expected_failures(prior: ExpManufacturerPrior, design: Design) -> float:
    """E[D] under the manufacturer's inverse-gamma prior (closed form)."""
    n, r, t0 = design
    if n == 0 or t0 == 0:
        return 0.0
    terms = []
    for j in range(1, n + 1):
        w = min(j, r) * math.comb(n, j)
        for k in range(j + 1):
            terms.append(w * math.comb(j, k) * (-1) ** k * _survival_power_mean(prior, n - j + k, t0))
    return math.fsum(terms)


def prior_expected_duration(prior: ExpManufacturerPrior, design: Design) -> float:
    """E[eta] under the manufacturer's inverse-gamma prior (closed form).

    Uses E[eta] = integral over [0, T0] of P(fewer than r failures by t).
    """
    n, r, t0 = design
    if n == 0 or t0 == 0:
        return 0.0
    a, b = prior.alpha2, prior.beta2

    def integrated_survival_power(m):
        # integral over [0, T0] of (b / (b + m t))^a dt
        if math.isclose(a, 1.0):
            return b / m * math.log1p(m * t0 / b)
        return b / (m * (a - 1.0)) * (1.0 - (b / (b + m * t0)) ** (a - 1.0))

    terms = []
    for j in range(r):
        w = math.comb(n, j)
        for k in range(j + 1):
            terms.append(w * math.comb(j, k) * (-1) ** k * integrated_survival_power(n - j + k))
    return math.fsum(terms)
