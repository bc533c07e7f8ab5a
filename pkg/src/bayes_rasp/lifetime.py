"""Lifetime distributions shared by the two model families.

Parameters may be numpy arrays; every method broadcasts, which is what the
Monte Carlo engines rely on (parameters shaped ``(B, 1)`` against samples
shaped ``(B, k)``).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from .numerics import lower_incomplete_gamma


@dataclass(frozen=True)
class Exponential:
    """Exponential lifetime with mean ``theta``: F(x) = 1 - exp(-x/theta)."""

    theta: float

    def cdf(self, x):
        return -np.expm1(-np.asarray(x, float) / self.theta)

    def sf(self, x):
        return np.exp(-np.asarray(x, float) / self.theta)

    def pdf(self, x):
        return np.exp(-np.asarray(x, float) / self.theta) / self.theta

    def from_log_sf(self, log_s):
        return -self.theta * log_s

    def moment(self, q: float):
        """E[X^q] = theta^q Gamma(q + 1)."""
        return np.power(self.theta, q) * special.gamma(q + 1.0)

    def integrated_cdf(self, a, b):
        """Integral of F over [a, b]."""
        th = self.theta
        return (b - a) - th * (np.exp(-a / th) - np.exp(-b / th))


@dataclass(frozen=True)
class Weibull:
    """Weibull lifetime F(x) = 1 - exp(-rate * x**shape)."""

    shape: float
    rate: float

    def cdf(self, x):
        return -np.expm1(-self.rate * np.power(x, self.shape))

    def sf(self, x):
        return np.exp(-self.rate * np.power(x, self.shape))

    def pdf(self, x):
        x = np.asarray(x, float)
        return self.shape * self.rate * np.power(x, self.shape - 1.0) * self.sf(x)

    def from_log_sf(self, log_s):
        return np.power(-log_s / self.rate, 1.0 / self.shape)

    def moment(self, q: float):
        """E[X^q] = rate^(-q/shape) Gamma(q/shape + 1)."""
        return np.power(self.rate, -q / self.shape) * special.gamma(q / self.shape + 1.0)

    def integrated_sf(self, t):
        """Integral of the survival function over [0, t]."""
        s = 1.0 / self.shape
        return lower_incomplete_gamma(s, self.rate * np.power(t, self.shape)) / (
            self.shape * np.power(self.rate, s)
        )

    def integrated_cdf(self, a, b):
        return (b - a) - (self.integrated_sf(b) - self.integrated_sf(a))
