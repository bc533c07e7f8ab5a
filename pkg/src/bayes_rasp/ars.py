"""Adaptive rejection sampling for log-concave densities on (lower, inf).

Tangent-line upper hull with chord squeeze (Gilks & Wild). Candidates are
proposed in batches from the current hull and each is accepted against that
same hull, so every accepted point is an exact draw; points evaluated along
the way refine the hull for the next batch.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

from .errors import DomainError

MAX_ABSCISSAE = 40


class AdaptiveRejectionSampler:
    def __init__(
        self,
        logpdf: Callable[[np.ndarray], np.ndarray],
        grad: Callable[[np.ndarray], np.ndarray],
        abscissae,
        lower: float = 0.0,
    ):
        x = np.unique(np.asarray(abscissae, float))
        if x.size < 2 or np.any(x <= lower):
            raise DomainError("need at least two distinct abscissae inside the domain")
        self.logpdf, self.grad, self.lower = logpdf, grad, float(lower)
        self.x = x
        self.h = np.asarray(logpdf(x), float)
        self.g = np.asarray(grad(x), float)
        if not self.g[-1] < 0:
            raise DomainError("rightmost abscissa must lie beyond the mode")
        self._build()

    def _build(self):
        x, h, g = self.x, self.h, self.g
        dg = g[:-1] - g[1:]
        with np.errstate(divide="ignore", invalid="ignore"):
            z = (h[1:] - h[:-1] - x[1:] * g[1:] + x[:-1] * g[:-1]) / dg
        flat = ~(np.abs(dg) > 1e-12 * (np.abs(g[:-1]) + np.abs(g[1:]) + 1e-300))
        z = np.where(flat, 0.5 * (x[:-1] + x[1:]), z)
        self.z = np.concatenate(([self.lower], z, [np.inf]))
        # log of the hull mass on each segment, relative to the hull peak
        lo, hi = self.z[:-1], self.z[1:]
        intercept = h - g * x
        self._intercept = intercept
        u_lo = intercept + g * lo
        with np.errstate(over="ignore", invalid="ignore"):
            width = hi - lo
            gw = g * width
            # log of integral of exp(g t) dt over [0, width], stable for both signs of g
            log_int = np.where(
                np.abs(g) < 1e-12,
                np.log(width),
                np.where(
                    gw > 0,
                    gw + np.log(-np.expm1(-gw)) - np.log(np.abs(g)),
                    np.log(-np.expm1(gw)) - np.log(np.abs(g)),
                ),
            )
            log_int = np.where(np.isinf(hi), -np.log(-g), log_int)
        logm = u_lo + log_int
        logm = np.where(np.isnan(logm), -np.inf, logm)
        self._logmass = logm
        p = np.exp(logm - logm.max())
        self._cum = np.cumsum(p) / p.sum()

    def _upper(self, t, k):
        return self._intercept[k] + self.g[k] * t

    def _squeeze(self, t):
        x, h = self.x, self.h
        k = np.searchsorted(x, t) - 1
        inside = (k >= 0) & (k < x.size - 1)
        kc = np.clip(k, 0, x.size - 2)
        lam = (t - x[kc]) / (x[kc + 1] - x[kc])
        return np.where(inside, (1 - lam) * h[kc] + lam * h[kc + 1], -np.inf)

    def _propose(self, m: int, gen: np.random.Generator):
        k = np.minimum(np.searchsorted(self._cum, gen.random(m), side="right"), self._cum.size - 1)
        u = gen.random(m)
        lo, hi, g = self.z[k], self.z[k + 1], self.g[k]
        with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
            finite = np.isfinite(hi)
            width = np.where(finite, hi - lo, 1.0)
            gw = g * width
            small = np.abs(g) < 1e-12
            # inverse cdf of exp(g t) on [0, width] (or [0, inf) when g < 0)
            t_fin = np.where(
                gw > 0,
                width + np.log(u + (1 - u) * np.exp(-gw)) / np.where(small, 1.0, g),
                np.log1p(u * np.expm1(gw)) / np.where(small, 1.0, g),
            )
            t_fin = np.where(small, u * width, t_fin)
            t_inf = np.log1p(-u) / g
        t = lo + np.where(finite, t_fin, t_inf)
        return t, k

    def sample(self, size: int, gen: np.random.Generator, batch: int | None = None) -> np.ndarray:
        out = np.empty(size)
        filled = 0
        while filled < size:
            m = batch or max(16, int(1.3 * (size - filled)) + 8)
            t, k = self._propose(m, gen)
            w = np.log(gen.random(m))
            u = self._upper(t, k)
            ok = w <= self._squeeze(t) - u
            need = ~ok
            if need.any():
                ht = np.asarray(self.logpdf(t[need]), float)
                ok[need] = w[need] <= ht - u[need]
                self._refine(t[need], ht)
            acc = t[ok][: size - filled]
            out[filled : filled + acc.size] = acc
            filled += acc.size
        return out

    def _refine(self, t, ht):
        room = MAX_ABSCISSAE - self.x.size
        if room <= 0:
            return
        keep = np.isfinite(ht) & (t > self.lower)
        t, ht = t[keep][:room], ht[keep][:room]
        if t.size == 0:
            return
        x = np.concatenate((self.x, t))
        order = np.argsort(x)
        x = x[order]
        if np.any(np.diff(x) <= 0):
            _, idx = np.unique(x, return_index=True)
            order = order[idx]
            x = x[idx]
        self.h = np.concatenate((self.h, ht))[order]
        self.g = np.concatenate((self.g, np.asarray(self.grad(t), float)))[order]
        self.x = x
        self._build()
