"""Closed-form iterated oscillatory integrals.

An :class:`ExpSumExpression` stores ``F(t) = exp(log_scale) * sum_j c_j t^p_j
exp(i W_j t)``. Integrating ``int_0^t ds exp(i w s) F(s)`` maps each term to a
finite sum of the same form, so a chain of nested integrals

    int_0^T dt_d e^{i w_d t_d} ... int_0^{t_2} dt_1 e^{i w_1 t_1}

is evaluated exactly by repeated application, innermost frequency first.

The antiderivative of ``t^p e^{iWt}`` carries ``1/W^{p+1}`` coefficients that
cancel when ``|W| t`` is small. Frequencies within ``eps`` of zero are
treated as exactly zero; slightly larger ones are expanded as a Taylor series
in ``W``, which is exact to double precision up to a stated time horizon.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .logspace import LogMagnitude

DEGENERACY_RTOL = 1e-9
DEGENERACY_ATOL = 1e-13
NEAR_DEGENERATE = 1e-6  # |W| below this share of the frequency scale needs a horizon
SERIES_TOL = 1e-18
GRID_DIVISIONS = 10
_GOLDEN = (math.sqrt(5) - 1) / 2


@dataclass(frozen=True)
class ExpSumExpression:
    coefficients: np.ndarray  # complex, normalised so max |c| = 1 (or all zero)
    frequencies: np.ndarray
    powers: np.ndarray
    log_scale: float = 0.0
    eps: float = 0.0
    near: float = 0.0
    horizon: float | None = None

    @classmethod
    def one(cls, eps: float = 0.0, near: float = 0.0, horizon: float | None = None) -> "ExpSumExpression":
        return cls(np.array([1.0 + 0j]), np.array([0.0]), np.array([0], dtype=np.int64), 0.0, eps, near, horizon)

    def __len__(self):
        return len(self.coefficients)

    @property
    def constant_term(self) -> complex:
        """Value at ``t = 0`` (only ``p = 0`` terms survive)."""
        return complex(np.sum(self.coefficients[self.powers == 0])) * math.exp(self.log_scale)

    def integrate(self, omega: float) -> "ExpSumExpression":
        """``G(t) = int_0^t ds exp(i omega s) F(s)``."""
        coefs, freqs, pows = [], [], []
        const = 0j
        for c, W, p in zip(self.coefficients, self.frequencies + omega, self.powers):
            if c == 0:
                continue
            if abs(W) <= self.eps:
                coefs.append(c / (p + 1))
                freqs.append(0.0)
                pows.append(p + 1)
                continue
            if self.horizon is not None and abs(W) * self.horizon < 1:
                # sum_k (iW)^k/k! t^{p+k+1}/(p+k+1): converges fast for |W| t < 1
                term, k = 1.0 + 0j, 0
                while True:
                    coefs.append(c * term / (p + k + 1))
                    freqs.append(0.0)
                    pows.append(p + k + 1)
                    k += 1
                    term *= 1j * W / k
                    if abs(term) * self.horizon**k < SERIES_TOL:
                        break
                continue
            if abs(W) < self.near:
                raise ValueError(f"frequency sum {W:.3g} is nearly degenerate; pass a time horizon")
            iw = 1j * W
            # antiderivative e^{iWs} sum_j (-1)^j p!/(p-j)! s^{p-j} / (iW)^{j+1}
            ratio = 1.0 / iw
            for j in range(p + 1):
                coefs.append(c * ratio)
                freqs.append(W)
                pows.append(p - j)
                ratio *= -(p - j) / iw
            const -= c * (-1) ** p * math.factorial(p) / iw ** (p + 1)
        coefs.append(const)
        freqs.append(0.0)
        pows.append(0)
        return _normalise(np.array(coefs), np.array(freqs), np.array(pows, dtype=np.int64), self)

    def scaled(self, factor: LogMagnitude) -> "ExpSumExpression":
        """Multiply by a positive or negative real ``LogMagnitude``."""
        if factor.sign == 0:
            return replace(self, coefficients=np.zeros(1, complex), frequencies=np.zeros(1),
                           powers=np.zeros(1, np.int64), log_scale=0.0)
        return replace(self, coefficients=self.coefficients * factor.sign, log_scale=self.log_scale + factor.log)

    def evaluate_scaled(self, t) -> np.ndarray:
        """``F(t) / exp(log_scale)``; avoids under/overflow of the overall factor."""
        t = np.asarray(t, dtype=float)
        if self.horizon is not None and t.size and float(np.max(t)) > self.horizon * (1 + 1e-12):
            raise ValueError(f"expression is valid up to t={self.horizon}")
        out = np.zeros(t.shape, dtype=complex)
        for c, W, p in zip(self.coefficients, self.frequencies, self.powers):
            out += c * t**p * np.exp(1j * W * t)
        return out

    def __call__(self, t) -> np.ndarray:
        return self.evaluate_scaled(t) * math.exp(self.log_scale)

    def max_abs(self, T: float) -> tuple[float, LogMagnitude]:
        """``(t*, max_{0<=t<=T} |F(t)|)`` via grid plus golden-section refinement."""
        t_star, val = maximise_abs(self.evaluate_scaled, self.frequencies, T)
        if val == 0:
            return t_star, LogMagnitude.zero()
        return t_star, LogMagnitude(1, math.log(val) + self.log_scale)


def _normalise(coefs, freqs, pows, like: ExpSumExpression) -> ExpSumExpression:
    order = np.lexsort((freqs, pows))
    coefs, freqs, pows = coefs[order], freqs[order], pows[order]
    keep_c, keep_f, keep_p = [], [], []
    for c, W, p in zip(coefs, freqs, pows):
        if keep_p and keep_p[-1] == p and abs(keep_f[-1] - W) <= max(like.eps, 1e-15 * abs(W)):
            keep_c[-1] += c
        else:
            keep_c.append(c)
            keep_f.append(W)
            keep_p.append(p)
    c = np.array(keep_c)
    big = np.max(np.abs(c)) if len(c) else 0.0
    log_scale = like.log_scale
    if big != 0 and np.isfinite(big):
        c, log_scale = c / big, log_scale + math.log(big)
    return replace(like, coefficients=c, frequencies=np.array(keep_f), powers=np.array(keep_p, dtype=np.int64),
                   log_scale=log_scale)


def degeneracy_threshold(frequencies) -> float:
    w = np.abs(np.asarray(frequencies, dtype=float))
    return max(DEGENERACY_RTOL * (float(w.max()) if w.size else 0.0), DEGENERACY_ATOL)


def nested_expression(frequencies, horizon: float | None = None) -> ExpSumExpression:
    """Closed form of the iterated integral; ``frequencies[0]`` is innermost.

    ``horizon`` bounds the times at which the result will be evaluated; it is
    required only when some partial frequency sum is tiny but nonzero.
    """
    frequencies = list(frequencies)
    if not frequencies:
        raise ValueError("need at least one frequency")
    scale = float(np.max(np.abs(frequencies)))
    expr = ExpSumExpression.one(degeneracy_threshold(frequencies), NEAR_DEGENERATE * scale, horizon)
    for w in frequencies:
        expr = expr.integrate(float(w))
    return expr


def nested_integral(frequencies, T: float):
    """Return ``(expression, t*, max_{t<=T} |value|)`` for the iterated integral."""
    expr = nested_expression(frequencies, horizon=max(T, 0.0))
    t_star, peak = expr.max_abs(T)
    return expr, t_star, peak


def maximise_abs(f, frequencies, T: float, divisions: int = GRID_DIVISIONS) -> tuple[float, float]:
    """Maximise ``|f(t)|`` on ``[0, T]`` for a band-limited (times polynomial) ``f``."""
    if T <= 0:
        return 0.0, float(abs(f(np.array([0.0]))[0]))
    wmax = float(np.max(np.abs(frequencies))) if len(frequencies) else 0.0
    n = 1000 if wmax == 0 else int(math.ceil(T / (math.pi / (divisions * wmax))))
    n = max(n, 16)
    grid = np.linspace(0.0, T, n + 1)
    vals = np.abs(f(grid))
    i = int(np.argmax(vals))
    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, n)]
    t_star, v_star = golden_section_max(lambda t: float(abs(f(np.array([t]))[0])), lo, hi)
    if v_star < vals[i]:
        return float(grid[i]), float(vals[i])
    return t_star, v_star


def golden_section_max(g, lo: float, hi: float, tol: float = 1e-12, max_iter: int = 200):
    a, b = lo, hi
    c = b - _GOLDEN * (b - a)
    d = a + _GOLDEN * (b - a)
    gc, gd = g(c), g(d)
    for _ in range(max_iter):
        if abs(b - a) <= tol * max(1.0, abs(a)):
            break
        if gc > gd:
            b, d, gd = d, c, gc
            c = b - _GOLDEN * (b - a)
            gc = g(c)
        else:
            a, c, gc = c, d, gd
            d = a + _GOLDEN * (b - a)
            gd = g(d)
    # endpoints are candidates too
    best = max(((g(x), x) for x in (a, b, lo, hi)), key=lambda p: p[0])
    if gc > best[0]:
        best = (gc, c)
    return best[1], best[0]
