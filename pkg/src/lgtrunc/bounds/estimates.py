"""Leading-order truncation-error estimates for the U(1) plaquette, the
plaquette chain and the Schwinger model.

Every value is carried as a :class:`LogMagnitude`; nothing here underflows
even for truncations in the hundreds.

Prefactor convention
--------------------
Reaching field ``lam + 1`` from the onset ``lam0`` takes ``lam + 1 - lam0``
applications of the plaquette term, each contributing ``1/(2 g^2)`` and one
energy denominator ``2 g^2 (k^2 - l^2)``. The single-plaquette amplitude is
therefore ``(1/2g^2)^{2(lam+1-lam0)} L`` with ``L`` the bare divided-difference
sum, and the chain amplitude ``A_{n,m}`` carries ``(1/2g^2)^{lam+1-lam0}`` in
front of ``lam + 1 - lam0`` nested integrals. ``convention="displayed"``
selects the shorter exponents ``lam - lam0`` written in the closed-form
bounds instead.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .logspace import LogMagnitude, log_double_factorial
from .nested import ExpSumExpression, maximise_abs, nested_expression

CONVENTIONS = ("leading", "displayed")


@dataclass(frozen=True)
class BoundResult:
    tag: str
    value: LogMagnitude
    params: dict = field(default_factory=dict)
    t_max: float | None = None

    def __post_init__(self):
        if self.value.sign < 0:
            raise ValueError(f"bound {self.tag} is negative")

    @property
    def log10(self) -> float:
        return self.value.log10

    def __float__(self) -> float:
        return float(self.value)

    def to_row(self) -> dict:
        row = {"bound": self.tag, **self.params, "log10_value": self.log10, "value": float(self.value)}
        if self.t_max is not None:
            row["t_max"] = self.t_max
        return row


def _check_convention(convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"unknown convention {convention!r}; expected {CONVENTIONS}")


def _check_cut(lam, lam0):
    if lam0 < 0:
        raise ValueError(f"onset must be >= 0, got {lam0}")
    if lam0 > lam:
        raise ValueError(f"onset {lam0} exceeds truncation {lam}")


def _lm(x: float) -> LogMagnitude:
    return LogMagnitude.from_float(x)


def _half_inv_g2(g: float) -> LogMagnitude:
    return LogMagnitude(1, -math.log(2 * g * g))


# ---------------------------------------------------------------------------
# single plaquette
# ---------------------------------------------------------------------------

def leakage_terms(lam: int, lam0: int):
    """``(k, sign, log|prod_{l != k} 1/(k^2 - l^2)|)`` for ``k = lam0..lam``."""
    out = []
    for k in range(lam0, lam + 1):
        sign, log = 1, 0.0
        for l in range(lam0, lam + 2):
            if l == k:
                continue
            diff = k * k - l * l
            sign *= 1 if diff > 0 else -1
            log -= math.log(abs(diff))
        out.append((k, sign, log))
    return out


def leakage_sum(g: float, lam: int, lam0: int):
    """Callable ``t -> sum / exp(log_ref)`` and ``log_ref`` for the leakage sum."""
    terms = leakage_terms(lam, lam0)
    log_ref = max(t[2] for t in terms)
    top = 2 * g * g * (lam + 1) ** 2
    ks = np.array([t[0] for t in terms], dtype=float)
    w = np.array([t[1] * math.exp(t[2] - log_ref) for t in terms])
    low = 2 * g * g * ks**2

    def f(t):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        phase = np.exp(-1j * top * t)[:, None] - np.exp(-1j * np.outer(t, low))
        return phase @ w

    return f, log_ref, np.concatenate([[top], low])


def leakage_L(g: float, lam: int, lam0: int, T: float) -> BoundResult:
    """``max_{t<=T} |sum_k (e^{-i2g^2(lam+1)^2 t} - e^{-i2g^2k^2 t}) prod_{l!=k} 1/(k^2-l^2)|``."""
    _check_cut(lam, lam0)
    params = {"g": g, "lam": lam, "lam0": lam0, "T": T}
    if T <= 0:
        return BoundResult("leakage_L", LogMagnitude.zero(), params, 0.0)
    f, log_ref, freqs = leakage_sum(g, lam, lam0)
    t_star, peak = maximise_abs(f, freqs, T)
    value = LogMagnitude.zero() if peak == 0 else LogMagnitude(1, math.log(peak) + log_ref)
    return BoundResult("leakage_L", value, params, t_star)


def leakage_L_loose(g: float, lam: int, lam0: int) -> BoundResult:
    """``(1/g^2)^{lam-lam0} (2 lam0 - 1)!! / (2 lam - 1)!!``."""
    _check_cut(lam, lam0)
    log = -2 * (lam - lam0) * math.log(g) + log_double_factorial(2 * lam0 - 1) - log_double_factorial(2 * lam - 1)
    return BoundResult("leakage_L_loose", LogMagnitude(1, log), {"g": g, "lam": lam, "lam0": lam0})


def loose_amplitude_bound(g: float, lam: int, lam0: int) -> BoundResult:
    """Time-independent amplitude bound ``2 L_loose (1/2g^2)^{lam - lam0}``."""
    L = leakage_L_loose(g, lam, lam0).value
    value = 2 * L * _half_inv_g2(g) ** (lam - lam0)
    return BoundResult("loose_amplitude_bound", value, {"g": g, "lam": lam, "lam0": lam0})


def leakage_amplitude(g: float, lam: int, lam0: int, T: float, convention: str = "leading") -> BoundResult:
    """Leading-order amplitude for the field to pass the cut at ``lam``.

    ``leading``: ``(1/2g^2)^{2(lam+1-lam0)} L`` per sign of the field.
    ``displayed``: ``2 (1/2g^2)^{lam-lam0} L`` summed over both signs.
    """
    _check_convention(convention)
    L = leakage_L(g, lam, lam0, T)
    if convention == "leading":
        value = _half_inv_g2(g) ** (2 * (lam + 1 - lam0)) * L.value
    else:
        value = 2 * _half_inv_g2(g) ** (lam - lam0) * L.value
    return BoundResult("leakage_amplitude", value, {**L.params, "convention": convention}, L.t_max)


def one_plaquette_E2_bound(g: float, lam: int, lam0: int, T: float, convention: str = "leading") -> BoundResult:
    """Leading error in ``<E^2>`` from truncating a single plaquette at ``lam``.

    ``leading``: ``2 (lam+1)^2 [(1/2g^2)^{2(lam+1-lam0)} L]^2``;
    ``displayed``: ``2 (lam+1)^2 (1/4g^4)^{lam-lam0} L^2``.
    """
    _check_convention(convention)
    L = leakage_L(g, lam, lam0, T)
    if convention == "leading":
        amp = _half_inv_g2(g) ** (2 * (lam + 1 - lam0)) * L.value
    else:
        amp = _half_inv_g2(g) ** (lam - lam0) * L.value
    value = 2 * (lam + 1) ** 2 * amp**2
    return BoundResult("one_plaquette_E2_bound", value, {**L.params, "convention": convention}, L.t_max)


def one_plaquette_projector_estimate(g: float, lam: int, lam0: int, T: float) -> BoundResult:
    """Leading-order ``max_t <Pi_lam>`` for a state starting below ``lam0``:
    the squared amplitude for crossing the cut at ``lam - 1``."""
    if lam < lam0 + 1:
        raise ValueError(f"need lam >= lam0 + 1, got lam={lam}, lam0={lam0}")
    amp = leakage_amplitude(g, lam - 1, lam0, T)
    return BoundResult("one_plaquette_projector_estimate", amp.value**2,
                       {"g": g, "lam": lam, "lam0": lam0, "T": T}, amp.t_max)


# ---------------------------------------------------------------------------
# plaquette chain
# ---------------------------------------------------------------------------

def chain_frequencies(g: float, lam: int, lam0: int, n: int, m: int) -> list[float]:
    """Step frequencies ``g^2 (4k + 2 - n - m)`` for ``k = lam0..lam`` (innermost first)."""
    return [g * g * (4 * k + 2 - n - m) for k in range(lam0, lam + 1)]


def chain_A_expression(n: int, m: int, g: float, lam: int, lam0: int, convention: str = "leading") -> ExpSumExpression:
    _check_cut(lam, lam0)
    _check_convention(convention)
    if abs(n) > lam0 or abs(m) > lam0:
        raise ValueError(f"neighbour fields ({n}, {m}) must satisfy |n|, |m| <= lam0 = {lam0}")
    depth = lam - lam0 + 1 if convention == "leading" else lam - lam0
    expr = nested_expression(chain_frequencies(g, lam, lam0, n, m))
    return expr.scaled(_half_inv_g2(g) ** depth)


def chain_A(n: int, m: int, g: float, lam: int, lam0: int, T: float, convention: str = "leading") -> BoundResult:
    """``max_{t<=T} |A_{n,m}(g, lam, lam0, t)|``."""
    expr = chain_A_expression(n, m, g, lam, lam0, convention)
    params = {"n": n, "m": m, "g": g, "lam": lam, "lam0": lam0, "T": T, "convention": convention}
    if T <= 0:
        return BoundResult("chain_A", LogMagnitude.zero(), params, 0.0)
    t_star, peak = expr.max_abs(T)
    return BoundResult("chain_A", peak, params, t_star)


def _chain_peaks(g, lam, lam0, T, convention):
    """``{n + m: max_t |A|}``; ``A_{n,m}`` depends on the neighbours only through ``n + m``."""
    out = {}
    for s in range(-2 * lam0, 2 * lam0 + 1):
        n = max(-lam0, s - lam0)
        out[s] = chain_A(n, s - n, g, lam, lam0, T, convention)
    return out


def _max_n_squared(s: int, lam0: int) -> int:
    lo, hi = max(-lam0, s - lam0), min(lam0, s + lam0)
    return max(lo * lo, hi * hi)


def chain_P(g: float, lam: int, lam0: int, T: float, convention: str = "leading") -> BoundResult:
    """``max_{t<=T} max_{|n|,|m|<=lam0} |A_{n,m}|^2``."""
    peaks = _chain_peaks(g, lam, lam0, T, convention)
    best = max(peaks.values(), key=lambda r: r.value)
    return BoundResult("chain_P", best.value**2,
                       {"g": g, "lam": lam, "lam0": lam0, "T": T, "convention": convention}, best.t_max)


def chain_E2_bound(g: float, lam: int, lam0: int, T: float, convention: str = "leading") -> BoundResult:
    """``2 max{(lam+1)^2 |A|^2} + 4 max{n^2 |A|^2}`` over ``|n|, |m| <= lam0``."""
    peaks = _chain_peaks(g, lam, lam0, T, convention)
    top = max(r.value for r in peaks.values()) ** 2
    side = max((_max_n_squared(s, lam0) * r.value**2 for s, r in peaks.items()), default=LogMagnitude.zero())
    value = 2 * (lam + 1) ** 2 * top + 4 * side
    return BoundResult("chain_E2_bound", value, {"g": g, "lam": lam, "lam0": lam0, "T": T, "convention": convention})


# ---------------------------------------------------------------------------
# Schwinger model
# ---------------------------------------------------------------------------

SCHWINGER_ORDERINGS = 14


def schwinger_leak1(g: float, m: float, lam: int) -> BoundResult:
    """``1 / (2m + g^2 (lam + 1/2))``."""
    denom = 2 * m + g * g * (lam + 0.5)
    if denom <= 0:
        raise ValueError("non-positive pair-creation gap")
    return BoundResult("schwinger_leak1", _lm(1 / denom), {"g": g, "m": m, "lam": lam})


def schwinger_frequencies(lam: int, g: float, m: float) -> list[float]:
    """Six step frequencies, innermost (earliest) first."""
    g2 = g * g
    return [2 * m + g2 * (lam - 0.5)] * 3 + [-2 * m + g2 * (lam + 0.5)] * 2 + [2 * m + 2 * g2 * (lam + 1)]


def schwinger_A_expression(lam: int, g: float, m: float) -> ExpSumExpression:
    if lam < 2:
        raise ValueError(f"two-step Schwinger leakage needs lam >= 2, got {lam}")
    expr = nested_expression(schwinger_frequencies(lam, g, m))
    return expr.scaled(_lm(SCHWINGER_ORDERINGS / 2**6))


def schwinger_A(lam: int, g: float, m: float, t: float) -> complex:
    """Value of the six-fold nested integral (with prefactor ``14/2^6``) at ``t``."""
    return complex(schwinger_A_expression(lam, g, m)(np.array([t]))[0])


def schwinger_M(lam: int, g: float, m: float, T: float) -> BoundResult:
    """``max_{t<=T} |A(lam, g, m, t)|``."""
    expr = schwinger_A_expression(lam, g, m)
    params = {"g": g, "m": m, "lam": lam, "T": T}
    if T <= 0:
        return BoundResult("schwinger_M", LogMagnitude.zero(), params, 0.0)
    t_star, peak = expr.max_abs(T)
    return BoundResult("schwinger_M", peak, params, t_star)


def schwinger_error_bounds(g: float, m: float, lam: int, T: float, onset: int = 1):
    """``(dE2, dchi)``: single-step form when ``lam == onset``, two-step otherwise."""
    params = {"g": g, "m": m, "lam": lam, "T": T}
    if lam == onset:
        p = schwinger_leak1(g, m, lam).value ** 2
        e2 = (2 * lam**2 + (lam + 1) ** 2) * p
        chi = 2 * p
        form = "single_step"
    else:
        p = schwinger_M(lam, g, m, T).value ** 2
        e2 = (2 * (lam - 1) ** 2 + 4 * lam**2 + (lam + 1) ** 2) * p
        chi = 4 * p
        form = "two_step"
    params["form"] = form
    return BoundResult("schwinger_dE2", e2, params), BoundResult("schwinger_dchi", chi, params)


# ---------------------------------------------------------------------------
# fragmentation onset
# ---------------------------------------------------------------------------

def suggest_lambda0(g: float, model: str = "u1_plaquette", m: float = 0.0, max_lam0: int = 1000) -> int:
    """Smallest onset whose single-step leakage estimate ``2|V|/dE`` is below 1.

    Plaquette: ``dE = 2g^2(2 lam0 + 1)``; chain (vacuum neighbours):
    ``dE = g^2(4 lam0 + 2)``; Schwinger: ``schwinger_leak1 < 1``.
    """
    for lam0 in range(max_lam0 + 1):
        if model == "u1_plaquette":
            est = 2 * (1 / (2 * g * g)) / (2 * g * g * (2 * lam0 + 1))
        elif model == "u1_chain":
            est = 2 * (1 / (2 * g * g)) / (g * g * (4 * lam0 + 2))
        elif model == "schwinger":
            est = float(schwinger_leak1(g, m, lam0).value)
        else:
            raise ValueError(f"no onset rule for model {model!r}")
        if est < 1:
            return lam0
    raise ValueError("no onset found below max_lam0")
