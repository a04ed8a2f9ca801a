"""Earlier rigorous leakage bounds for the single plaquette, used as a baseline.

* energy conservation: ``<Pi_lam> <= 1/(g^4 lam^2)`` (vacuum start);
* short time (Dyson remainder): ``|<lam|U(t)|lam - D>| <= t^D / (g^{2D} D!)``;
* long time: split the distance ``D`` into segments ``D_1 + ... + D_k`` and the
  time into ``t_1 + ... + t_k``; the amplitude is at most
  ``sum_i t_i^{D_i} / (g^{2 D_i} D_i!)``.
"""
from __future__ import annotations

import math
from collections import Counter
from functools import lru_cache

from .estimates import BoundResult
from .logspace import LogMagnitude

COMPOSITION_BUDGET = 2000


def tong_energy_bound(g: float, lam: int) -> BoundResult:
    if lam < 1:
        raise ValueError("energy bound needs lam >= 1")
    return BoundResult("tong_energy", LogMagnitude(1, -4 * math.log(g) - 2 * math.log(lam)), {"g": g, "lam": lam})


def _log_segment(g: float, delta: int, t: float) -> float:
    if t <= 0:
        return -math.inf
    return delta * math.log(t) - 2 * delta * math.log(g) - math.lgamma(delta + 1)


def tong_short_time(g: float, delta: int, t: float, squared: bool = False) -> BoundResult:
    """Amplitude bound ``t^D/(g^{2D} D!)``; ``squared`` gives the probability form."""
    if delta < 0:
        raise ValueError("distance must be >= 0")
    log = _log_segment(g, delta, t) if delta else 0.0
    value = LogMagnitude(1, log) if log > -math.inf else LogMagnitude.zero()
    return BoundResult("tong_short_time", value**2 if squared else value,
                       {"g": g, "delta": delta, "t": t, "squared": squared})


def _segment_time(g: float, delta: int, mu_log: float) -> float:
    """Time at which the derivative of segment ``delta`` equals ``exp(mu_log)``."""
    # d/dt t^D/(g^{2D} D!) = t^{D-1}/(g^{2D} (D-1)!)
    return math.exp((mu_log + 2 * delta * math.log(g) + math.lgamma(delta)) / (delta - 1))


def optimal_split(g: float, deltas, t: float) -> tuple[float, list[float]]:
    """Minimise ``sum_i t_i^{D_i}/(g^{2D_i} D_i!)`` over ``t_i >= 0, sum t_i = t``.

    The objective is convex, so the KKT point (equal marginal cost) is the
    global minimum; it is found by bisection on the common derivative.
    Segments of equal length share a time, so the work scales with the
    number of distinct lengths. Returns ``(log of the minimum, times)``.
    """
    deltas = list(deltas)
    if t <= 0:
        return -math.inf, [0.0] * len(deltas)
    counts = Counter(deltas)
    n_linear = counts.pop(1, 0)
    curved = sorted(counts)
    log_mu_linear = -2 * math.log(g)

    def total(mu_log):
        return sum(c * _segment_time(g, d, mu_log) for d, c in counts.items())

    if n_linear and total(log_mu_linear) <= t:
        mu_log = log_mu_linear
        per = {d: _segment_time(g, d, mu_log) for d in curved}
        per[1] = (t - total(mu_log)) / n_linear
    else:
        def marginal(d, ti):
            return (d - 1) * math.log(ti) - 2 * d * math.log(g) - math.lgamma(d)

        # at hi one segment alone uses all of t; at lo every segment uses <= t/k
        k = sum(counts.values())
        hi = max(marginal(d, t) for d in curved)
        lo = min(marginal(d, t / k) for d in curved)
        if n_linear:
            hi = min(hi, log_mu_linear)
        while hi - lo > 1e-13 * max(1.0, abs(lo)):
            mid = 0.5 * (lo + hi)
            if mid in (lo, hi):
                break
            if total(mid) > t:
                hi = mid
            else:
                lo = mid
        per = {d: _segment_time(g, d, lo) for d in curved}
        if n_linear:
            per[1] = 0.0
        # absorb the bisection residue in the longest segment
        longest = max(curved, key=lambda d: per[d])
        per[longest] += (t - sum(c * per[d] for d, c in counts.items())) / counts[longest]
    times = [per[d] for d in deltas]
    logs = [_log_segment(g, d, ti) for d, ti in zip(deltas, times)]
    top = max(logs)
    if top == -math.inf:
        return -math.inf, times
    return top + math.log(sum(math.exp(x - top) for x in logs)), times


@lru_cache(maxsize=None)
def _partition_count(n: int, k: int) -> int:
    # partitions of n into exactly k positive parts
    if k == 0:
        return 1 if n == 0 else 0
    if n < k:
        return 0
    return _partition_count(n - 1, k - 1) + _partition_count(n - k, k)


def _partitions(n: int, k: int, max_part: int | None = None):
    if max_part is None:
        max_part = n
    if k == 0:
        if n == 0:
            yield ()
        return
    for first in range(min(n - (k - 1), max_part), 0, -1):
        if first * k < n:
            break
        for rest in _partitions(n - first, k - 1, first):
            yield (first,) + rest


def segment_splits(total: int, k: int, budget: int = COMPOSITION_BUDGET):
    """Candidate multisets ``{D_i}`` of ``k`` positive parts summing to ``total``.

    The objective is symmetric under permutations, so partitions suffice. When
    there are more than ``budget`` of them, the most balanced ones are tried.
    """
    base, extra = divmod(total, k)
    equal = tuple([base + 1] * extra + [base] * (k - extra))
    if _partition_count(total, k) <= budget:
        yield from _partitions(total, k)
        return
    yield equal
    seen = {equal}
    frontier = [equal]
    while frontier and len(seen) < budget:
        nxt = []
        for p in frontier:
            for i in range(k):
                for j in range(k):
                    if i == j or p[j] <= 1:
                        continue
                    q = list(p)
                    q[i] += 1
                    q[j] -= 1
                    q = tuple(sorted(q, reverse=True))
                    if q not in seen:
                        seen.add(q)
                        nxt.append(q)
                        yield q
                        if len(seen) >= budget:
                            return
        frontier = nxt


def _candidate_splits(lam: int, num_projectors: int, budget: int):
    """``(k, split)`` pairs to try, at most ``budget`` in total.

    Every segment count gets its equal split; the remaining budget is spent
    on full enumerations, smallest segment counts first, and falls back to
    the most balanced partitions once a full enumeration no longer fits.
    """
    counts = range(1, num_projectors + 1)
    left = max(budget - num_projectors, 0)
    for k in counts:
        base, extra = divmod(lam, k)
        equal = tuple([base + 1] * extra + [base] * (k - extra))
        yield k, equal
        if k == 1:
            continue
        share = left if _partition_count(lam, k) <= left else left // (num_projectors - k + 1)
        used = 0
        for split in segment_splits(lam, k, share + 1):
            if used >= share:
                break
            if split != equal:
                used += 1
                yield k, split
        left -= used


def tong_long_time(g: float, lam: int, t: float, num_projectors: int, squared: bool = False,
                   budget: int = COMPOSITION_BUDGET) -> BoundResult:
    """Best long-time amplitude bound using between 1 and ``num_projectors`` segments.

    With ``num_projectors=1`` this is exactly :func:`tong_short_time`. At
    most ``budget`` segment compositions are tried overall; any composition
    gives a valid bound, so a truncated search only loosens it.
    """
    if not 1 <= num_projectors <= max(lam, 1):
        raise ValueError(f"num_projectors must be in [1, {lam}], got {num_projectors}")
    best_log, best_split, best_times = math.inf, None, None
    tried = 0
    for k, split in _candidate_splits(lam, num_projectors, budget):
        tried += 1
        log, times = optimal_split(g, split, t) if k > 1 else (_log_segment(g, lam, t), [t])
        if log < best_log:
            best_log, best_split, best_times = log, split, times
    value = LogMagnitude.zero() if best_log == -math.inf else LogMagnitude(1, best_log)
    params = {"g": g, "lam": lam, "t": t, "num_projectors": num_projectors, "squared": squared,
              "segments": list(best_split) if best_split else [], "segment_times": best_times,
              "compositions_tried": tried}
    return BoundResult("tong_long_time", value**2 if squared else value, params)


def tong_combined(g: float, lam: int, t: float, num_projectors: int | None = None) -> BoundResult:
    """Probability bound ``min(energy, short^2, long^2)`` on ``<Pi_lam>(t)``."""
    k = lam if num_projectors is None else num_projectors
    energy = tong_energy_bound(g, lam).value
    short = tong_short_time(g, lam, t, squared=True).value
    long_ = tong_long_time(g, lam, t, k, squared=True).value
    return BoundResult("tong_combined", min(energy, short, long_), {"g": g, "lam": lam, "t": t, "num_projectors": k})
