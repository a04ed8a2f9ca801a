"""Exact time evolution, observable time series and truncation-error scans."""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Iterator, Mapping

import numpy as np
import scipy.linalg as sla

from .models import (
    ModelSpec,
    SparseHermitianOperator,
    observable as make_observable,
    schwinger_vacuum,
    u1_plaquette_hamiltonian,
)

DENSE_LIMIT = 4096
KRYLOV_TOL = 1e-12


class KrylovConvergenceError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (achieved residual {residual:.3e})")
        self.residual = residual


def time_grid(T: float, dt: float) -> np.ndarray:
    """Uniform grid ``0, dt, ..., T`` (``T`` included up to rounding)."""
    if dt <= 0 or T < 0:
        raise ValueError(f"need dt > 0 and T >= 0, got dt={dt}, T={T}")
    n = int(round(T / dt))
    if not math.isclose(n * dt, T, rel_tol=1e-9, abs_tol=1e-12):
        n = int(math.floor(T / dt))
    return np.arange(n + 1) * dt


# ---------------------------------------------------------------------------
# propagators
# ---------------------------------------------------------------------------

def _as_matrix(H):
    return H.matrix if isinstance(H, SparseHermitianOperator) else H


class DensePropagator:
    def __init__(self, H):
        m = _as_matrix(H)
        dense = m.toarray() if hasattr(m, "toarray") else np.asarray(m)
        self.energies, self.vectors = np.linalg.eigh(dense)

    def trajectory(self, psi0: np.ndarray, times: np.ndarray) -> Iterator[np.ndarray]:
        c = self.vectors.conj().T @ psi0
        for t in times:
            yield self.vectors @ (np.exp(-1j * self.energies * t) * c)


class KrylovPropagator:
    """Lanczos approximation of ``exp(-i H tau) v`` with a posteriori error control."""

    def __init__(self, H, tol: float = KRYLOV_TOL, m_max: int = 60, max_substeps: int = 1 << 12):
        self.matrix = _as_matrix(H).tocsr()
        self.tol = tol
        self.m_max = m_max
        self.max_substeps = max_substeps

    def step(self, v: np.ndarray, tau: float) -> np.ndarray:
        if tau == 0:
            return v.copy()
        remaining = tau
        h = tau
        out = v
        substeps = 0
        while remaining > 0:
            h = min(h, remaining)
            w, err = self._lanczos_exp(out, h)
            if err <= self.tol * h:
                out = w
                remaining -= h
                substeps += 1
                if substeps > self.max_substeps:
                    raise KrylovConvergenceError("too many Krylov substeps", err)
                continue
            h *= 0.5
            if h < tau / self.max_substeps:
                raise KrylovConvergenceError(f"Krylov step did not reach tol {self.tol:.1e}", err)
        return out

    def _lanczos_exp(self, v: np.ndarray, tau: float):
        beta0 = np.linalg.norm(v)
        n = len(v)
        m_max = min(self.m_max, n)
        V = np.zeros((m_max + 1, n), dtype=complex)
        alpha = np.zeros(m_max)
        beta = np.zeros(m_max)
        V[0] = v / beta0
        for j in range(m_max):
            w = self.matrix @ V[j]
            alpha[j] = np.real(np.vdot(V[j], w))
            w = w - alpha[j] * V[j] - (beta[j - 1] * V[j - 1] if j else 0)
            # full reorthogonalisation; subspaces stay small
            w -= V[: j + 1].T @ (V[: j + 1].conj() @ w)
            beta[j] = np.linalg.norm(w)
            m = j + 1
            if beta[j] < 1e-14 * max(1.0, abs(alpha[j])) or m == n:
                evals, evecs = sla.eigh_tridiagonal(alpha[:m], beta[: m - 1])
                coef = evecs @ (np.exp(-1j * evals * tau) * evecs[0].conj())
                return beta0 * (coef @ V[:m]), 0.0
            V[j + 1] = w / beta[j]
            if m >= 4 or m == m_max:
                evals, evecs = sla.eigh_tridiagonal(alpha[:m], beta[: m - 1])
                coef = evecs @ (np.exp(-1j * evals * tau) * evecs[0].conj())
                err = beta0 * beta[j] * abs(coef[-1])
                if err <= self.tol * tau:
                    return beta0 * (coef @ V[:m]), err
        return beta0 * (coef @ V[:m]), err

    def trajectory(self, psi0: np.ndarray, times: np.ndarray) -> Iterator[np.ndarray]:
        psi = np.asarray(psi0, dtype=complex)
        t_prev = 0.0
        for t in times:
            psi = self.step(psi, t - t_prev)
            t_prev = t
            yield psi


def propagator(H, method: str = "auto"):
    dim = _as_matrix(H).shape[0]
    if method == "auto":
        method = "dense" if dim <= DENSE_LIMIT else "krylov"
    if method == "dense":
        return DensePropagator(H)
    if method == "krylov":
        return KrylovPropagator(H)
    raise ValueError(f"unknown evolution method {method!r}")


def evolve(H, psi0: np.ndarray, t_grid, method: str = "auto") -> np.ndarray:
    """States ``exp(-i H t) psi0`` for every ``t`` in ``t_grid`` (rows)."""
    psi0 = np.asarray(psi0, dtype=complex)
    norm = np.linalg.norm(psi0)
    if abs(norm - 1) > 1e-10:
        raise ValueError(f"initial state not normalised (norm {norm:.12f})")
    times = np.atleast_1d(np.asarray(t_grid, dtype=float))
    return np.array(list(propagator(H, method).trajectory(psi0, times)))


# ---------------------------------------------------------------------------
# time series
# ---------------------------------------------------------------------------

@dataclass
class TimeSeries:
    times: np.ndarray
    values: dict[str, np.ndarray]
    metadata: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("time grid must be strictly increasing")
        for k, v in self.values.items():
            v = np.asarray(v, dtype=float)
            if v.shape != self.times.shape:
                raise ValueError(f"column {k!r} has shape {v.shape}, expected {self.times.shape}")
            if not np.all(np.isfinite(v)):
                raise ValueError(f"column {k!r} contains non-finite values")
            self.values[k] = v

    def __getitem__(self, key: str) -> np.ndarray:
        return self.values[key]

    @property
    def columns(self) -> list[str]:
        return list(self.values)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["t", *self.values])
            cols = [self.values[k] for k in self.values]
            for i, t in enumerate(self.times):
                w.writerow([fmt(t), *(fmt(c[i]) for c in cols)])

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)

    def to_dict(self) -> dict:
        return {
            "metadata": self.metadata,
            "t": [float(t) for t in self.times],
            "values": {k: [float(x) for x in v] for k, v in self.values.items()},
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "TimeSeries":
        return cls(np.array(data["t"]), {k: np.array(v) for k, v in data["values"].items()}, dict(data.get("metadata", {})))

    @classmethod
    def from_json(cls, path) -> "TimeSeries":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


def fmt(x: float) -> str:
    """Fixed 17-significant-digit rendering used in every CSV."""
    return format(float(x), ".17g")


def expectation_series(H, psi0, observables: Mapping[str, SparseHermitianOperator], T: float, dt: float = 0.01,
                       method: str = "auto", metadata: dict | None = None) -> TimeSeries:
    """Sample ``<O>(t)`` on ``0, dt, ..., T`` for each named observable."""
    times = time_grid(T, dt)
    psi0 = np.asarray(psi0, dtype=complex)
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValueError("initial state not normalised")
    diag = {k: o.diagonal().real for k, o in observables.items() if o.is_diagonal()}
    full = {k: o for k, o in observables.items() if k not in diag}
    out = {k: np.empty(len(times)) for k in observables}
    for i, psi in enumerate(propagator(H, method).trajectory(psi0, times)):
        prob = np.abs(psi) ** 2
        for k, d in diag.items():
            out[k][i] = prob @ d
        for k, o in full.items():
            out[k][i] = o.expectation(psi)
    return TimeSeries(times, out, dict(metadata or {}))


def probability_series(H, psi0, T: float, dt: float = 0.01, method: str = "auto",
                       reduce: Callable[[np.ndarray], np.ndarray] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Basis-state probabilities on the grid, optionally reduced per step."""
    times = time_grid(T, dt)
    rows = []
    for psi in propagator(H, method).trajectory(np.asarray(psi0, dtype=complex), times):
        p = np.abs(psi) ** 2
        rows.append(reduce(p) if reduce else p)
    return times, np.array(rows)


def max_over_time(series) -> tuple[float, float]:
    """``(t*, value)`` of the grid maximum of a ``TimeSeries`` column or ``(times, values)`` pair."""
    if isinstance(series, TimeSeries):
        if len(series.values) != 1:
            raise ValueError("pass a single-column series or a (times, values) pair")
        times, values = series.times, next(iter(series.values.values()))
    else:
        times, values = series
    values = np.asarray(values)
    if values.size == 0:
        raise ValueError("empty series")
    i = int(np.argmax(values))
    return float(np.asarray(times)[i]), float(values[i])


# ---------------------------------------------------------------------------
# truncation errors
# ---------------------------------------------------------------------------

def initial_state(spec: ModelSpec, state="vacuum") -> np.ndarray:
    """Normalised initial vector in ``spec``'s basis.

    ``state`` is ``"vacuum"``, a field value (single plaquette), a field
    configuration (chain), or an occupation string (Schwinger).
    """
    basis = spec.basis()
    psi = np.zeros(basis.dimension, dtype=complex)
    if spec.model == "u1_plaquette":
        n = 0 if state == "vacuum" else int(state)
        psi[basis.index(n)] = 1
    elif spec.model == "u1_chain":
        cfg = (0,) * spec.size if state == "vacuum" else tuple(state)
        psi[basis.index(cfg)] = 1
    elif spec.model == "schwinger":
        if state == "vacuum":
            return schwinger_vacuum(basis)
        psi[basis.index(state)] = 1
    else:
        site, n0, n1 = (0, 0, 0) if state == "vacuum" else state
        psi[basis.index(site, n0, n1)] = 1
    return psi


def model_observable(spec: ModelSpec, tag: str, **kw) -> SparseHermitianOperator:
    return make_observable(tag, spec.basis(), **kw)


def truncation_error_series(spec: ModelSpec, lam_ref: int, lam: int, observable: str | Mapping,
                            T: float, dt: float = 0.01, state="vacuum", method: str = "auto") -> TimeSeries:
    """``|<O>_{lam_ref}(t) - <O>_{lam}(t)|`` and its running maximum.

    ``observable`` is a tag or a dict ``{"tag": ..., **kwargs}`` for
    :func:`lgtrunc.models.observable`.
    """
    if lam_ref < lam:
        raise ValueError(f"reference truncation {lam_ref} below {lam}")
    obs = {"tag": observable} if isinstance(observable, str) else dict(observable)
    tag = obs.pop("tag")
    values = []
    for cut in (lam_ref, lam):
        s = spec.with_lam(cut)
        try:
            psi0 = initial_state(s, state)
        except (ValueError, KeyError) as exc:
            raise ValueError(f"initial state {state!r} has support above truncation {cut}") from exc
        ts = expectation_series(s.hamiltonian(), psi0, {"o": model_observable(s, tag, **obs)}, T, dt, method)
        values.append(ts["o"])
    err = np.abs(values[0] - values[1])
    meta = {"model": spec.model, "g": spec.g, "m": spec.m, "size": spec.size, "lam_ref": lam_ref, "lam": lam,
            "observable": tag, "T": T, "dt": dt, "state": _jsonable(state)}
    return TimeSeries(ts.times, {"error": err, "running_max": np.maximum.accumulate(err),
                                 "reference": values[0], "truncated": values[1]}, meta)


def _jsonable(x):
    if isinstance(x, (list, tuple, np.ndarray)):
        return [int(v) for v in x]
    return x


# ---------------------------------------------------------------------------
# eigenstate scan
# ---------------------------------------------------------------------------

def _plaquette_lowest(g: float, lam: int, k: int, dps: int | None):
    if dps is None:
        H = u1_plaquette_hamiltonian(g, lam).toarray().real
        w, v = np.linalg.eigh(H)
        return w[:k], v[:, :k]
    import mpmath as mp

    with mp.workdps(dps):
        gg = mp.mpf(g) if not isinstance(g, str) else mp.mpf(g)
        n = 2 * lam + 1
        A = mp.matrix(n, n)
        for i in range(n):
            v = i - lam
            A[i, i] = 2 * gg**2 * v * v + 1 / gg**2
            if i + 1 < n:
                A[i, i + 1] = A[i + 1, i] = -1 / (2 * gg**2)
        E, Q = mp.eigsy(A)
        order = sorted(range(n), key=lambda i: E[i])[:k]
        return [E[i] for i in order], [[Q[r, i] for r in range(n)] for i in order]


def eigenstate_scaling_scan(g: float, lams, k_states: int = 1, lam0: int | None = None, dps: int | None = 50) -> list[dict]:
    """Lowest ``k_states`` single-plaquette eigenvalues per truncation.

    Rows carry ``E``, the successive difference ``|E^{lam+1} - E^lam|``, the
    edge overlap ``|<lam|psi^lam>|`` and, with ``lam0``, its leading-order
    product estimate. ``dps`` selects mpmath precision (``None``: float64).
    """
    lams = sorted(int(x) for x in lams)
    ext = lams + [lams[-1] + 1]
    spectra = {lam: _plaquette_lowest(g, lam, k_states, dps) for lam in ext}
    base = spectra.get(lam0) if lam0 is not None else None
    if lam0 is not None and base is None:
        base = _plaquette_lowest(g, lam0, k_states, dps)
    rows = []
    for lam in lams:
        E, vecs = spectra[lam]
        E_next, _ = spectra[lam + 1]
        for n in range(k_states):
            row = {"lam": lam, "state": n, "energy": float(E[n]),
                   "difference": float(abs(E_next[n] - E[n])),
                   "log_difference": float(_log(abs(E_next[n] - E[n]))),
                   "edge_overlap": float(abs(vecs[n][-1]) if dps else abs(vecs[-1, n]))}
            if base is not None and lam >= lam0:
                row["edge_overlap_estimate"] = _product_estimate(g, lam, lam0, base, n, dps)
            rows.append(row)
    return rows


def _log(x):
    if hasattr(x, "ln") or type(x).__module__.startswith("mpmath"):
        import mpmath as mp
        return mp.log(x) if x else -math.inf
    return math.log(x) if x else -math.inf


def _product_estimate(g, lam, lam0, base, n, dps):
    E0, vecs = base
    overlap = abs(float(vecs[n][-1])) if dps else abs(float(vecs[-1, n]))
    en = float(E0[n])
    log_est = math.log(overlap) if overlap else -math.inf
    for k in range(lam0, lam):
        diag_next = 2 * g**2 * (k + 1) ** 2 + 1 / g**2
        log_est += math.log(1 / (2 * g**2)) - math.log(abs(en - diag_next))
    return math.exp(log_est)
