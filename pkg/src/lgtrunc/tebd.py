"""Time-evolving block decimation for nearest-neighbour lattice models.

The state is kept in right-canonical form ``B_i`` with singular values ``S_i``
on the bond left of site ``i``; two-site updates follow Hastings' scheme so no
singular value is ever inverted. Two geometries are supported:

``finite``
    open chain of ``L`` sites, ``L + 1`` bonds (the outer two trivial);
``infinite``
    translation-invariant two-site unit cell ``(A, B)``; bond ``k`` sits left
    of cell site ``k``.

Schwinger sites merge the staggered fermion ``x`` with the link to its right,
so hopping is a strict nearest-neighbour gate. The staggered charge
``f_x - x % 2`` is conserved and is used to split every SVD into blocks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator, eigs

from .propagate import TimeSeries, time_grid

CHECKPOINT_VERSION = 1
SV_FLOOR = 1e-12
UNITARITY_TOL = 1e-12
CANONICAL_TOL = 1e-10
MODES = ("finite", "infinite")
OVERSAMPLE = 16
RESERVED_COLUMNS = frozenset({"discarded", "bond_dim"})


class TebdError(RuntimeError):
    """Numerical failure inside a TEBD run (SVD breakdown, canonical drift)."""


# ---------------------------------------------------------------------------
# local Hamiltonians
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class LocalTerms:
    """Nearest-neighbour Hamiltonian ``sum_i h_i + sum_b h_b``.

    ``onsite[i]`` is ``d x d``; ``bonds[b]`` is ``d^2 x d^2`` acting on sites
    ``(b, b + 1)`` (cyclic in the infinite cell). ``charges`` maps each local
    index to an integer quantum number per cell site (``None``: no symmetry),
    added modulo ``charge_modulus`` when that is set. ``basis_change`` has the
    field-basis components of each local basis vector as columns (``None``:
    the field basis itself). ``product_state[i]`` is the local index of the
    initial product state.
    """

    model: str
    d: int
    mode: str
    onsite: tuple
    bonds: tuple
    product_state: tuple
    charges: tuple | None = None
    params: dict = field(default_factory=dict)
    charge_modulus: int | None = None
    basis_change: np.ndarray | None = None

    @property
    def num_sites(self) -> int:
        return len(self.onsite)

    def bond_sites(self, b: int) -> tuple[int, int]:
        return b, (b + 1) % self.num_sites

    def site_weights(self) -> np.ndarray:
        """Share of each on-site term given to each touching bond."""
        L = self.num_sites
        if self.mode == "infinite":
            return np.full(L, 0.5)
        w = np.full(L, 0.5)
        w[0] = w[-1] = 1.0
        return w

    def bond_hamiltonian(self, b: int) -> np.ndarray:
        i, j = self.bond_sites(b)
        w = self.site_weights()
        eye = np.eye(self.d)
        return (self.bonds[b] + w[i] * np.kron(self.onsite[i], eye)
                + w[j] * np.kron(eye, self.onsite[j]))

    def diagonal(self, name: str, site: int) -> np.ndarray:
        """Diagonal local observable as a length-``d`` vector."""
        return local_observable(self, name, site)


def _field_ops(lam: int):
    e = np.arange(-lam, lam + 1, dtype=float)
    lower = np.diag(np.ones(2 * lam), k=1)  # |n><n+1|
    return e, lower


def parity_basis(lam: int) -> tuple[np.ndarray, np.ndarray]:
    """Charge-conjugation eigenbasis ``|0>, (|n> +- |-n>)/sqrt2``.

    Returns ``(W, parity)``: columns of ``W`` are the new basis vectors in the
    field basis, ``parity`` is 0 (even) or 1 (odd) per column.
    """
    d = 2 * lam + 1
    W = np.zeros((d, d))
    parity = np.zeros(d, dtype=np.int64)
    W[lam, 0] = 1.0
    r = 1 / math.sqrt(2)
    for n in range(1, lam + 1):
        W[lam + n, 2 * n - 1], W[lam - n, 2 * n - 1] = r, r
        W[lam + n, 2 * n], W[lam - n, 2 * n] = r, -r
        parity[2 * n] = 1
    return W, parity


def chain_terms(g: float, lam: int, L: int | None = None, parity: bool = True) -> LocalTerms:
    """Gauge-fixed plaquette chain; ``L=None`` gives the infinite two-site cell.

    Open ends couple to a zero field outside the chain, so the first and last
    plaquettes carry an extra ``g^2/2 E^2`` rung. With ``parity`` the local
    basis diagonalises ``E -> -E``, a symmetry of the chain and of the
    vacuum, and every SVD splits into two Z_2 blocks.
    """
    if not g > 0:
        raise ValueError(f"coupling g must be > 0, got {g}")
    if lam < 0:
        raise ValueError(f"truncation must be >= 0, got {lam}")
    e, lower = _field_ops(lam)
    d = 2 * lam + 1
    site = np.diag(g**2 * e**2) + (2 * np.eye(d) - lower - lower.T) / (2 * g**2)
    rung = 0.5 * g**2 * (e[:, None] - e[None, :]) ** 2
    bond = np.diag(rung.ravel())
    mode = "infinite" if L is None else "finite"
    n = 2 if L is None else L
    if n < 2:
        raise ValueError(f"chain needs L >= 2 plaquettes, got {L}")
    onsite = [site.copy() for _ in range(n)]
    if mode == "finite":
        onsite[0] = onsite[0] + np.diag(0.5 * g**2 * e**2)
        onsite[-1] = onsite[-1] + np.diag(0.5 * g**2 * e**2)
    nb = n if mode == "infinite" else n - 1
    params = {"g": g, "lam": lam, "L": L}
    if not parity:
        return LocalTerms("u1_chain", d, mode, tuple(onsite), tuple(bond for _ in range(nb)),
                          tuple([lam] * n), None, params)
    W, par = parity_basis(lam)
    W2 = np.kron(W, W)
    onsite = [W.T @ h @ W for h in onsite]
    bond = W2.T @ bond @ W2
    return LocalTerms("u1_chain", d, mode, tuple(onsite), tuple(bond for _ in range(nb)),
                      tuple([0] * n), tuple(par for _ in range(n)), params, 2, W)


def schwinger_terms(g: float, m: float, lam: int, N: int | None = None) -> LocalTerms:
    """Merged ``fermion x (x) link x`` sites; local index ``f * (2 lam + 1) + E + lam``.

    The mass term is shifted so the staggered vacuum costs nothing. In the
    finite chain the last link is the right boundary field and carries no
    electric energy.
    """
    if not g > 0:
        raise ValueError(f"coupling g must be > 0, got {g}")
    if lam < 0:
        raise ValueError(f"truncation must be >= 0, got {lam}")
    mode = "infinite" if N is None else "finite"
    n = 2 if N is None else N
    if n < 2 or n % 2:
        raise ValueError(f"need an even number of staggered sites >= 2, got {N}")
    e, lower = _field_ops(lam)
    dl = 2 * lam + 1
    d = 2 * dl
    f = np.repeat([0.0, 1.0], dl)
    ef = np.tile(e, 2)
    onsite, charges, start = [], [], []
    for x in range(n):
        mass = m * (f if x % 2 == 0 else 1 - f)
        elec = 0.5 * g**2 * ef**2
        if mode == "finite" and x == n - 1:
            elec = np.zeros(d)
        onsite.append(np.diag(mass + elec))
        charges.append((f - x % 2).astype(np.int64))
        start.append((x % 2) * dl + lam)
    # psi^+_{x+1} U_x psi_x: fermion leaves x (f 1->0), link x lowered, fermion enters x+1
    sm = np.array([[0.0, 1.0], [0.0, 0.0]])  # |0><1| in the (f=0, f=1) basis
    left = np.kron(sm, lower)                   # acts on (f_x, E_x)
    right = np.kron(sm.T, np.eye(dl))           # acts on (f_{x+1}, E_{x+1})
    hop = 0.5 * np.kron(left, right)
    hop = hop + hop.T
    nb = n if mode == "infinite" else n - 1
    return LocalTerms("schwinger", d, mode, tuple(onsite), tuple(hop for _ in range(nb)),
                      tuple(start), tuple(charges), {"g": g, "m": m, "lam": lam, "N": N})


def local_terms(model: str, g: float, lam: int, m: float = 0.0, size: int | None = None) -> LocalTerms:
    if model == "u1_chain":
        return chain_terms(g, lam, size)
    if model == "schwinger":
        return schwinger_terms(g, m, lam, size)
    raise ValueError(f"TEBD supports 'u1_chain' and 'schwinger', got {model!r}")


TEBD_OBSERVABLES = ("E2", "E", "Pi", "Pi_sym", "occupation", "chiral")


def local_observable(terms: LocalTerms, name: str, site: int, level: int | None = None) -> np.ndarray:
    """Local observable on cell/chain site ``site``, in the terms' local basis.

    ``Pi`` projects the field onto ``+level``, ``Pi_sym`` onto ``+-level``;
    ``chiral`` is ``(-1)^x f_x``. Diagonal operators come back as vectors,
    others as ``d x d`` matrices.
    """
    lam = terms.params["lam"]
    e = np.arange(-lam, lam + 1, dtype=float)
    if terms.model == "schwinger":
        e = np.tile(e, 2)
        f = np.repeat([0.0, 1.0], 2 * lam + 1)
    else:
        f = None
    if name == "E2":
        v = e**2
    elif name == "E":
        v = e
    elif name in ("Pi", "Pi_sym"):
        if level is None:
            raise ValueError(f"{name} needs a field level")
        hit = (np.abs(e) == level) if name == "Pi_sym" else (e == level)
        v = hit.astype(float)
    elif name in ("occupation", "chiral"):
        if f is None:
            raise ValueError(f"{name} needs fermions")
        v = f if name == "occupation" else f * (1 if site % 2 == 0 else -1)
    else:
        raise ValueError(f"unknown TEBD observable {name!r}; expected one of {TEBD_OBSERVABLES}")
    W = terms.basis_change
    if W is None:
        return v
    op = W.T @ (v[:, None] * W)
    off = op - np.diag(np.diag(op))
    return np.diag(op).copy() if np.max(np.abs(off), initial=0.0) < 1e-14 else op


# ---------------------------------------------------------------------------
# gates
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Gate:
    bond: int
    fraction: float  # of dt
    matrix: np.ndarray


def _exp_hermitian(h: np.ndarray, tau: float) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    u = (v * np.exp(-1j * tau * w)) @ v.conj().T
    err = np.max(np.abs(u @ u.conj().T - np.eye(len(u))))
    if err > UNITARITY_TOL:
        raise TebdError(f"gate unitarity error {err:.3e} exceeds {UNITARITY_TOL}")
    return u


def compile_gates(terms: LocalTerms, dt: float) -> list[list[Gate]]:
    """Second-order Trotter step as layers ``[odd/2, even, odd/2]``.

    Bonds in a layer commute. In the infinite cell the "even" bond is
    ``A-B`` and the "odd" bond ``B-A``.
    """
    if not dt > 0:
        raise ValueError(f"dt must be > 0, got {dt}")
    nb = len(terms.bonds)
    even = list(range(0, nb, 2))
    odd = list(range(1, nb, 2))
    cache: dict[tuple[int, float], np.ndarray] = {}

    def gate(b, frac):
        if (b, frac) not in cache:
            cache[(b, frac)] = _exp_hermitian(terms.bond_hamiltonian(b), frac * dt)
        return Gate(b, frac, cache[(b, frac)])

    if not odd:
        return [[gate(b, 1.0) for b in even]]
    return [[gate(b, 0.5) for b in odd], [gate(b, 1.0) for b in even], [gate(b, 0.5) for b in odd]]


# ---------------------------------------------------------------------------
# MPS
# ---------------------------------------------------------------------------

@dataclass
class MPSChain:
    """Right-canonical MPS: ``B[i]`` is ``(chi_i, d, chi_{i+1})``; ``S[i]`` left of site ``i``.

    ``charges[i]`` labels the bond-``i`` basis when an abelian symmetry is
    used; ``modulus`` is ``None`` for U(1) and ``n`` for Z_n. With
    ``randomized`` large updates use a warm-started range finder instead of a
    full SVD.
    """

    B: list
    S: list
    mode: str
    charges: list | None = None
    site_charges: tuple | None = None
    modulus: int | None = None
    randomized: bool = True

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")
        expect = len(self.B) + (0 if self.mode == "infinite" else 1)
        if len(self.S) != expect:
            raise ValueError(f"{self.mode} MPS with {len(self.B)} sites needs {expect} bond vectors")

    @classmethod
    def product(cls, terms: LocalTerms) -> "MPSChain":
        d = terms.d
        B = []
        for s in terms.product_state:
            t = np.zeros((1, d, 1), dtype=complex)
            t[0, s, 0] = 1
            B.append(t)
        nbond = len(B) + (0 if terms.mode == "infinite" else 1)
        S = [np.ones(1) for _ in range(nbond)]
        charges = None
        if terms.charges is not None:
            mod = terms.charge_modulus
            q = [0]
            for i, s in enumerate(terms.product_state):
                nxt = q[-1] + int(terms.charges[i][s])
                q.append(nxt % mod if mod else nxt)
            if terms.mode == "infinite" and q[-1] != 0:
                raise ValueError("infinite product state must carry zero charge per cell")
            charges = [np.array([c], dtype=np.int64) for c in q[:nbond]]
        return cls(B, S, terms.mode, charges, terms.charges, terms.charge_modulus)

    @property
    def num_sites(self) -> int:
        return len(self.B)

    def _wrap(self, q):
        return q % self.modulus if self.modulus else q

    @property
    def d(self) -> int:
        return self.B[0].shape[1]

    def bond_dimensions(self) -> list[int]:
        return [len(s) for s in self.S]

    def _mid(self, i: int) -> int:
        return (i + 1) % len(self.S)

    def copy(self) -> "MPSChain":
        return MPSChain([b.copy() for b in self.B], [s.copy() for s in self.S], self.mode,
                        None if self.charges is None else [c.copy() for c in self.charges], self.site_charges,
                        self.modulus, self.randomized)

    # ---- local measurements ------------------------------------------------
    def site_probabilities(self, i: int) -> np.ndarray:
        w = np.abs(self.B[i]) ** 2
        return np.tensordot(self.S[i] ** 2, w.sum(axis=2), axes=(0, 0))

    def all_probabilities(self) -> np.ndarray:
        return np.array([self.site_probabilities(i) for i in range(self.num_sites)])

    def norm_error(self) -> float:
        return max(abs(float(np.sum(s**2)) - 1) for s in self.S)

    def canonical_error(self) -> float:
        """Max deviation of the Schmidt-weighted environment identities.

        Checks ``S (sum B B^+) S = S^2`` and ``sum S^2 B^+ B = S_right^2``.
        Rows of ``B`` paired with negligible Schmidt values carry no weight
        in any expectation value and are not constrained.
        """
        err = 0.0
        for i, b in enumerate(self.B):
            sl = self.S[i]
            right = np.tensordot(b, b.conj(), axes=([1, 2], [1, 2]))
            err = max(err, float(np.max(np.abs(sl[:, None] * (right - np.eye(len(right))) * sl[None, :]))))
            left = np.tensordot(b.conj() * (sl**2)[:, None, None], b, axes=([0, 1], [0, 1]))
            sr = self.S[self._mid(i)] ** 2 if (self.mode == "infinite" or i + 1 < len(self.S)) else np.ones(1)
            err = max(err, float(np.max(np.abs(left - np.diag(sr)))))
        return err

    # ---- two-site update -----------------------------------------------------
    def apply_two_site(self, i: int, u: np.ndarray, chi: int, floor: float = SV_FLOOR) -> float:
        """Apply ``u`` (``d^2 x d^2``) on sites ``(i, i+1)``; return discarded weight."""
        j = (i + 1) % self.num_sites
        d = self.d
        bi, bj = self.B[i], self.B[j]
        chil, chir = bi.shape[0], bj.shape[2]
        c = np.tensordot(bi, bj, axes=(2, 0)).reshape(chil, d * d, chir)
        c = np.tensordot(u, c, axes=(1, 1)).transpose(1, 0, 2)  # (chil, d*d, chir)
        theta = self.S[i][:, None, None] * c
        mid = self._mid(i)
        mat = theta.reshape(chil * d, d * chir)
        seed = bj.reshape(bj.shape[0], d * chir)
        if self.charges is not None:
            ql, qr = self.charges[i], self.charges[(i + 2) % len(self.S)]
            qi, qj = self.site_charges[i], self.site_charges[j]
            row_q = self._wrap(ql[:, None] + qi[None, :]).ravel()
            col_q = self._wrap(qr[None, :] - qj[:, None]).ravel()
            seed_q = self.charges[mid]
        else:
            row_q = np.zeros(mat.shape[0], dtype=np.int64)
            col_q = np.zeros(mat.shape[1], dtype=np.int64)
            seed_q = np.zeros(seed.shape[0], dtype=np.int64)
        s, y, q, discarded = _truncated_split(mat, row_q, col_q, seed, seed_q, chi, floor, self.randomized)
        if self.charges is not None:
            self.charges[mid] = q
        norm = np.linalg.norm(s)
        self.S[mid] = s / norm
        self.B[j] = y.reshape(len(s), d, chir)
        self.B[i] = (c.reshape(chil * d, d * chir) @ y.conj().T).reshape(chil, d, len(s)) / norm
        return discarded

    # ---- checkpointing -------------------------------------------------------
    def to_arrays(self) -> dict:
        out = {"version": np.array(CHECKPOINT_VERSION), "mode": np.array(self.mode),
               "modulus": np.array(self.modulus or 0),
               "num_sites": np.array(self.num_sites), "num_bonds": np.array(len(self.S))}
        for k, b in enumerate(self.B):
            out[f"B{k}"] = b
        for k, s in enumerate(self.S):
            out[f"S{k}"] = s
        if self.charges is not None:
            for k, q in enumerate(self.charges):
                out[f"Q{k}"] = q
            for k, q in enumerate(self.site_charges):
                out[f"q{k}"] = q
        return out

    @classmethod
    def from_arrays(cls, data: Mapping) -> "MPSChain":
        version = int(data["version"])
        if version != CHECKPOINT_VERSION:
            raise ValueError(f"checkpoint version {version} unsupported (expected {CHECKPOINT_VERSION})")
        n, nb = int(data["num_sites"]), int(data["num_bonds"])
        charges = site_q = None
        if "Q0" in data:
            charges = [np.asarray(data[f"Q{k}"], dtype=np.int64) for k in range(nb)]
            site_q = tuple(np.asarray(data[f"q{k}"], dtype=np.int64) for k in range(n))
        return cls([np.asarray(data[f"B{k}"]) for k in range(n)], [np.asarray(data[f"S{k}"]) for k in range(nb)],
                   str(data["mode"]), charges, site_q, int(data["modulus"]) or None)


def _svd(mat: np.ndarray):
    try:
        return sla.svd(mat, full_matrices=False, lapack_driver="gesdd", check_finite=False)
    except np.linalg.LinAlgError:
        try:
            return sla.svd(mat, full_matrices=False, lapack_driver="gesvd", check_finite=False)
        except np.linalg.LinAlgError as exc:
            raise TebdError(f"SVD failed on a {mat.shape} block") from exc


def _range_svd(mat: np.ndarray, seed_rows: np.ndarray, k: int):
    """Leading ``k`` singular values and right vectors by a warm-started range finder.

    ``seed_rows`` (the previous right tensor) nearly spans the row space, so
    one power iteration recovers the kept triplets to working precision.
    """
    n = mat.shape[1]
    omega = seed_rows.conj().T[:, :k]
    if omega.shape[1] < k:
        extra = k - omega.shape[1]
        rng = np.random.default_rng(omega.shape[1] * 7919 + n)
        omega = np.hstack([omega, rng.standard_normal((n, extra)) + 1j * rng.standard_normal((n, extra))])
    p, _ = np.linalg.qr(mat.conj().T @ (mat @ omega))
    _, s, vh = _svd(mat @ p)
    return s, vh @ p.conj().T


def _block_triplets(sub: np.ndarray, seed: np.ndarray | None, randomized: bool):
    if randomized and seed is not None and len(seed):
        k = len(seed) + OVERSAMPLE
        if 2 * k <= min(sub.shape):
            return _range_svd(sub, seed, k)
    _, s, vh = _svd(sub)
    return s, vh


def _truncated_split(mat, row_q, col_q, seed, seed_q, chi, floor, randomized):
    """Charge-resolved truncated SVD of ``mat``; only right vectors are formed.

    Returns ``(s, y, q, discarded)`` with ``s`` descending, ``y`` the kept
    right singular vectors (rows) and ``q`` their charges. The discarded
    weight is exact: total norm minus kept norm.
    """
    total = float(np.vdot(mat, mat).real)
    sectors = np.intersect1d(row_q, col_q)
    parts = []
    for q in sectors:
        r = np.flatnonzero(row_q == q)
        c = np.flatnonzero(col_q == q)
        sub = mat if (len(r) == mat.shape[0] and len(c) == mat.shape[1]) else mat[np.ix_(r, c)]
        sd = None
        if seed is not None:
            rows = np.flatnonzero(seed_q == q)
            sd = seed[rows][:, c] if len(rows) else None
        s, vh = _block_triplets(sub, sd, randomized)
        parts.append((q, c, s, vh))
    if not parts:
        raise TebdError("no charge sector survives the two-site update")
    alls = np.concatenate([p[2] for p in parts])
    order = np.argsort(alls)[::-1]
    keep = max(1, min(chi, int(np.sum(alls > floor))))
    chosen = np.zeros(len(alls), dtype=bool)
    chosen[order[:keep]] = True
    y = np.zeros((keep, mat.shape[1]), dtype=complex)
    s_out = np.empty(keep)
    q_out = np.empty(keep, dtype=np.int64)
    row = offset = 0
    for q, c, s, vh in parts:
        for k in np.flatnonzero(chosen[offset:offset + len(s)]):
            y[row, c] = vh[k]
            s_out[row] = s[k]
            q_out[row] = q
            row += 1
        offset += len(s)
    srt = np.argsort(s_out)[::-1]
    return s_out[srt], y[srt], q_out[srt], max(total - float(np.sum(s_out**2)), 0.0)


# ---------------------------------------------------------------------------
# evolution
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TebdProtocol:
    """Time step, final time and bond-dimension schedule.

    Before ``stage_time`` the bond dimension is capped at ``stage_chi``
    (staged growth); afterwards at ``chi``. ``measure_every`` thins the
    output grid and lets consecutive half steps merge.
    """

    T: float
    dt: float = 0.01
    chi: int = 60
    chi_step: int = 10
    chi_max: int = 200
    tolerance_factor: float = 0.1
    stage_time: float | None = None
    stage_chi: int | None = None
    sv_floor: float = SV_FLOOR
    measure_every: int = 1
    check_every: int = 50

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError(f"dt must be > 0, got {self.dt}")
        if self.T < 0:
            raise ValueError(f"T must be >= 0, got {self.T}")
        if self.chi < 1 or self.chi_step < 1:
            raise ValueError("chi and chi_step must be positive")
        if self.measure_every < 1:
            raise ValueError("measure_every must be >= 1")
        if (self.stage_time is None) != (self.stage_chi is None):
            raise ValueError("stage_time and stage_chi go together")

    def chi_at(self, t: float) -> int:
        if self.stage_time is not None and t < self.stage_time - 1e-12:
            return self.stage_chi
        return self.chi

    def with_chi(self, chi: int) -> "TebdProtocol":
        return replace(self, chi=chi)


ObservableSpec = Mapping[str, tuple]  # name -> (site, diagonal vector)


def measure_local(mps: MPSChain, op: np.ndarray, site: int) -> float:
    """``<op>`` on ``site``; ``op`` is a diagonal (length ``d``) or a ``d x d`` matrix."""
    op = np.asarray(op)
    if op.ndim == 1:
        return float(mps.site_probabilities(site) @ op)
    theta = mps.S[site][:, None, None] * mps.B[site]
    return float(np.einsum("asb,st,atb->", theta.conj(), op, theta).real)


def _apply_layer(mps, layer, chi, floor):
    w = 0.0
    for g in layer:
        w += mps.apply_two_site(g.bond, g.matrix, chi, floor)
    return w


def evolve_tebd(mps: MPSChain, gates: list[list[Gate]], protocol: TebdProtocol, observables: ObservableSpec,
                metadata: dict | None = None, checkpoint: str | None = None,
                progress: Callable[[float, MPSChain], None] | None = None) -> TimeSeries:
    """Evolve ``mps`` in place and record the named local observables.

    Besides the observables the output has columns ``discarded`` (cumulative
    truncated weight) and ``bond_dim`` (largest bond dimension).
    """
    steps = int(round(protocol.T / protocol.dt))
    if abs(steps * protocol.dt - protocol.T) > 1e-9 * max(1.0, protocol.T):
        raise ValueError(f"T={protocol.T} is not a multiple of dt={protocol.dt}")
    every = protocol.measure_every
    times = time_grid(protocol.T, protocol.dt)[::every]
    out = {k: np.empty(len(times)) for k in observables}
    out["discarded"] = np.empty(len(times))
    clash = RESERVED_COLUMNS & set(observables)
    if clash:
        raise ValueError(f"observable names {sorted(clash)} are reserved")
    out["bond_dim"] = np.empty(len(times))
    discarded = 0.0

    def record(k):
        probs = {}
        for name, (site, op) in observables.items():
            op = np.asarray(op)
            if op.ndim == 1:
                if site not in probs:
                    probs[site] = mps.site_probabilities(site)
                out[name][k] = probs[site] @ op
            else:
                out[name][k] = measure_local(mps, op, site)
        out["discarded"][k] = discarded
        out["bond_dim"][k] = max(mps.bond_dimensions())

    record(0)
    floor = protocol.sv_floor
    three = len(gates) == 3
    pending_half = False  # first layer of the next step already merged in
    for n in range(steps):
        t = n * protocol.dt
        chi = protocol.chi_at(t)
        if three:
            if not pending_half:
                discarded += _apply_layer(mps, gates[0], chi, floor)
            discarded += _apply_layer(mps, gates[1], chi, floor)
            measure = (n + 1) % every == 0 or n + 1 == steps
            if measure:
                discarded += _apply_layer(mps, gates[2], chi, floor)
                pending_half = False
            else:
                merged = [Gate(g.bond, 1.0, g.matrix @ g.matrix) for g in gates[2]]
                discarded += _apply_layer(mps, merged, chi, floor)
                pending_half = True
        else:
            discarded += _apply_layer(mps, gates[0], chi, floor)
            measure = (n + 1) % every == 0
        if (n + 1) % protocol.check_every == 0:
            _check_canonical(mps)
        if measure and (n + 1) % every == 0:
            record((n + 1) // every)
        if progress is not None:
            progress((n + 1) * protocol.dt, mps)
    if checkpoint:
        save_checkpoint(checkpoint, mps, {"t": protocol.T, "discarded": discarded})
    meta = {"dt": protocol.dt, "T": protocol.T, "chi": protocol.chi, "stage_time": protocol.stage_time,
            "stage_chi": protocol.stage_chi, "sv_floor": floor, "mode": mps.mode,
            "num_sites": mps.num_sites, "discarded_weight": discarded}
    meta.update(metadata or {})
    return TimeSeries(times, out, meta)


def _check_canonical(mps: MPSChain) -> None:
    err = mps.canonical_error()
    if err <= CANONICAL_TOL:
        return
    recanonicalize(mps)
    err2 = mps.canonical_error()
    if err2 > 1e3 * CANONICAL_TOL:
        raise TebdError(f"canonical form drift {err:.3e}; after re-canonicalisation still {err2:.3e}")


# ---------------------------------------------------------------------------
# re-canonicalisation
# ---------------------------------------------------------------------------

def recanonicalize(mps: MPSChain, floor: float = SV_FLOOR) -> None:
    """Restore the right-canonical Schmidt form in place (no truncation beyond ``floor``)."""
    if mps.mode == "finite":
        _recanon_finite(mps, floor)
    else:
        _recanon_infinite(mps, floor)


def _recanon_finite(mps: MPSChain, floor: float) -> None:
    L = mps.num_sites
    # left-orthonormalise with the Schmidt weights folded in, then SVD back
    A = [mps.S[0][:, None, None] * mps.B[0]] + [b for b in mps.B[1:]]
    for i in range(L - 1):
        chil, d, chir = A[i].shape
        q, r = np.linalg.qr(A[i].reshape(chil * d, chir))
        A[i] = q.reshape(chil, d, -1)
        A[i + 1] = np.tensordot(r, A[i + 1], axes=(1, 0))
    A[-1] = A[-1] / np.linalg.norm(A[-1])
    carry = None
    for i in range(L - 1, 0, -1):
        t = A[i] if carry is None else np.tensordot(A[i], carry, axes=(2, 0))
        chil, d, chir = t.shape
        u, s, vh = np.linalg.svd(t.reshape(chil, d * chir), full_matrices=False)
        keep = max(1, int(np.sum(s > floor)))
        mps.B[i] = vh[:keep].reshape(keep, d, chir)
        mps.S[i] = s[:keep] / np.linalg.norm(s[:keep])
        carry = u[:, :keep] * s[:keep]
        if mps.charges is not None:
            mps.charges[i] = _infer_charges(mps, i)
    t = np.tensordot(A[0], carry, axes=(2, 0))
    mps.B[0] = t / np.linalg.norm(t)
    mps.S[0] = np.ones(1)


def _infer_charges(mps, bond):
    """Charge label of each bond-``bond`` state from the tensor to its right."""
    b = mps.B[bond]
    qr = mps.charges[bond + 1] if mps.mode == "finite" else mps.charges[(bond + 1) % len(mps.S)]
    qs = mps.site_charges[bond]
    labels = qr[None, :] - qs[:, None]  # (d, chir)
    out = np.empty(b.shape[0], dtype=np.int64)
    for a in range(b.shape[0]):
        w = np.abs(b[a]) ** 2
        out[a] = labels.ravel()[int(np.argmax(w.ravel()))]
    return mps._wrap(out)


def _dominant(apply, n: int):
    op = LinearOperator((n * n, n * n), matvec=lambda v: apply(v.reshape(n, n)).ravel(), dtype=complex)
    if n * n <= 16:
        mat = np.column_stack([op.matvec(e) for e in np.eye(n * n)])
        w, v = np.linalg.eig(mat)
        k = int(np.argmax(np.abs(w)))
        return w[k], v[:, k].reshape(n, n)
    w, v = eigs(op, k=1, which="LM", v0=np.eye(n).ravel().astype(complex))
    return w[0], v[:, 0].reshape(n, n)


def _psd_sqrt(m: np.ndarray, floor: float):
    m = 0.5 * (m + m.conj().T)
    m = m * np.sign(np.trace(m).real or 1.0)
    w, v = np.linalg.eigh(m)
    w = np.where(w > floor * w.max(), w, 0.0)
    return v * np.sqrt(w), v * np.where(w > 0, 1 / np.sqrt(np.where(w > 0, w, 1)), 0)


def _recanon_infinite(mps: MPSChain, floor: float) -> None:
    """Orus-Vidal canonicalisation of the two-site cell."""
    d = mps.d
    T = np.tensordot(mps.B[0], mps.B[1], axes=(2, 0))  # (chi, d, d, chi)
    chi = T.shape[0]
    T = T.reshape(chi, d * d, chi)
    # right fixed point: sum T X T^+ ; left fixed point with the left weights
    eta_r, R = _dominant(lambda X: np.einsum("asb,bc,dsc->ad", T, X, T.conj(), optimize=True), chi)
    _, Lm = _dominant(lambda X: np.einsum("asb,ad,dsc->bc", T.conj(), X, T, optimize=True), chi)
    Xr, _ = _psd_sqrt(R, floor)                 # R = Xr Xr^+
    Yl, _ = _psd_sqrt(Lm.T, floor)              # L^T = Yl Yl^+
    u, lam, vh = np.linalg.svd(Yl.T @ Xr)
    keep = max(1, int(np.sum(lam > floor * lam[0])))
    u, lam, vh = u[:, :keep], lam[:keep], vh[:keep]
    lam = lam / np.linalg.norm(lam)
    # new right-canonical cell: vh Xr^{-1} T Xr vh^+ ... expressed without inverses via pinv
    Xr_pinv = np.linalg.pinv(Xr)
    cell = np.einsum("ka,asb,bl->ksl", vh @ Xr_pinv, T, Xr @ vh.conj().T) / np.sqrt(abs(eta_r))
    k = cell.shape[0]
    theta = lam[:, None, None] * cell
    uu, s, vv = np.linalg.svd(theta.reshape(k * d, d * k), full_matrices=False)
    keep2 = max(1, int(np.sum(s > floor)))
    s = s[:keep2] / np.linalg.norm(s[:keep2])
    B1 = vv[:keep2].reshape(keep2, d, k)
    B0 = (cell.reshape(k * d, d * k) @ vv[:keep2].conj().T).reshape(k, d, keep2)
    B0 = B0 / np.sqrt(np.sum(np.abs(lam[:, None, None] * B0) ** 2))
    mps.B[0], mps.B[1] = B0, B1
    mps.S[0], mps.S[1] = lam, s
    if mps.charges is not None:
        mps.charges[1] = _infer_charges(mps, 1)
        mps.charges[0] = _infer_charges(mps, 0)


# ---------------------------------------------------------------------------
# checkpoints
# ---------------------------------------------------------------------------

def save_checkpoint(path: str, mps: MPSChain, extra: Mapping | None = None) -> None:
    arrays = mps.to_arrays()
    for k, v in (extra or {}).items():
        arrays[f"extra_{k}"] = np.asarray(v)
    np.savez_compressed(path, **arrays)


def load_checkpoint(path: str) -> tuple[MPSChain, dict]:
    with np.load(path, allow_pickle=False) as data:
        arrays = {k: data[k] for k in data.files}
    extra = {k[6:]: arrays[k].item() if arrays[k].ndim == 0 else arrays[k] for k in arrays if k.startswith("extra_")}
    return MPSChain.from_arrays(arrays), extra


# ---------------------------------------------------------------------------
# convergence protocol
# ---------------------------------------------------------------------------

@dataclass
class ConvergenceResult:
    series: TimeSeries
    chi: int
    converged: bool
    gap: float
    history: list = field(default_factory=list)


def converge_bond_dimension(run: Callable[[int], TimeSeries], protocol: TebdProtocol, columns: Sequence[str],
                            target) -> ConvergenceResult:
    """Grow ``chi`` by ``chi_step`` until consecutive runs agree.

    Agreement means ``max_t |a - b| <= tolerance_factor * target`` for every
    column; ``target`` is a scalar or a ``{column: value}`` mapping (e.g. the
    predicted truncation error). The returned series is the larger-``chi`` run.
    """
    targets = target if isinstance(target, Mapping) else {c: target for c in columns}
    chi = protocol.chi
    prev = run(chi)
    history = []
    gap = math.inf
    while chi + protocol.chi_step <= protocol.chi_max:
        chi_next = chi + protocol.chi_step
        cur = run(chi_next)
        ratios = [float(np.max(np.abs(cur[c] - prev[c]))) / (protocol.tolerance_factor * float(targets[c]))
                  for c in columns]
        gap = max(ratios)
        history.append({"chi": chi_next, "gap": gap,
                        "max_bond": int(np.max(cur["bond_dim"])) if "bond_dim" in cur.values else chi_next})
        prev, chi = cur, chi_next
        if gap <= 1.0:
            prev.metadata.update({"converged_chi": chi, "convergence_gap": gap})
            return ConvergenceResult(prev, chi, True, gap, history)
    prev.metadata.update({"converged_chi": None, "convergence_gap": gap})
    return ConvergenceResult(prev, chi, False, gap, history)


# ---------------------------------------------------------------------------
# experiment helper
# ---------------------------------------------------------------------------

def run_tebd(model: str, g: float, lam: int, T: float, *, m: float = 0.0, size: int | None = None,
             chi: int = 60, dt: float = 0.01, observables: Mapping[str, tuple] | None = None,
             protocol: TebdProtocol | None = None, checkpoint: str | None = None) -> TimeSeries:
    """Evolve the electric vacuum and measure ``{name: (obs, site, level)}``.

    Default observables: ``E2`` and ``Pi_<k>`` (``k = 1..lam``) on the central
    site (cell site 0 in infinite mode), plus ``chiral`` for Schwinger.
    """
    terms = local_terms(model, g, lam, m, size)
    proto = protocol.with_chi(chi) if protocol else TebdProtocol(T=T, dt=dt, chi=chi)
    centre = 0 if size is None else size // 2
    if observables is None:
        observables = {"E2": ("E2", centre, None)}
        for k in range(1, lam + 1):
            observables[f"Pi_{k}"] = ("Pi", centre, k)
        if model == "schwinger":
            observables["chiral"] = ("chiral", centre, None)
    spec = {name: (site, local_observable(terms, obs, site, level)) for name, (obs, site, level) in observables.items()}
    mps = MPSChain.product(terms)
    gates = compile_gates(terms, proto.dt)
    meta = {"model": model, "g": g, "m": m, "lam": lam, "size": size}
    return evolve_tebd(mps, gates, proto, spec, metadata=meta, checkpoint=checkpoint)
