"""Sparse Hamiltonians and diagonal observables in the electric basis.

Conventions
-----------
* Single plaquette: ``H = 2 g^2 E^2 + (1/2g^2)(2 - P - P^+)`` where ``P`` lowers
  the field by one. The truncated ``H_lam`` keeps every diagonal element and
  drops hoppings that would leave ``|n| <= lam``.
* Plaquette chain (gauge fixed): ``g^2 E_p^2`` per plaquette, ``g^2/2 (E_p -
  E_{p+1})^2`` per rung, magnetic term as above per plaquette. With open
  boundaries the two end rungs carry ``E_1`` and ``E_L`` (zero field outside).
* Schwinger: staggered fermions, Jordan-Wigner order = site order, hopping
  ``+1/2`` between neighbours, mass term shifted so the strong-coupling vacuum
  ``f = (0, 1, 0, 1, ...)`` has zero mass energy, electric energy
  ``g^2/2 sum E_x^2`` over the ``N - 1`` interior links.
* Hubbard-Holstein: two sites, one fermion, hopping ``1/2``, ``g n_i (a_i +
  a_i^+)``, ``omega a_i^+ a_i``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .basis import (
    ChainBasis,
    HolsteinBasis,
    LinkBasis,
    SchwingerBasis,
    enumerate_schwinger,
)

MODEL_TAGS = ("u1_plaquette", "u1_chain", "schwinger", "hubbard_holstein")


class SparseHermitianOperator:
    """CSR matrix with a Hermiticity contract checked at construction."""

    __slots__ = ("matrix",)

    def __init__(self, matrix, *, check: bool = True, rtol: float = 1e-14):
        m = sp.csr_matrix(matrix, dtype=np.complex128)
        if m.shape[0] != m.shape[1]:
            raise ValueError(f"operator must be square, got {m.shape}")
        m.sum_duplicates()
        m.eliminate_zeros()
        if check:
            diff = abs(m - m.getH()).max() if m.nnz else 0.0
            scale = max(abs(m).max() if m.nnz else 0.0, 1.0)
            if diff > rtol * scale:
                raise ValueError(f"operator is not Hermitian (max |A - A^+| = {diff:.3e})")
        self.matrix = m

    @property
    def dimension(self) -> int:
        return self.matrix.shape[0]

    @property
    def shape(self):
        return self.matrix.shape

    def diagonal(self) -> np.ndarray:
        return self.matrix.diagonal()

    def toarray(self) -> np.ndarray:
        return self.matrix.toarray()

    def is_diagonal(self) -> bool:
        coo = self.matrix.tocoo()
        return bool(np.all(coo.row == coo.col))

    def expectation(self, psi: np.ndarray) -> float:
        return float(np.real(np.vdot(psi, self.matrix @ psi)))

    def __matmul__(self, other):
        return self.matrix @ other

    def __add__(self, other):
        return SparseHermitianOperator(self.matrix + _mat(other))

    def __sub__(self, other):
        return SparseHermitianOperator(self.matrix - _mat(other))

    def __mul__(self, scalar: float):
        return SparseHermitianOperator(self.matrix * float(scalar))

    __rmul__ = __mul__

    def __repr__(self):
        return f"SparseHermitianOperator(dim={self.dimension}, nnz={self.matrix.nnz})"


def _mat(op):
    return op.matrix if isinstance(op, SparseHermitianOperator) else sp.csr_matrix(op)


def _from_entries(dim: int, diag, rows, cols, vals) -> SparseHermitianOperator:
    rows = np.asarray(rows, dtype=np.int64)
    cols = np.asarray(cols, dtype=np.int64)
    vals = np.asarray(vals, dtype=np.complex128)
    idx = np.arange(dim)
    r = np.concatenate([idx, rows, cols])
    c = np.concatenate([idx, cols, rows])
    v = np.concatenate([np.asarray(diag, dtype=np.complex128), vals, vals.conj()])
    return SparseHermitianOperator(sp.coo_matrix((v, (r, c)), shape=(dim, dim)))


def diagonal_operator(values) -> SparseHermitianOperator:
    values = np.asarray(values, dtype=float)
    return SparseHermitianOperator(sp.diags(values).astype(np.complex128), check=False)


@dataclass(frozen=True)
class ModelSpec:
    """Model tag plus couplings.

    ``lam`` is the electric truncation (boson truncation for Hubbard-Holstein),
    ``size`` the number of plaquettes or staggered sites.
    """

    model: str
    g: float
    lam: int
    m: float = 0.0
    omega: float = 1.0
    size: int = 1
    bc: str = "open"
    e_left: int = 0

    def __post_init__(self):
        if self.model not in MODEL_TAGS:
            raise ValueError(f"unknown model {self.model!r}; expected one of {MODEL_TAGS}")
        if not self.g > 0:
            raise ValueError(f"coupling g must be > 0, got {self.g}")
        if self.lam < 0:
            raise ValueError(f"truncation must be >= 0, got {self.lam}")
        if self.model == "hubbard_holstein" and not self.omega > 0:
            raise ValueError("phonon frequency must be > 0")
        if self.bc not in ("open", "periodic"):
            raise ValueError(f"unknown boundary condition {self.bc!r}")

    def with_lam(self, lam: int) -> "ModelSpec":
        return ModelSpec(self.model, self.g, lam, self.m, self.omega, self.size, self.bc, self.e_left)

    def basis(self):
        if self.model == "u1_plaquette":
            return LinkBasis(self.lam)
        if self.model == "u1_chain":
            return ChainBasis(self.size, self.lam)
        if self.model == "schwinger":
            return enumerate_schwinger(self.size, self.lam, self.e_left)
        return HolsteinBasis(self.lam)

    def hamiltonian(self) -> SparseHermitianOperator:
        if self.model == "u1_plaquette":
            return u1_plaquette_hamiltonian(self.g, self.lam)
        if self.model == "u1_chain":
            return build_u1_chain(self.g, self.lam, self.size, self.bc)
        if self.model == "schwinger":
            return build_schwinger(self.g, self.m, self.lam, self.size, self.e_left)
        return build_hubbard_holstein(self.g, self.omega, self.lam)


@dataclass(frozen=True)
class TruncationSpec:
    """Model-independent truncation record: couplings, cutoff, onset, horizon."""

    g: float
    lam: int
    lam0: int = 0
    T: float = 0.0
    m: float = 0.0
    omega: float = 1.0

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"coupling g must be > 0, got {self.g}")
        if not 0 <= self.lam0 <= self.lam:
            raise ValueError(f"need 0 <= lam0 <= lam, got lam0={self.lam0}, lam={self.lam}")
        if self.T < 0:
            raise ValueError(f"time horizon must be >= 0, got {self.T}")


def _check_g(g):
    if not g > 0:
        raise ValueError(f"coupling g must be > 0, got {g}")


# ---------------------------------------------------------------------------
# single plaquette
# ---------------------------------------------------------------------------

def u1_plaquette_hamiltonian(g: float, lam: int) -> SparseHermitianOperator:
    """Truncated single-plaquette Hamiltonian on ``|n| <= lam``."""
    _check_g(g)
    basis = LinkBasis(lam)
    n = basis.values
    diag = 2 * g**2 * n**2 + 1 / g**2
    rows = np.arange(basis.dimension - 1)
    hop = np.full(len(rows), -1 / (2 * g**2))
    return _from_entries(basis.dimension, diag, rows, rows + 1, hop)


def build_u1_single_plaquette(g: float, lam: int):
    """Return ``(H_lam, V_lam)``.

    ``V_lam`` lives on the ``lam + 1`` space and holds the two hoppings
    ``lam <-> lam + 1`` and ``-lam <-> -lam - 1`` removed by the cut, so that
    ``H_{lam+1} = embed(H_lam) + diag(new edges) + V_lam``.
    """
    if lam < 1:
        raise ValueError(f"single plaquette needs lam >= 1, got {lam}")
    H = u1_plaquette_hamiltonian(g, lam)
    big = LinkBasis(lam + 1)
    rows = [big.index(lam), big.index(-lam - 1)]
    cols = [big.index(lam + 1), big.index(-lam)]
    vals = [-1 / (2 * g**2)] * 2
    V = _from_entries(big.dimension, np.zeros(big.dimension), rows, cols, vals)
    return H, V


def embed(op_or_vec, lam_small: int, lam_big: int, num_links: int = 1):
    """Embed a vector or operator from truncation ``lam_small`` into ``lam_big``.

    Works for single links and for chains of ``num_links`` plaquettes.
    """
    idx = embedding_indices(lam_small, lam_big, num_links)
    dim_big = (2 * lam_big + 1) ** num_links
    if isinstance(op_or_vec, SparseHermitianOperator) or sp.issparse(op_or_vec):
        m = _mat(op_or_vec).tocoo()
        out = sp.coo_matrix((m.data, (idx[m.row], idx[m.col])), shape=(dim_big, dim_big))
        return SparseHermitianOperator(out, check=False)
    vec = np.asarray(op_or_vec)
    out = np.zeros(dim_big, dtype=vec.dtype)
    out[idx] = vec
    return out


def embedding_indices(lam_small: int, lam_big: int, num_links: int = 1) -> np.ndarray:
    if lam_small > lam_big:
        raise ValueError("cannot embed a larger truncation into a smaller one")
    small = ChainBasis(num_links, lam_small)
    table = small.field_table() + lam_big
    d = 2 * lam_big + 1
    idx = np.zeros(small.dimension, dtype=np.int64)
    for p in range(num_links):
        idx = idx * d + table[:, p]
    return idx


# ---------------------------------------------------------------------------
# plaquette chain
# ---------------------------------------------------------------------------

def chain_electric_energy(fields: np.ndarray, g: float, bc: str = "open") -> np.ndarray:
    """Gauge-fixed electric energy of each row of ``fields`` (shape ``(k, L)``)."""
    f = np.atleast_2d(fields).astype(float)
    energy = np.sum(f**2, axis=1)
    if bc == "open":
        padded = np.pad(f, ((0, 0), (1, 1)))
        rungs = np.diff(padded, axis=1)
    elif bc == "periodic":
        rungs = f - np.roll(f, -1, axis=1)
    else:
        raise ValueError(f"unknown boundary condition {bc!r}")
    return g**2 * (energy + 0.5 * np.sum(rungs**2, axis=1))


def build_u1_chain(g: float, lam: int, L: int, bc: str = "open") -> SparseHermitianOperator:
    """Gauge-fixed U(1) plaquette-chain Hamiltonian truncated at ``|n_p| <= lam``."""
    _check_g(g)
    if L < 2:
        raise ValueError(f"chain needs L >= 2 plaquettes, got {L}")
    basis = ChainBasis(L, lam)
    fields = basis.field_table()
    diag = chain_electric_energy(fields, g, bc) + L / g**2
    d = basis.local_dimension
    rows, cols = [], []
    idx = np.arange(basis.dimension)
    for p in range(L):
        stride = d ** (L - 1 - p)
        ok = fields[:, p] < lam
        rows.append(idx[ok])
        cols.append(idx[ok] + stride)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    vals = np.full(len(rows), -1 / (2 * g**2))
    return _from_entries(basis.dimension, diag, rows, cols, vals)


# ---------------------------------------------------------------------------
# Schwinger model
# ---------------------------------------------------------------------------

def schwinger_diagonal(basis: SchwingerBasis, g: float, m: float) -> np.ndarray:
    occ = basis.occupations.astype(float)
    x = np.arange(basis.num_sites)
    sign = np.where(x % 2 == 0, 1.0, -1.0)
    mass = m * (occ @ sign + basis.num_sites // 2)
    links = basis.fields[:, : basis.num_sites - 1].astype(float)
    return mass + 0.5 * g**2 * np.sum(links**2, axis=1)


def schwinger_hops(basis: SchwingerBasis):
    """Index pairs ``(a, b)`` with ``b = psi^+_{x+1} U_x psi_x a`` inside the basis."""
    rows, cols = [], []
    for a, occ in enumerate(basis.occupations):
        for x in range(basis.num_sites - 1):
            if occ[x] == 1 and occ[x + 1] == 0:
                new = occ.copy()
                new[x], new[x + 1] = 0, 1
                try:
                    b = basis.index(new)
                except KeyError:
                    continue  # lowered link left the truncated space
                rows.append(a)
                cols.append(b)
    return np.array(rows, dtype=np.int64), np.array(cols, dtype=np.int64)


def build_schwinger(g: float, m: float, lam: int, N: int, e_left: int = 0, basis: SchwingerBasis | None = None) -> SparseHermitianOperator:
    """Staggered Schwinger Hamiltonian on ``N`` sites in the neutral sector."""
    _check_g(g)
    if basis is None:
        basis = enumerate_schwinger(N, lam, e_left)
    diag = schwinger_diagonal(basis, g, m)
    rows, cols = schwinger_hops(basis)
    return _from_entries(basis.dimension, diag, rows, cols, np.full(len(rows), 0.5))


def schwinger_vacuum(basis: SchwingerBasis) -> np.ndarray:
    occ = tuple(x % 2 for x in range(basis.num_sites))
    psi = np.zeros(basis.dimension, dtype=complex)
    psi[basis.index(occ)] = 1.0
    return psi


# ---------------------------------------------------------------------------
# Hubbard-Holstein
# ---------------------------------------------------------------------------

def build_hubbard_holstein(g: float, omega: float, lam_b: int, hopping: float = 0.5) -> SparseHermitianOperator:
    if lam_b < 1:
        raise ValueError(f"boson truncation must be >= 1, got {lam_b}")
    if not omega > 0:
        raise ValueError("phonon frequency must be > 0")
    basis = HolsteinBasis(lam_b)
    tab = basis.table()
    site, n0, n1 = tab[:, 0], tab[:, 1], tab[:, 2]
    diag = omega * (n0 + n1)
    idx = np.arange(basis.dimension)
    b = lam_b + 1
    rows, cols, vals = [], [], []
    # fermion hop: site 0 -> site 1 keeps boson numbers
    left = site == 0
    rows.append(idx[left])
    cols.append(idx[left] + b * b)
    vals.append(np.full(left.sum(), hopping))
    # g n_i (a_i^+ + a_i): raise the boson on the occupied site
    for s, occ_n, stride in ((0, n0, b), (1, n1, 1)):
        ok = (site == s) & (occ_n < lam_b)
        rows.append(idx[ok])
        cols.append(idx[ok] + stride)
        vals.append(g * np.sqrt(occ_n[ok] + 1.0))
    return _from_entries(basis.dimension, diag, np.concatenate(rows), np.concatenate(cols), np.concatenate(vals))


def ladder_raise(lam_b: int) -> np.ndarray:
    """Dense truncated ``a^+`` on ``0..lam_b``; ``<n+1|a^+|n> = sqrt(n+1)``."""
    return np.diag(np.sqrt(np.arange(1, lam_b + 1, dtype=float)), -1)


# ---------------------------------------------------------------------------
# observables
# ---------------------------------------------------------------------------

OBSERVABLE_TAGS = ("E2_link", "projector_Pi", "chiral_condensate_density", "boson_number_projector", "electric_energy_density")


def observable(tag: str, basis, *, link: int = 0, lam_prime: int | None = None, n: int | None = None,
               site: int = 0, symmetric: bool = False) -> SparseHermitianOperator:
    """Diagonal observable on ``basis``.

    ``projector_Pi`` projects onto ``E_link = +lam_prime``; with ``symmetric``
    it projects onto both ``+lam_prime`` and ``-lam_prime``.
    """
    if tag == "E2_link":
        return diagonal_operator(_fields(basis, link) ** 2)
    if tag == "projector_Pi":
        if lam_prime is None:
            raise ValueError("projector_Pi needs lam_prime")
        f = _fields(basis, link)
        hit = (np.abs(f) == lam_prime) if symmetric else (f == lam_prime)
        return diagonal_operator(hit.astype(float))
    if tag == "chiral_condensate_density":
        if not isinstance(basis, SchwingerBasis):
            raise ValueError("chiral condensate needs a Schwinger basis")
        sign = np.where(np.arange(basis.num_sites) % 2 == 0, 1.0, -1.0)
        return diagonal_operator(basis.occupations.astype(float) @ sign / basis.num_sites)
    if tag == "electric_energy_density":
        if not isinstance(basis, SchwingerBasis):
            raise ValueError("electric energy density needs a Schwinger basis")
        links = basis.fields[:, : basis.num_sites - 1].astype(float)
        return diagonal_operator(np.mean(links**2, axis=1))
    if tag == "boson_number_projector":
        if not isinstance(basis, HolsteinBasis):
            raise ValueError("boson projector needs a Hubbard-Holstein basis")
        if n is None:
            raise ValueError("boson_number_projector needs n")
        tab = basis.table()
        return diagonal_operator((tab[:, 1 + site] == n).astype(float))
    raise ValueError(f"unknown observable tag {tag!r}; expected one of {OBSERVABLE_TAGS}")


def _fields(basis, link: int) -> np.ndarray:
    if isinstance(basis, LinkBasis):
        return basis.values
    if isinstance(basis, ChainBasis):
        return basis.field_table()[:, link]
    if isinstance(basis, SchwingerBasis):
        return basis.fields[:, link]
    raise ValueError(f"basis {type(basis).__name__} has no electric field")
