"""Truncated Hilbert-space bases for the plaquette, chain, Schwinger and
Hubbard-Holstein models.

All bases are immutable after construction. Index conventions are fixed so
that state vectors written to disk by one run can be read by another:

* link fields ``n = -lam, ..., +lam`` map to ``0, ..., 2*lam``;
* chain configurations are ordered lexicographically with plaquette 0 the
  most significant digit;
* Schwinger configurations are sorted by their occupation bit string
  (site 0 first);
* Hubbard-Holstein states are ``(fermion_site, n_left, n_right)`` in
  lexicographic order.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


class EmptyBasisError(ValueError):
    """Raised when a truncation/sector choice admits no basis state at all."""


@dataclass(frozen=True)
class LinkBasis:
    """Electric basis ``|n>`` of a single U(1) link with ``|n| <= lam``."""

    lam: int

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"truncation must be >= 0, got {self.lam}")

    @property
    def dimension(self) -> int:
        return 2 * self.lam + 1

    @property
    def values(self) -> np.ndarray:
        return np.arange(-self.lam, self.lam + 1)

    def index(self, n: int) -> int:
        if abs(n) > self.lam:
            raise ValueError(f"field {n} outside truncation |n| <= {self.lam}")
        return int(n) + self.lam

    def value(self, index: int) -> int:
        if not 0 <= index < self.dimension:
            raise IndexError(index)
        return int(index) - self.lam


def link_index(n: int, basis: LinkBasis) -> int:
    return basis.index(n)


@dataclass(frozen=True)
class ChainBasis:
    """Product basis ``|n_1, ..., n_L>`` of a gauge-fixed plaquette chain."""

    num_plaquettes: int
    lam: int

    def __post_init__(self):
        if self.num_plaquettes < 1:
            raise ValueError("need at least one plaquette")
        LinkBasis(self.lam)

    @property
    def link(self) -> LinkBasis:
        return LinkBasis(self.lam)

    @property
    def local_dimension(self) -> int:
        return 2 * self.lam + 1

    @property
    def dimension(self) -> int:
        return self.local_dimension**self.num_plaquettes

    def index(self, config) -> int:
        config = tuple(int(c) for c in config)
        if len(config) != self.num_plaquettes:
            raise ValueError(f"expected {self.num_plaquettes} fields, got {len(config)}")
        d = self.local_dimension
        idx = 0
        for n in config:
            idx = idx * d + self.link.index(n)
        return idx

    def config(self, index: int) -> tuple[int, ...]:
        if not 0 <= index < self.dimension:
            raise IndexError(index)
        d = self.local_dimension
        digits = []
        for _ in range(self.num_plaquettes):
            index, r = divmod(index, d)
            digits.append(r - self.lam)
        return tuple(reversed(digits))

    def field_table(self) -> np.ndarray:
        """``(dimension, L)`` integer array of the field on every plaquette."""
        d = self.local_dimension
        L = self.num_plaquettes
        idx = np.arange(self.dimension)
        out = np.empty((self.dimension, L), dtype=np.int64)
        for p in range(L - 1, -1, -1):
            idx, r = np.divmod(idx, d)
            out[:, p] = r - self.lam
        return out


def product_index(config, basis: ChainBasis) -> int:
    return basis.index(config)


def config_of(index: int, basis: ChainBasis) -> tuple[int, ...]:
    return basis.config(index)


def staggered_charge(site: int, occupation: int) -> int:
    """Charge of staggered site ``site``: ``f`` on even, ``f - 1`` on odd sites."""
    return occupation - (site % 2)


@dataclass(frozen=True)
class SchwingerBasis:
    """Gauss-law resolved basis of the staggered Schwinger model, open chain.

    Link ``x`` sits between sites ``x`` and ``x + 1``; link ``N - 1`` is the
    right boundary field. ``fields[i, x]`` holds ``E_x`` for configuration ``i``.
    """

    num_sites: int
    lam: int
    e_left: int = 0
    charge: int = 0
    occupations: np.ndarray = field(repr=False, compare=False, default=None)
    fields: np.ndarray = field(repr=False, compare=False, default=None)

    @property
    def dimension(self) -> int:
        return len(self.occupations)

    def index(self, occupation) -> int:
        key = tuple(int(f) for f in occupation)
        try:
            return self._lookup[key]
        except KeyError:
            raise KeyError(f"configuration {key} not in basis") from None

    @property
    def _lookup(self) -> dict:
        # cached on first use; frozen dataclass needs object.__setattr__
        cache = self.__dict__.get("_lookup_cache")
        if cache is None:
            cache = {tuple(int(f) for f in row): i for i, row in enumerate(self.occupations)}
            object.__setattr__(self, "_lookup_cache", cache)
        return cache

    def link_fields(self, occupation) -> np.ndarray:
        return gauss_fields(occupation, self.e_left)


def gauss_fields(occupation, e_left: int = 0) -> np.ndarray:
    """Link fields ``E_x = E_left + sum_{y <= x} q(y)`` for an occupation string."""
    occ = np.asarray(occupation, dtype=np.int64)
    q = occ - (np.arange(len(occ)) % 2)
    return e_left + np.cumsum(q)


def enumerate_schwinger(num_sites: int, lam: int, e_left: int = 0, charge: int = 0) -> SchwingerBasis:
    """All occupation strings in the given total-charge sector whose
    Gauss-law link fields satisfy ``|E_x| <= lam``.

    Raises
    ------
    EmptyBasisError
        If no configuration survives the filter.
    """
    if num_sites < 2 or num_sites % 2:
        raise ValueError(f"number of staggered sites must be even and >= 2, got {num_sites}")
    if lam < 0:
        raise ValueError(f"truncation must be >= 0, got {lam}")
    n_particles = charge + num_sites // 2
    if not 0 <= n_particles <= num_sites:
        raise EmptyBasisError(f"charge sector {charge} impossible on {num_sites} sites")
    occs = []
    # depth-first build keeps the running field bounded, which prunes heavily
    stack = [((), e_left)]
    while stack:
        prefix, e = stack.pop()
        x = len(prefix)
        if x == num_sites:
            if sum(prefix) == n_particles:
                occs.append(prefix)
            continue
        for f in (1, 0):
            e_next = e + f - (x % 2)
            if abs(e_next) <= lam:
                stack.append((prefix + (f,), e_next))
    if not occs:
        raise EmptyBasisError(
            f"no gauge-invariant states for N={num_sites}, lam={lam}, E_left={e_left}, Q={charge}"
        )
    occs.sort()
    occ_arr = np.array(occs, dtype=np.int8)
    fld_arr = np.array([gauss_fields(o, e_left) for o in occs], dtype=np.int64)
    occ_arr.setflags(write=False)
    fld_arr.setflags(write=False)
    return SchwingerBasis(num_sites, lam, e_left, charge, occ_arr, fld_arr)


@dataclass(frozen=True)
class HolsteinBasis:
    """Two-site Hubbard-Holstein basis with one spinless fermion.

    States are ``(fermion_site, n_0, n_1)`` with boson numbers ``0..lam_b``.
    """

    lam_b: int
    num_sites: int = 2

    def __post_init__(self):
        if self.lam_b < 0:
            raise ValueError("boson truncation must be >= 0")
        if self.num_sites != 2:
            raise ValueError("only the two-site model is supported")

    @property
    def dimension(self) -> int:
        return 2 * (self.lam_b + 1) ** 2

    def index(self, fermion_site: int, n0: int, n1: int) -> int:
        b = self.lam_b + 1
        if fermion_site not in (0, 1) or not (0 <= n0 < b and 0 <= n1 < b):
            raise ValueError(f"state ({fermion_site}, {n0}, {n1}) outside basis")
        return (fermion_site * b + n0) * b + n1

    def state(self, index: int) -> tuple[int, int, int]:
        b = self.lam_b + 1
        rest, n1 = divmod(index, b)
        site, n0 = divmod(rest, b)
        return site, n0, n1

    def table(self) -> np.ndarray:
        """``(dimension, 3)`` array of ``(fermion_site, n_0, n_1)``."""
        b = self.lam_b + 1
        return np.array(list(itertools.product(range(2), range(b), range(b))), dtype=np.int64)
