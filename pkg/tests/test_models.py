import itertools
import math

import numpy as np
import pytest
import scipy.sparse as sp
from hypothesis import given, settings
from hypothesis import strategies as st

from lgtrunc.basis import ChainBasis, HolsteinBasis, LinkBasis, enumerate_schwinger
from lgtrunc.models import (
    ModelSpec,
    SparseHermitianOperator,
    TruncationSpec,
    build_hubbard_holstein,
    build_schwinger,
    build_u1_chain,
    build_u1_single_plaquette,
    embed,
    ladder_raise,
    observable,
    u1_plaquette_hamiltonian,
)


def test_plaquette_hand_values():
    # 2 g^2 n^2 + (1/2g^2)(2 - U - U^+) at g = 0.5: diagonal 0.5 n^2 + 4, hopping -2
    H = u1_plaquette_hamiltonian(0.5, 1).toarray().real
    assert np.allclose(np.diag(H), [4.5, 4.0, 4.5])
    assert np.allclose(np.diag(H, 1), [-2.0, -2.0])
    assert np.allclose(H, H.T)


@given(st.floats(0.2, 3.0), st.integers(1, 8))
def test_plaquette_diagonal_independent_of_cut(g, lam):
    small = np.diag(u1_plaquette_hamiltonian(g, lam).toarray())
    big = u1_plaquette_hamiltonian(g, lam + 3).toarray()
    idx = np.arange(2 * lam + 1) + 3
    assert np.allclose(np.diag(big)[idx], small)


def test_plaquette_block_extraction():
    g = 0.5
    H20 = u1_plaquette_hamiltonian(g, 20).toarray()
    H5 = u1_plaquette_hamiltonian(g, 5).toarray()
    idx = np.arange(11) + 15
    assert np.allclose(H20[np.ix_(idx, idx)], H5)
    H, V = build_u1_single_plaquette(g, 5)
    diff = u1_plaquette_hamiltonian(g, 6).toarray() - embed(H, 5, 6).toarray()
    edges = np.zeros(13)
    edges[[0, 12]] = 2 * g**2 * 36 + 1 / g**2
    assert np.allclose(diff, np.diag(edges) + V.toarray())


def _chain_oracle(g, lam, L, bc):
    """Term-by-term dense construction over all field configurations."""
    basis = ChainBasis(L, lam)
    H = np.zeros((basis.dimension, basis.dimension))
    for i, cfg in enumerate(itertools.product(range(-lam, lam + 1), repeat=L)):
        e = g**2 * sum(n * n for n in cfg)
        if bc == "open":
            padded = (0, *cfg, 0)
            e += 0.5 * g**2 * sum((padded[k + 1] - padded[k]) ** 2 for k in range(L + 1))
        else:
            e += 0.5 * g**2 * sum((cfg[k] - cfg[(k + 1) % L]) ** 2 for k in range(L))
        H[i, i] = e + L / g**2
        for p in range(L):
            if cfg[p] < lam:
                up = list(cfg)
                up[p] += 1
                j = basis.index(up)
                H[i, j] = H[j, i] = -1 / (2 * g**2)
    return H


@pytest.mark.parametrize("g,lam,L,bc", [(1.0, 1, 2, "open"), (0.8, 1, 3, "open"), (0.7, 2, 2, "periodic")])
def test_chain_matches_oracle(g, lam, L, bc):
    assert np.allclose(build_u1_chain(g, lam, L, bc).toarray(), _chain_oracle(g, lam, L, bc))


def test_chain_diagonal_nonnegative_and_translation_invariant():
    H = build_u1_chain(0.9, 1, 3, "periodic").toarray().real
    assert np.all(np.diag(H) >= 0)
    basis = ChainBasis(3, 1)
    perm = [basis.index(np.roll(basis.config(i), 1)) for i in range(basis.dimension)]
    assert np.allclose(H[np.ix_(perm, perm)], H)


def test_schwinger_two_site_hand_values():
    g, m = 0.8, 0.1
    b = enumerate_schwinger(2, 1)
    H = build_schwinger(g, m, 1, 2, basis=b).toarray().real
    vac, pair = b.index((0, 1)), b.index((1, 0))
    assert H[vac, vac] == pytest.approx(0.0)
    assert H[pair, pair] == pytest.approx(2 * m + g**2 / 2)
    assert H[vac, pair] == pytest.approx(0.5)


def test_schwinger_hermitian_and_charge_conserving():
    b = enumerate_schwinger(8, 2)
    H = build_schwinger(0.8, 0.1, 2, 8, basis=b)
    A = H.toarray()
    assert np.max(np.abs(A - A.conj().T)) < 1e-14
    # every state lives in the neutral sector, so all couplings conserve charge
    assert set((b.occupations.sum(axis=1) - 4).tolist()) == {0}


def test_holstein_ladder_and_spectrum():
    a = ladder_raise(2)
    assert a[1, 0] == pytest.approx(1.0)
    assert a[2, 1] == pytest.approx(math.sqrt(2))
    H = build_hubbard_holstein(1e-300, 1.0, 3).toarray().real
    evals = np.sort(np.linalg.eigvalsh(H))
    expect = np.sort([n1 + n2 + s for n1 in range(4) for n2 in range(4) for s in (-0.5, 0.5)])
    assert np.allclose(evals, expect)


def test_holstein_coupling_structure():
    # hops move the fermion without touching bosons; phonon terms change one
    # boson number by one on the occupied site only
    H = build_hubbard_holstein(1.0, 1.0, 4).toarray().real
    tab = HolsteinBasis(4).table()
    for i, j in zip(*np.nonzero(np.triu(H, 1))):
        (s1, a1, b1), (s2, a2, b2) = tab[i], tab[j]
        if s1 != s2:
            assert (a1, b1) == (a2, b2) and H[i, j] == pytest.approx(0.5)
        else:
            moved = (a2 - a1, b2 - b1)
            assert moved == ((1, 0) if s1 == 0 else (0, 1))


def test_observables():
    b = LinkBasis(3)
    E2 = observable("E2_link", b)
    assert E2.diagonal()[b.index(3)] == pytest.approx(9)
    Pi = observable("projector_Pi", LinkBasis(2), lam_prime=2).diagonal().real
    assert np.allclose(Pi, [0, 0, 0, 0, 1])
    sym = observable("projector_Pi", LinkBasis(2), lam_prime=2, symmetric=True).diagonal().real
    assert np.allclose(sym, [1, 0, 0, 0, 1])
    sb = enumerate_schwinger(2, 1)
    chi = observable("chiral_condensate_density", sb).diagonal().real
    # (-1)^x f_x / N: vacuum (0,1) gives -1/2, pair state (1,0) gives +1/2
    assert chi[sb.index((0, 1))] == pytest.approx(-0.5)
    assert chi[sb.index((1, 0))] == pytest.approx(0.5)
    with pytest.raises(ValueError):
        observable("nope", b)


def test_sparse_operator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        SparseHermitianOperator(sp.csr_matrix(np.array([[0, 1], [0, 0]], dtype=complex)))


def test_spec_validation():
    with pytest.raises(ValueError):
        ModelSpec("u1_plaquette", -1.0, 2)
    with pytest.raises(ValueError):
        ModelSpec("bogus", 1.0, 2)
    with pytest.raises(ValueError):
        TruncationSpec(g=1.0, lam=2, lam0=3)
    assert ModelSpec("u1_chain", 1.0, 1, size=2).hamiltonian().dimension == 9


@settings(max_examples=20)
@given(st.integers(0, 3), st.integers(4, 6))
def test_embed_vector_round_trip(lam_small, lam_big):
    v = np.arange(2 * lam_small + 1, dtype=float) + 1
    big = embed(v, lam_small, lam_big)
    assert big.sum() == pytest.approx(v.sum())
    assert big[lam_big] == v[lam_small]
