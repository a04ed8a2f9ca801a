import numpy as np
import pytest

from lgtrunc.models import ModelSpec, observable
from lgtrunc.propagate import expectation_series, initial_state
from lgtrunc.tebd import (
    MPSChain,
    TebdError,
    TebdProtocol,
    chain_terms,
    compile_gates,
    converge_bond_dimension,
    evolve_tebd,
    load_checkpoint,
    local_observable,
    local_terms,
    parity_basis,
    recanonicalize,
    run_tebd,
    save_checkpoint,
    schwinger_terms,
)


def _full_hamiltonian(terms):
    """Dense sum of local terms on a short open chain (oracle for the gate split)."""
    L, d = terms.num_sites, terms.d
    H = np.zeros((d**L, d**L), dtype=complex)
    for i, h in enumerate(terms.onsite):
        H += np.kron(np.kron(np.eye(d**i), h), np.eye(d ** (L - i - 1)))
    for b, h in enumerate(terms.bonds):
        H += np.kron(np.kron(np.eye(d**b), h), np.eye(d ** (L - b - 2)))
    return H


def test_parity_basis_is_orthogonal_and_diagonalises_reflection():
    W, par = parity_basis(3)
    assert np.allclose(W.T @ W, np.eye(7))
    R = np.fliplr(np.eye(7))  # E -> -E
    assert np.allclose(W.T @ R @ W, np.diag(1 - 2 * par))


def test_bond_hamiltonians_sum_to_chain():
    terms = chain_terms(0.8, 1, 3, parity=False)
    d = terms.d
    total = np.kron(terms.bond_hamiltonian(0), np.eye(d)) + np.kron(np.eye(d), terms.bond_hamiltonian(1))
    assert np.allclose(total, _full_hamiltonian(terms))


def test_chain_terms_match_sparse_model():
    terms = chain_terms(0.8, 1, 3, parity=False)
    H = ModelSpec("u1_chain", 0.8, 1, size=3).hamiltonian().toarray()
    assert np.allclose(_full_hamiltonian(terms), H)


def test_gates_tend_to_identity():
    terms = chain_terms(0.9, 2, 4)
    for layer in compile_gates(terms, 1e-9):
        for g in layer:
            assert np.max(np.abs(g.matrix - np.eye(len(g.matrix)))) < 1e-7
    with pytest.raises(ValueError):
        compile_gates(terms, 0.0)


def _exact_chain_E2(g, lam, L, T, dt, link):
    spec = ModelSpec("u1_chain", g, lam, size=L)
    op = observable("E2_link", spec.basis(), link=link)
    return expectation_series(spec.hamiltonian(), initial_state(spec), {"E2": op}, T, dt)["E2"]


def test_chain_matches_exact_evolution():
    g, lam, L, T = 0.8, 1, 3, 2.0
    ts = run_tebd("u1_chain", g, lam, T, size=L, chi=27, dt=0.005,
                  observables={"E2": ("E2", 1, None)})
    ref = _exact_chain_E2(g, lam, L, T, 0.005, 1)
    assert np.max(np.abs(ts["E2"] - ref)) < 1e-4


def test_trotter_error_is_second_order():
    g, lam, L, T = 0.8, 1, 3, 1.0
    ref = _exact_chain_E2(g, lam, L, T, 0.1, 1)[-1]
    errs = []
    for dt in (0.1, 0.05):
        ts = run_tebd("u1_chain", g, lam, T, size=L, chi=27, dt=dt, observables={"E2": ("E2", 1, None)})
        errs.append(abs(ts["E2"][-1] - ref))
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_schwinger_matches_exact_evolution():
    g, m, lam, N, T = 0.8, 0.1, 1, 4, 1.5
    spec = ModelSpec("schwinger", g, lam, m=m, size=N)
    b = spec.basis()
    ref = expectation_series(spec.hamiltonian(), initial_state(spec),
                             {"E2": observable("E2_link", b, link=1),
                              "chiral": observable("chiral_condensate_density", b)}, T, 0.01)
    ts = run_tebd("schwinger", g, lam, T, m=m, size=N, chi=64, dt=0.01,
                  observables={"E2": ("E2", 1, None), **{f"c{x}": ("chiral", x, None) for x in range(N)}})
    assert np.max(np.abs(ts["E2"] - ref["E2"])) < 1e-4
    chiral = sum(ts[f"c{x}"] for x in range(N)) / N
    assert np.max(np.abs(chiral - ref["chiral"])) < 1e-4


def test_schwinger_hop_conserves_charge():
    terms = schwinger_terms(0.7, 0.2, 1, 2)
    qi, qj = terms.charges[0], terms.charges[1]
    total = (qi[:, None] + qj[None, :]).ravel()
    hop = terms.bonds[0]
    rows, cols = np.nonzero(np.abs(hop) > 0)
    assert len(rows) > 0
    assert np.all(total[rows] == total[cols])


def test_vacuum_observables_at_start():
    ts = run_tebd("u1_chain", 1.0, 3, 0.1, size=6, chi=10, dt=0.05)
    assert ts["E2"][0] == 0.0
    assert all(ts[f"Pi_{k}"][0] == 0.0 for k in (1, 2, 3))
    terms = chain_terms(1.0, 2, 4)
    mps = MPSChain.product(terms)
    centre = local_observable(terms, "Pi", 2, 0)
    assert mps.site_probabilities(2) @ centre == pytest.approx(1.0)


def test_strong_coupling_vacuum_barely_moves():
    ts = run_tebd("u1_chain", 6.0, 2, 1.0, size=6, chi=20, dt=0.01)
    assert np.max(ts["E2"]) < 1e-5


def test_infinite_chain_is_translation_symmetric_and_stays_canonical():
    ts = run_tebd("u1_chain", 0.9, 2, 1.0, chi=30, dt=0.02,
                  observables={"a": ("E2", 0, None), "b": ("E2", 1, None)})
    assert np.max(np.abs(ts["a"] - ts["b"])) < 1e-10
    terms = local_terms("u1_chain", 0.9, 2)
    mps = MPSChain.product(terms)
    evolve_tebd(mps, compile_gates(terms, 0.02), TebdProtocol(T=0.6, dt=0.02, chi=30), {})
    assert mps.canonical_error() < 1e-9
    assert mps.norm_error() < 1e-12


def test_finite_centre_matches_infinite_inside_light_cone():
    obs_inf = {"E2": ("E2", 0, None)}
    inf = run_tebd("u1_chain", 0.8, 1, 1.0, chi=40, dt=0.01, observables=obs_inf)
    fin = run_tebd("u1_chain", 0.8, 1, 1.0, size=12, chi=40, dt=0.01,
                   observables={"E2": ("E2", 6, None)})
    assert np.max(np.abs(fin["E2"] - inf["E2"])) < 1e-10


def test_recanonicalize_preserves_observables():
    terms = chain_terms(0.8, 2, 6)
    mps = MPSChain.product(terms)
    evolve_tebd(mps, compile_gates(terms, 0.05), TebdProtocol(T=1.0, dt=0.05, chi=16), {})
    op = local_observable(terms, "E2", 3)
    before = mps.site_probabilities(3) @ op
    recanonicalize(mps)
    assert mps.canonical_error() < 1e-10
    assert mps.site_probabilities(3) @ op == pytest.approx(before, abs=1e-10)


def test_checkpoint_round_trip(tmp_path):
    path = str(tmp_path / "state.npz")
    run_tebd("schwinger", 0.8, 1, 0.2, m=0.1, size=4, chi=8, dt=0.05, checkpoint=path)
    mps, extra = load_checkpoint(path)
    assert extra["t"] == pytest.approx(0.2)
    save_checkpoint(str(tmp_path / "again.npz"), mps)
    again, _ = load_checkpoint(str(tmp_path / "again.npz"))
    for a, b in zip(mps.B, again.B):
        assert np.array_equal(a, b)
    assert [list(q) for q in mps.charges] == [list(q) for q in again.charges]


def test_reserved_column_names_rejected():
    terms = chain_terms(1.0, 1, 4)
    with pytest.raises(ValueError):
        evolve_tebd(MPSChain.product(terms), compile_gates(terms, 0.1), TebdProtocol(T=0.1, dt=0.1),
                    {"discarded": (0, local_observable(terms, "E2", 0))})


def test_protocol_validation_and_staging():
    with pytest.raises(ValueError):
        TebdProtocol(T=1.0, dt=0.0)
    with pytest.raises(ValueError):
        TebdProtocol(T=1.0, stage_time=0.5)
    p = TebdProtocol(T=2.0, chi=40, stage_time=1.0, stage_chi=10)
    assert p.chi_at(0.5) == 10 and p.chi_at(1.0) == 40
    with pytest.raises(ValueError):
        run_tebd("u1_chain", 1.0, 1, 0.25, size=4, dt=0.1)


def test_convergence_protocol_grows_chi():
    seen = []

    def fake(chi):
        seen.append(chi)
        from lgtrunc.propagate import TimeSeries
        return TimeSeries(np.array([0.0, 1.0]), {"x": np.array([0.0, 1.0 / chi**3])})

    res = converge_bond_dimension(fake, TebdProtocol(T=1.0, chi=2, chi_step=2, chi_max=40,
                                                     tolerance_factor=1.0), ["x"], 1e-3)
    assert res.converged
    assert seen == list(range(2, res.chi + 1, 2))
    # stop at chi_max without agreement
    res = converge_bond_dimension(fake, TebdProtocol(T=1.0, chi=2, chi_step=2, chi_max=6,
                                                     tolerance_factor=1.0), ["x"], 1e-9)
    assert not res.converged and res.gap > 1


def test_unknown_model_and_observable():
    with pytest.raises(ValueError):
        local_terms("hubbard", 1.0, 1)
    with pytest.raises(ValueError):
        local_observable(chain_terms(1.0, 1, 2), "chiral", 0)
    assert issubclass(TebdError, RuntimeError)
