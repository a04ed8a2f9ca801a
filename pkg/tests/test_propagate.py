import json

import numpy as np
import pytest
import scipy.linalg as sla
import scipy.sparse as sp

from lgtrunc.models import ModelSpec, SparseHermitianOperator, observable, u1_plaquette_hamiltonian
from lgtrunc.propagate import (
    DensePropagator,
    KrylovConvergenceError,
    KrylovPropagator,
    TimeSeries,
    eigenstate_scaling_scan,
    evolve,
    expectation_series,
    initial_state,
    max_over_time,
    time_grid,
    truncation_error_series,
)


def test_time_grid():
    t = time_grid(1.0, 0.25)
    assert np.allclose(t, [0, 0.25, 0.5, 0.75, 1.0])
    with pytest.raises(ValueError):
        time_grid(1.0, 0.0)


def test_diagonal_hamiltonian_only_rotates_phases():
    H = SparseHermitianOperator(sp.diags([0.0, 1.0, 3.0]).astype(complex))
    psi0 = np.array([0.6, 0.0, 0.8], dtype=complex)
    for method in ("dense", "krylov"):
        out = evolve(H, psi0, [0.0, 0.7, 2.0], method)
        assert np.allclose(np.abs(out), np.abs(psi0)[None, :], atol=1e-12)


def test_krylov_matches_dense():
    H = u1_plaquette_hamiltonian(0.5, 2)
    psi0 = np.zeros(5, complex)
    psi0[2] = 1
    dense = evolve(H, psi0, [1.0], "dense")[0]
    kry = evolve(H, psi0, [1.0], "krylov")[0]
    assert np.max(np.abs(dense - kry)) < 1e-10
    exact = sla.expm(-1j * H.toarray()) @ psi0
    assert np.max(np.abs(dense - exact)) < 1e-12


def test_reversibility():
    H = u1_plaquette_hamiltonian(0.7, 6)
    rng = np.random.default_rng(3)
    psi0 = rng.normal(size=13) + 1j * rng.normal(size=13)
    psi0 /= np.linalg.norm(psi0)
    fwd = KrylovPropagator(H).step(psi0, 2.5)
    back = KrylovPropagator(H * -1.0).step(fwd, 2.5)
    assert np.max(np.abs(back - psi0)) < 1e-9


def test_krylov_reports_failure():
    H = u1_plaquette_hamiltonian(0.1, 30)
    psi0 = np.zeros(61, complex)
    psi0[30] = 1
    with pytest.raises(KrylovConvergenceError):
        KrylovPropagator(H, m_max=2, max_substeps=1).step(psi0, 50.0)


def test_dense_trajectory_shapes():
    H = u1_plaquette_hamiltonian(1.0, 1)
    states = list(DensePropagator(H).trajectory(np.array([0, 1, 0], complex), np.array([0.0, 0.5])))
    assert len(states) == 2 and np.allclose(states[0], [0, 1, 0])


def test_vacuum_observables_at_t0():
    spec = ModelSpec("u1_plaquette", 0.5, 4)
    b = spec.basis()
    ts = expectation_series(spec.hamiltonian(), initial_state(spec),
                            {"Pi0": observable("projector_Pi", b, lam_prime=0), "E2": observable("E2_link", b)}, 0.1)
    assert ts["Pi0"][0] == pytest.approx(1.0)
    ts2 = expectation_series(spec.hamiltonian(), initial_state(spec, 2), {"E2": observable("E2_link", b)}, 0.1)
    assert ts2["E2"][0] == pytest.approx(4.0)


def test_probability_conservation():
    spec = ModelSpec("schwinger", 0.8, 2, m=0.1, size=6)
    H = spec.hamiltonian()
    for psi in evolve(H, initial_state(spec), np.linspace(0, 3, 7), "krylov"):
        assert np.linalg.norm(psi) == pytest.approx(1.0, abs=1e-12)


def test_truncation_error_zero_at_equal_cut():
    spec = ModelSpec("u1_plaquette", 0.5, 5)
    ts = truncation_error_series(spec, 5, 5, "E2_link", 2.0)
    assert np.all(ts["error"] == 0)


def test_truncation_error_below_plaquette_bound():
    from lgtrunc.bounds import one_plaquette_E2_bound

    spec = ModelSpec("u1_plaquette", 0.5, 20)
    ts = truncation_error_series(spec, 20, 5, "E2_link", 30.0)
    assert ts["error"].max() <= float(one_plaquette_E2_bound(0.5, 5, 4, 30.0))


def test_truncation_error_chain_below_bound():
    from lgtrunc.bounds import chain_E2_bound

    spec = ModelSpec("u1_chain", 0.8, 5, size=3)
    ts = truncation_error_series(spec, 5, 2, {"tag": "E2_link", "link": 1}, 8.0)
    assert ts["error"].max() <= float(chain_E2_bound(0.8, 2, 1, 8.0))


def test_eigenvalues_settle():
    rows = eigenstate_scaling_scan(0.5, range(3, 11), dps=40)
    diffs = [r["difference"] for r in rows]
    assert all(a > b for a, b in zip(diffs, diffs[1:]))
    E12 = eigenstate_scaling_scan(0.5, [12], dps=40)[0]["energy"]
    E20 = eigenstate_scaling_scan(0.5, [20], dps=40)[0]["energy"]
    assert abs(E12 - E20) < 1e-12


def test_eigenscan_float_path_agrees():
    hi = eigenstate_scaling_scan(0.8, [3, 4], dps=30)
    lo = eigenstate_scaling_scan(0.8, [3, 4], dps=None)
    assert hi[0]["energy"] == pytest.approx(lo[0]["energy"], rel=1e-12)


def test_time_series_round_trip(tmp_path):
    ts = TimeSeries(np.array([0.0, 0.5]), {"a": np.array([1.0, 1 / 3])}, {"g": 0.5})
    ts.to_json(tmp_path / "a.json")
    back = TimeSeries.from_json(tmp_path / "a.json")
    assert np.array_equal(back["a"], ts["a"]) and back.metadata == {"g": 0.5}
    ts.to_csv(tmp_path / "a.csv")
    assert (tmp_path / "a.csv").read_text().splitlines()[2] == "0.5,0.33333333333333331"
    json.loads((tmp_path / "a.json").read_text())
    with pytest.raises(ValueError):
        TimeSeries(np.array([0.0, 0.0]), {})
    assert max_over_time((np.array([0, 1, 2]), np.array([1, 5, 2]))) == (1.0, 5.0)
