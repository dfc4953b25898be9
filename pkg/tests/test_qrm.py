import math

import numpy as np
import pytest

import oracles
import shared_runs as runs
from rabisim import kernels
from rabisim.core import FockWindow, JointState, ModelParams, build_window, initial_joint_state
from rabisim.errors import ParameterError, StateIntegrityError, WindowOverflowError
from rabisim.qrm import (apply_hamiltonian, default_sample_times, entanglement_entropies, evolve_qrm,
                         excitation_probability, field_observables, observables, reduced_qubit_matrix,
                         single_qubit_reduction)


def dense_hamiltonian(params, window, t):
    """Oracle: frame Hamiltonian from explicit collective spin and ladder matrices."""
    N = params.n_qubits
    k = np.arange(N + 1)
    jp = np.diag(np.sqrt((k[:-1] + 1) * (N - k[:-1])), -1)  # J_+ |k> = sqrt((k+1)(N-k)) |k+1>
    jm = jp.T
    jz = np.diag(k - N / 2)
    n = window.indices.astype(float)
    a = np.diag(np.sqrt(n[1:]), 1)
    ad = a.T
    ph = np.exp(2j * params.omega * t)
    g = params.g
    return (-params.Delta * np.kron(jz, np.eye(window.width))
            + g * (np.kron(jp, a) + np.kron(jm, ad))
            + params.delta_flag * g * (np.kron(jm, a) / ph + np.kron(jp, ad) * ph))


def random_state(rng, levels, window):
    v = rng.normal(size=(levels, window.width)) + 1j * rng.normal(size=(levels, window.width))
    return JointState(window=window, n_levels=levels, amplitudes=v / np.linalg.norm(v))


@pytest.mark.parametrize("n_qubits", [1, 2, 3])
@pytest.mark.parametrize("backend", ["python", "compiled"])
def test_hamiltonian_matches_dense(n_qubits, backend):
    if backend == "compiled" and kernels.compiled is None:
        pytest.skip("extension not built")
    params = ModelParams(g=0.013, alpha=3.0, n_qubits=n_qubits, Delta=0.004)
    window = FockWindow(5, 14)  # width 10
    rng = np.random.default_rng(n_qubits)
    for t in (0.0, 0.37, 12.5):
        state = random_state(rng, n_qubits + 1, window)
        expected = (-1j * dense_hamiltonian(params, window, t) @ state.amplitudes.reshape(-1))
        got = apply_hamiltonian(state, params, t, backend=backend).reshape(-1)
        np.testing.assert_allclose(got, expected, atol=1e-15)


def test_matrix_elements_single_qubit():
    params = ModelParams(g=0.02, alpha=3.0)
    window = FockWindow(0, 9)
    t = 0.8
    n = 4
    amps = np.zeros((2, 10), dtype=complex)
    amps[0, n] = 1.0
    h_psi = 1j * apply_hamiltonian(JointState(window, 2, amps), params, t)
    assert h_psi[1, n - 1] == pytest.approx(params.g * math.sqrt(n), abs=1e-16)
    assert h_psi[1, n + 1] == pytest.approx(params.g * math.sqrt(n + 1) * np.exp(2j * t), abs=1e-16)
    assert np.count_nonzero(np.abs(h_psi) > 0) == 2


def test_free_frame_is_static():
    params = ModelParams(g=0.0, alpha=3.0)
    state = initial_joint_state(params)
    assert np.all(apply_hamiltonian(state, params, 3.3) == 0)


def test_expectation_real():
    rng = np.random.default_rng(9)
    params = ModelParams(g=0.05, alpha=4.0, n_qubits=2, Delta=0.01)
    window = build_window(4.0, 1e-6)
    for _ in range(100):
        state = random_state(rng, 3, window)
        # <psi|H|psi> = i <psi|(-iH psi)>
        value = 1j * np.vdot(state.amplitudes, apply_hamiltonian(state, params, rng.uniform(0, 10)))
        assert abs(value.imag) < 1e-14


def test_level_mismatch():
    state = initial_joint_state(ModelParams(g=0.01, alpha=2.0))
    with pytest.raises(ParameterError):
        apply_hamiltonian(state, ModelParams(g=0.01, alpha=2.0, n_qubits=2), 0.0)


# ---- observables -------------------------------------------------------------

def test_excitation_probability_examples():
    window = FockWindow(0, 3)
    assert excitation_probability(initial_joint_state(ModelParams(g=0.01, alpha=1.0))) == 0.0
    top = np.zeros((4, 4), dtype=complex)
    top[3, 1] = 1.0
    assert excitation_probability(JointState(window, 4, top)) == 1.0
    uniform = np.zeros((3, 4), dtype=complex)
    uniform[:, 2] = 1 / math.sqrt(3)
    assert excitation_probability(JointState(window, 3, uniform)) == pytest.approx(0.5, abs=1e-15)


def test_field_observables_initial():
    params = ModelParams(g=0.01, alpha=math.sqrt(50))
    delta_n, dist, survival = field_observables(initial_joint_state(params), params)
    assert delta_n == pytest.approx(0.0, abs=1e-12)
    assert dist.sum() == pytest.approx(1.0, abs=1e-14)
    assert survival == pytest.approx(1.0, abs=1e-14)


@pytest.mark.parametrize("m", [0, 3, 7])
def test_survival_of_fock_state(m):
    alpha = 2.0
    params = ModelParams(g=0.01, alpha=alpha)
    window = build_window(alpha, 1e-12)
    amps = np.zeros((2, window.width), dtype=complex)
    amps[0, m - window.n1] = 1.0
    survival = field_observables(JointState(window, 2, amps), params)[2]
    expected = math.exp(-alpha ** 2) * alpha ** (2 * m) / math.factorial(m)
    assert survival == pytest.approx(expected, rel=1e-12)


def test_entropies_product_state():
    s = initial_joint_state(ModelParams(g=0.01, alpha=3.0))
    assert entanglement_entropies(s) == pytest.approx((0.0, 0.0, 0.0), abs=1e-15)


def test_entropies_maximal():
    window = FockWindow(0, 9)
    amps = np.zeros((2, 10), dtype=complex)
    amps[0, 2] = amps[1, 7] = 1 / math.sqrt(2)
    s_q, s_ql, s_fl = entanglement_entropies(JointState(window, 2, amps))
    assert s_q == pytest.approx(oracles.LN2, abs=1e-15)
    assert s_ql == pytest.approx(oracles.MAX_LINEAR_ENTROPY, abs=1e-15)
    assert s_fl == pytest.approx(oracles.MAX_LINEAR_ENTROPY, abs=1e-15)


def test_schmidt_identity_random_states():
    rng = np.random.default_rng(4)
    window = FockWindow(10, 40)
    for _ in range(50):
        s = random_state(rng, 2, window)
        _, s_ql, s_fl = entanglement_entropies(s)
        assert abs(s_ql - s_fl) < 1e-10
        # field side computed independently from rho_f
        psi = s.amplitudes
        rho_f = psi.T @ psi.conj()
        assert s_fl == pytest.approx(1 - np.sum(np.abs(rho_f) ** 2), abs=1e-12)


def test_entropy_integrity():
    window = FockWindow(0, 3)
    amps = np.zeros((2, 4), dtype=complex)
    amps[0, 0] = 1.001
    with pytest.raises(StateIntegrityError):
        entanglement_entropies(JointState(window, 2, amps))


def symmetric_to_product(psi_dicke):
    """Embed a two-qubit Dicke-ladder state in the product basis (g, e) x (g, e) x field."""
    w = psi_dicke.shape[1]
    out = np.zeros((4, w), dtype=complex)
    out[0] = psi_dicke[0]  # |gg>
    out[1] = out[2] = psi_dicke[1] / math.sqrt(2)  # (|ge> + |eg>)/sqrt 2
    out[3] = psi_dicke[2]  # |ee>
    return out


def test_single_qubit_reduction_against_partial_trace():
    rng = np.random.default_rng(8)
    window = FockWindow(0, 5)
    for _ in range(20):
        s = random_state(rng, 3, window)
        prod = symmetric_to_product(s.amplitudes).reshape(2, 2, window.width)
        # trace out the second qubit and the field
        rho1 = np.einsum("ajn,bjn->ab", prod, prod.conj())
        rho_ee, rho_eg = single_qubit_reduction(reduced_qubit_matrix(s))
        assert rho_ee == pytest.approx(rho1[1, 1].real, abs=1e-14)
        assert rho_eg == pytest.approx(rho1[1, 0], abs=1e-14)
        assert excitation_probability(s) == pytest.approx(rho1[1, 1].real, abs=1e-14)


def test_observables_normalize_the_state():
    params = ModelParams(g=0.01, alpha=3.0)
    s = initial_joint_state(params)
    obs = observables(s.amplitudes * math.sqrt(1 + 1e-7), params, s.window)
    assert obs.norm == pytest.approx(1 + 1e-7, abs=1e-15)
    assert obs.delta_n == pytest.approx(0.0, abs=1e-12)


# ---- evolution --------------------------------------------------------------

def test_no_coupling_is_trivial():
    params = ModelParams(g=0.0, alpha=math.sqrt(50))
    series = evolve_qrm(params, np.linspace(0, 500, 11))
    assert np.all(series["p_e"] == 0)
    np.testing.assert_allclose(series["delta_n"], 0, atol=1e-12)
    np.testing.assert_allclose(series["s_q"], 0, atol=1e-15)
    np.testing.assert_allclose(series["p_alpha_survival"], 1, atol=1e-12)


def test_small_alpha_run_invariants():
    params = runs.qrm_params(50, n_qubits=2)
    times = default_sample_times(params, 500.0)
    series = evolve_qrm(params, times)
    assert series.meta["max_norm_drift"] < 1e-8
    assert series.meta["max_leakage"] < 1e-8
    np.testing.assert_allclose(series.photon_dist.sum(axis=1), 1.0, atol=1e-9)
    for name, lo, hi in (("p_e", 0, 1), ("s_q", 0, math.log(2) + 1e-12), ("s_f_linear", 0, 1),
                         ("p_alpha_survival", 0, 1 + 1e-12)):
        assert series[name].min() >= lo - 1e-12 and series[name].max() <= hi
    assert isinstance(series.final_state.amplitudes, np.ndarray)
    assert np.array_equal(series.t, times)


def test_dicke_ladder_matches_product_basis():
    dicke, product = runs.dicke_vs_product()
    assert np.max(np.abs(dicke - product)) < 1e-9


def test_backends_agree():
    if kernels.compiled is None:
        pytest.skip("extension not built")
    params = runs.qrm_params(50)
    times = np.linspace(0, 300, 13)
    a = evolve_qrm(params, times, backend="python")
    b = evolve_qrm(params, times, backend="compiled")
    assert a.meta["backend"] == "python" and b.meta["backend"] == "compiled"
    np.testing.assert_allclose(a["p_e"], b["p_e"], atol=1e-12)


def test_window_overflow():
    params = runs.qrm_params(50)
    narrow = FockWindow(40, 60)
    with pytest.raises(WindowOverflowError) as info:
        evolve_qrm(params, np.linspace(0, 500, 11), window=narrow)
    wider = info.value.suggested
    assert wider.n1 < narrow.n1 and wider.n2 > narrow.n2


def test_default_sample_times():
    params = runs.qrm_params(100)
    t = default_sample_times(params, 200.0, extra=[33.0, 500.0])
    assert t[0] == 0.0 and t[-1] == 200.0
    assert 33.0 in t and 500.0 not in t
    assert np.all(np.diff(t) > 0)
    assert np.isclose(np.diff(t), params.t_pi / 8).sum() >= 30
    with pytest.raises(ParameterError):
        default_sample_times(params, 0.0)
