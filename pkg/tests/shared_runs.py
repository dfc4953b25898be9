"""Expensive trajectories shared by the acceptance and module tests (computed once per session)."""
import math
from functools import lru_cache

import numpy as np

from rabisim import srm
from rabisim.core import ModelParams, QubitAmplitudes
from rabisim.qrm import default_sample_times, evolve_qrm
from rabisim.qrm_master import evolve_master_qrm

# g alpha / omega = pi / 100 throughout, i.e. omega T_pi = 50
T_PI = 50.0
LOOSE = {"rtol": 1e-8, "atol": 1e-10}


def qrm_params(alpha2: float, n_qubits: int = 1, **rates) -> ModelParams:
    return ModelParams.from_pi_pulse(T_PI, alpha=math.sqrt(alpha2), n_qubits=n_qubits, **rates)


@lru_cache(maxsize=None)
def srm_tiers(omega_t_pi: float, horizon: float = 2000.0, step: float = 0.25, loose: bool = False):
    """All four semiclassical tiers from |g> on a uniform grid."""
    params = ModelParams.from_pi_pulse(omega_t_pi)
    qubit = QubitAmplitudes.ground()
    t = np.arange(0.0, horizon + 0.5 * step, step)
    tol = LOOSE if loose else {}
    return {
        "t": t,
        "params": params,
        "exact": srm.evolve_exact(qubit, params, t, **tol)["p_e"],
        "semianalytic": srm.evolve_semianalytic(qubit, params, t, **tol)["p_e"],
        "intermediate": srm.evolve_intermediate(qubit, params, t)["p_e"],
        "rwa": srm.evolve_rwa(qubit, params, t)["p_e"],
    }


@lru_cache(maxsize=None)
def correspondence_run(loose: bool = False):
    """alpha^2 = 5000 quantum run and the matching semiclassical run for t <= 5 T_pi."""
    params = qrm_params(5000)
    times = default_sample_times(params, 5 * params.t_pi)
    quantum = evolve_qrm(params, times, keep_photon_dist=False, **(LOOSE if loose else {}))
    classical = srm.evolve_exact(QubitAmplitudes.ground(), params, times)
    return params, quantum, classical


@lru_cache(maxsize=None)
def collapse_run(alpha2: float, n_qubits: int = 1, loose: bool = False):
    """Desk-scale collapse run; the grid contains every multiple of T_pi."""
    params = qrm_params(alpha2, n_qubits)
    horizon = 150.0 * math.sqrt(alpha2)  # about 2.6x the collapse time
    times = default_sample_times(params, horizon)
    return params, evolve_qrm(params, times, **(LOOSE if loose else {}))


@lru_cache(maxsize=None)
def revival_run(horizon: float = 2.0e4, loose: bool = False):
    params = qrm_params(50)
    times = default_sample_times(params, horizon, samples_per_pi_pulse=16)
    return params, evolve_qrm(params, times, keep_photon_dist=False, **(LOOSE if loose else {}))


REVIVAL_SPAN = (8.5e3, 1.15e4)
DISSIPATION = {
    "weak": {"gamma": 1e-5, "gamma_phi": 1e-5, "kappa": 1e-6, "n_th": 0.05, "n_c": 0.05},
    "strong": {"gamma": 1e-4, "gamma_phi": 1e-4, "kappa": 1e-5, "n_th": 0.05, "n_c": 0.05},
}


@lru_cache(maxsize=None)
def dissipative_revival_run(strength: str):
    """Master-equation run at alpha^2 = 50 up to the end of the first revival.

    rtol = 1e-8 keeps each run near ten minutes; the unitary limit agrees
    with the wavefunction solver to a few 1e-9 at this tolerance.
    """
    params = qrm_params(50, **DISSIPATION[strength])
    times = default_sample_times(params, REVIVAL_SPAN[1])
    return params, evolve_master_qrm(params, times, **LOOSE)


def product_basis_pe(params: ModelParams, window, times):
    """Oracle for the Dicke ladder: N qubits in the full 2^N product basis, dense kron operators.

    Same double rotating frame, integrated with scipy's DOP853.  Returns the
    excitation probability of the first qubit at ``times``.
    """
    from scipy import sparse
    from scipy.integrate import solve_ivp

    from rabisim.core import coherent_amplitudes

    n_q, w = params.n_qubits, window.width
    n = window.indices.astype(float)
    a = sparse.diags(np.sqrt(n[1:]), 1, shape=(w, w))  # a |n> = sqrt(n) |n-1>, inside the window
    ad = a.T.conj()
    sp = sparse.csr_matrix(np.array([[0.0, 0.0], [1.0, 0.0]]))  # basis (g, e): sigma_+ |g> = |e>
    sz = sparse.diags([-1.0, 1.0])
    eye2 = sparse.identity(2)

    def on_qubit(op, k):
        mats = [eye2] * n_q
        mats[k] = op
        out = mats[0]
        for m in mats[1:]:
            out = sparse.kron(out, m)
        return sparse.csr_matrix(out)

    Sp = sum(on_qubit(sp, k) for k in range(n_q))
    Sm = Sp.T.conj()
    Sz = sum(on_qubit(sz, k) for k in range(n_q))
    eye_f = sparse.identity(w)
    h0 = (-0.5 * params.Delta * sparse.kron(Sz, eye_f)
          + params.g * (sparse.kron(Sp, a) + sparse.kron(Sm, ad)))
    h_plus = params.g * sparse.kron(Sp, ad)  # multiplies e^{2 i omega t}
    h_minus = params.g * sparse.kron(Sm, a)
    h0, h_plus, h_minus = (sparse.csr_matrix(m) for m in (h0, h_plus, h_minus))

    def rhs(t, psi):
        ph = np.exp(2j * params.omega * t)
        return -1j * (h0 @ psi + ph * (h_plus @ psi) + ph.conjugate() * (h_minus @ psi))

    psi0 = np.zeros(2 ** n_q * w, dtype=complex)
    psi0[:w] = coherent_amplitudes(params.alpha, window)
    sol = solve_ivp(rhs, (0.0, float(times[-1])), psi0, method="DOP853", t_eval=times, rtol=1e-12, atol=1e-14)
    amps = sol.y.T.reshape(len(times), 2 ** n_q, w)
    first_excited = [s for s in range(2 ** n_q) if s >> (n_q - 1) & 1]
    return (np.abs(amps[:, first_excited, :]) ** 2).sum(axis=(1, 2))


@lru_cache(maxsize=None)
def dicke_vs_product():
    params = qrm_params(50, n_qubits=2)
    times = default_sample_times(params, 500.0)
    series = evolve_qrm(params, times, keep_photon_dist=False)
    return series["p_e"], product_basis_pe(params, series.window, times)
