"""Lindblad dynamics of one qubit coupled to a weak coherent cavity field.

The density matrix lives on ``{g, e} x [n1, n2]`` with row index
``a * width + j`` (``a = 0`` ground, ``a = 1`` excited, ``n = n1 + j``).  It
is evolved in the same rotating frame as :mod:`rabisim.qrm`; the
dissipators

    (gamma/2)(n_th+1) D[sigma_-] + (gamma/2) n_th D[sigma_+] + (gamma_phi/2) D[sigma_z]
    + (kappa/2)(n_c+1) D[a] + (kappa/2) n_c D[a^dag],

with ``D[L] rho = 2 L rho L^dag - L^dag L rho - rho L^dag L``, are unchanged
by that rotation.  The superoperator is applied matrix-free.  The cavity
anticommutators use the photon numbers ``n`` and ``n + 1`` of the full
space, and jumps leaving the window are dropped: weight reaching an edge is
lost from the trace instead of being reflected.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import (FockWindow, ModelParams, TimeSeries, build_window, edge_mass,
                   coherent_amplitudes, coherent_tail_mass, qubit_entropies)
from .errors import ParameterError
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, OdeProblem, integrate
from .qrm import OBSERVABLES, QrmObservables, check_leakage, operator_data

log = logging.getLogger(__name__)

MAX_MEAN_PHOTONS = 200.0
# edge probabilities stay near 1e-12, far below the 1e-8 leakage budget
MASTER_CUTOFF = 1e-6
POSITIVITY_CHECKS = 40


@dataclass(frozen=True)
class DensityState:
    """Joint density matrix on a Fock window (Hermitian, unit trace)."""

    window: FockWindow
    n_levels: int
    rho: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        d = self.n_levels * self.window.width
        if self.rho.shape != (d, d):
            raise ParameterError(f"density matrix has shape {self.rho.shape}, expected {(d, d)}")

    def trace(self) -> float:
        return float(np.trace(self.rho).real)

    def hermiticity_error(self) -> float:
        return float(np.max(np.abs(self.rho - self.rho.conj().T)))

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh(self.rho)[0])


def lindblad_rates(params: ModelParams) -> tuple[float, float, float, float, float]:
    """Jump rates ``(gamma_down, gamma_up, gamma_phi, kappa_down, kappa_up)`` passed to the kernel."""
    return (params.gamma * (params.n_th + 1.0), params.gamma * params.n_th, params.gamma_phi,
            params.kappa * (params.n_c + 1.0), params.kappa * params.n_c)


def initial_density(params: ModelParams, window: FockWindow | None = None,
                    cutoff: float = MASTER_CUTOFF) -> DensityState:
    """Projector on ``|g> x |alpha>`` (windowed and renormalized)."""
    if window is None:
        window = build_window(params.alpha, cutoff)
    psi = np.zeros(2 * window.width, dtype=complex)
    psi[:window.width] = coherent_amplitudes(params.alpha, window)
    return DensityState(window=window, n_levels=2, rho=np.outer(psi, psi.conj()))


def density_observables(rho: np.ndarray, params: ModelParams, window: FockWindow,
                        ref: np.ndarray, n0: float) -> QrmObservables:
    """Observables of a mixed joint state; the linear entropy of the field uses ``rho_f``."""
    w = window.width
    gg, ee, eg = rho[:w, :w], rho[w:, w:], rho[w:, :w]
    trace = float(np.trace(rho).real)
    dist = np.real(np.diagonal(gg) + np.diagonal(ee))
    n_mean = float(window.indices.astype(float) @ dist) / trace
    p_e = float(np.trace(ee).real) / trace
    rho_eg = complex(np.trace(eg)) / trace
    s_q, s_q_lin = qubit_entropies(p_e, rho_eg)
    rho_f = (gg + ee) / trace
    s_f_lin = 1.0 - float(np.sum(np.abs(rho_f) ** 2))
    survival = float(np.real(ref.conj() @ gg @ ref + ref.conj() @ ee @ ref)) / trace
    return QrmObservables(p_e=p_e, delta_n=n_mean - n0, n_mean=n_mean, s_q=s_q, s_q_linear=s_q_lin,
                          s_f_linear=s_f_lin, p_alpha_survival=survival, norm=trace,
                          leakage=edge_mass(dist, window), photon_dist=dist)


def evolve_master_qrm(params: ModelParams, sample_times: Sequence[float], window: FockWindow | None = None,
                      rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, cutoff: float = MASTER_CUTOFF,
                      keep_photon_dist: bool = False, backend: str | None = None) -> TimeSeries:
    """Integrate the Lindblad equation from ``|g><g| x |alpha><alpha|``.

    Only one qubit is supported.  The run is refused for ``alpha**2 > 200``
    since the density matrix grows with the square of the window.  The
    default window is built with amplitude cutoff ``1e-6``.

    Returns
    -------
    TimeSeries
        The columns of :func:`rabisim.qrm.evolve_qrm`, with ``norm`` holding
        the trace.  ``meta`` records the largest Hermiticity error and the
        smallest eigenvalue seen on a subsample of the output times.
    """
    if params.n_qubits != 1:
        raise ParameterError("the master-equation solver supports a single qubit only")
    if params.alpha ** 2 > MAX_MEAN_PHOTONS:
        raise ParameterError(
            f"alpha^2 = {params.alpha ** 2:g} exceeds the density-matrix cost guard of {MAX_MEAN_PHOTONS:g}")
    state = initial_density(params, window, cutoff)
    window = state.window
    times = np.asarray(sample_times, dtype=float).reshape(-1)
    if times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ParameterError("sample times must be a non-empty sorted sequence of non-negative times")

    ops = operator_data(params, window)
    kern = kernels.get(backend)
    sq, g, detuning, cr, omega = ops.sq, ops.g, ops.detuning, ops.cr, ops.omega
    rates = lindblad_rates(params)
    ref = coherent_amplitudes(params.alpha, window)
    n0 = float(window.indices.astype(float) @ (np.abs(ref) ** 2))
    check = params.g > 0 or params.kappa > 0
    every = max(1, times.size // POSITIVITY_CHECKS)
    health = {"max_hermiticity_error": 0.0, "min_eigenvalue": 1.0, "count": 0}

    buf = np.empty_like(state.rho)

    def rhs(t, rho):
        # the integrator copies the derivative out before the next call
        return kern.master_rhs(t, rho, sq, g, detuning, cr, omega, rates, out=buf)

    def observe(t, rho):
        obs = density_observables(rho, params, window, ref, n0)
        if check:
            check_leakage(obs.leakage, params, window, t)
        if health["count"] % every == 0:
            health["max_hermiticity_error"] = max(health["max_hermiticity_error"],
                                                  float(np.max(np.abs(rho - rho.conj().T))))
            health["min_eigenvalue"] = min(health["min_eigenvalue"], float(np.linalg.eigvalsh(rho)[0]))
        health["count"] += 1
        return obs

    rho0 = state.rho.copy()
    stats = None
    last = {"rho": rho0}
    if times[-1] == 0.0:
        records = [observe(0.0, rho0) for _ in times]
    else:
        def observe_keep(t, rho):
            last["rho"] = rho.copy()
            return observe(t, rho)

        problem = OdeProblem(rhs, rho0, 0.0, float(times[-1]), rtol=rtol, atol=atol,
                             dense_output_times=times, post_step=kern.hermitize)
        records, stats = integrate(problem, observer=observe_keep)

    columns = {name: np.array([getattr(r, name) for r in records]) for name in OBSERVABLES}
    meta = {
        "model": "qrm_master", "rtol": rtol, "atol": atol, "window": [window.n1, window.n2],
        "cutoff": cutoff, "discarded_mass": coherent_tail_mass(params.alpha, window),
        "backend": kern.BACKEND, "rates": list(rates),
        "max_trace_drift": float(np.max(np.abs(columns["norm"] - 1.0))),
        "max_leakage": float(np.max(columns["leakage"])),
        "max_hermiticity_error": health["max_hermiticity_error"],
        "min_eigenvalue": health["min_eigenvalue"],
    }
    log.info("qrm master run: window [%d, %d], %s", window.n1, window.n2, stats.as_dict() if stats else "no steps")
    return TimeSeries(
        t=times, columns=columns, meta=meta, stats=stats,
        photon_dist=np.array([r.photon_dist for r in records]) if keep_photon_dist else None,
        window=window,
        final_state=DensityState(window=window, n_levels=2, rho=last["rho"].copy(), t=float(times[-1])),
    )
