"""Unitary quantum Rabi model with a coherent cavity field and 1-3 identical qubits.

The state is evolved in the frame rotating at ``omega`` for both the field
and the qubits, ``U = exp(-i omega t (n + J_z))``, where the generator is

    H(t) = -Delta J_z + g (a J_+ + a^dag J_-)
           + delta g (a J_- e^{-2i omega t} + a^dag J_+ e^{2i omega t})

with ``J_z``, ``J_+`` the collective operators restricted to the symmetric
(Dicke) ladder.  Populations, entropies and the photon distribution are the
same in this frame as in the laboratory frame; the freely evolving coherent
state ``|alpha e^{-i omega t}>`` becomes the fixed ``|alpha>``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import kernels
from .core import (DEFAULT_CUTOFF, FockWindow, JointState, ModelParams, TimeSeries, boundary_leakage,
                   build_window, coherent_amplitudes, initial_joint_state, qubit_entropies)
from .errors import ParameterError, StateIntegrityError, WindowOverflowError
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, OdeProblem, integrate

log = logging.getLogger(__name__)

LEAKAGE_LIMIT = 1e-6
NORM_TOLERANCE = 1e-6
OBSERVABLES = ("p_e", "delta_n", "n_mean", "s_q", "s_q_linear", "s_f_linear", "p_alpha_survival",
               "norm", "leakage")


@dataclass(frozen=True)
class OperatorData:
    """Arrays describing the banded generator on one Fock window."""

    sq: np.ndarray      # sqrt(n) for n in the window
    ladder: np.ndarray  # <k+1|J_+|k>
    jz: np.ndarray
    g: float
    detuning: float
    cr: float
    omega: float

    def args(self):
        return (self.sq, self.ladder, self.jz, self.g, self.detuning, self.cr, self.omega)


def dicke_ladder(n_qubits: int) -> tuple[np.ndarray, np.ndarray]:
    """Collective raising elements ``sqrt((k+1)(N-k))`` and ``J_z = k - N/2``."""
    k = np.arange(n_qubits + 1, dtype=float)
    ladder = np.sqrt((k[:-1] + 1.0) * (n_qubits - k[:-1]))
    return ladder, k - 0.5 * n_qubits


def operator_data(params: ModelParams, window: FockWindow) -> OperatorData:
    if params.g is None:
        raise ParameterError("the quantum model needs the one-photon coupling g (or G with alpha > 0)")
    ladder, jz = dicke_ladder(params.n_qubits)
    return OperatorData(sq=np.sqrt(window.indices.astype(float)), ladder=ladder, jz=jz,
                        g=float(params.g), detuning=float(params.Delta), cr=float(params.delta_flag),
                        omega=float(params.omega))


def apply_hamiltonian(state: JointState, params: ModelParams, t: float, backend: str | None = None) -> np.ndarray:
    """Return ``-i H(t) psi`` as an ``(n_levels, width)`` array.

    Only neighbouring Fock indices are coupled, so the cost is linear in the
    window width.
    """
    if state.n_levels != params.n_levels:
        raise ParameterError(f"state has {state.n_levels} qubit levels, parameters imply {params.n_levels}")
    ops = operator_data(params, state.window)
    psi = np.ascontiguousarray(state.amplitudes)[:, :, None]
    return kernels.get(backend).apply_h(float(t), psi, *ops.args())[:, :, 0]


def _amplitudes(state) -> np.ndarray:
    return state.amplitudes if isinstance(state, JointState) else np.asarray(state)


def excitation_probability(state) -> float:
    """Excitation probability of any one qubit, ``sum_k (k/N) P(level k)``."""
    amps = _amplitudes(state)
    n_qubits = amps.shape[0] - 1
    level_pop = (np.abs(amps) ** 2).sum(axis=1)
    return float(level_pop @ (np.arange(n_qubits + 1) / n_qubits))


def _reference_field(params: ModelParams, window: FockWindow):
    ref = coherent_amplitudes(params.alpha, window)
    n = window.indices.astype(float)
    return ref, float(n @ (np.abs(ref) ** 2))


def field_observables(state, params: ModelParams, window: FockWindow | None = None, _reference=None):
    """Photon-number change, distribution and coherent-state survival.

    Returns
    -------
    delta_n : float
        ``<n>(t) - <n>(0)`` with the initial value taken from the windowed
        coherent state.
    photon_dist : ndarray
        ``p_n`` over the window.
    p_alpha_survival : float
        ``sum_k |<alpha|psi_k>|^2``, the weight of the freely evolving
        coherent state (fixed in the rotating frame).
    """
    if isinstance(state, JointState):
        window = state.window
    elif window is None:
        raise ParameterError("a window is required when passing a bare amplitude array")
    amps = _amplitudes(state)
    ref, n0 = _reference if _reference is not None else _reference_field(params, window)
    photon_dist = (np.abs(amps) ** 2).sum(axis=0)
    n_mean = float(window.indices.astype(float) @ photon_dist)
    overlaps = amps @ ref.conj()
    return n_mean - n0, photon_dist, float(np.sum(np.abs(overlaps) ** 2))


def reduced_qubit_matrix(state) -> np.ndarray:
    """Collective qubit density matrix ``rho_Q[k, l] = sum_n psi[k, n] psi[l, n]^*``, unit trace."""
    amps = _amplitudes(state)
    rho = amps @ amps.conj().T
    return rho / np.trace(rho).real


def single_qubit_reduction(rho_q: np.ndarray) -> tuple[float, complex]:
    """``(rho_ee, rho_eg)`` of one qubit from a symmetric collective density matrix."""
    n_qubits = rho_q.shape[0] - 1
    k = np.arange(n_qubits + 1)
    rho_ee = float(np.real(np.diagonal(rho_q)) @ (k / n_qubits))
    ladder, _ = dicke_ladder(n_qubits)
    rho_eg = complex(np.diagonal(rho_q, offset=-1) @ ladder) / n_qubits
    return rho_ee, rho_eg


def entanglement_entropies(state) -> tuple[float, float, float]:
    """``(S_q, S_q^(L), S_f^(L))`` for a pure joint state.

    ``S_q`` and ``S_q^(L)`` refer to a single qubit; ``S_f^(L)`` is the linear
    entropy of the field, equal to that of the whole qubit register.
    """
    amps = _amplitudes(state)
    norm = float(np.linalg.norm(amps))
    if abs(norm - 1.0) > NORM_TOLERANCE:
        raise StateIntegrityError(f"entropies need a normalized pure state, norm = {norm:.9f}")
    rho_q = reduced_qubit_matrix(amps)
    rho_ee, rho_eg = single_qubit_reduction(rho_q)
    s_q, s_q_lin = qubit_entropies(rho_ee, rho_eg)
    # the field and the qubit register share their spectrum (Schmidt)
    s_f_lin = 1.0 - float(np.sum(np.abs(rho_q) ** 2))
    return s_q, s_q_lin, s_f_lin


@dataclass(frozen=True)
class QrmObservables:
    p_e: float
    delta_n: float
    n_mean: float
    s_q: float
    s_q_linear: float
    s_f_linear: float
    p_alpha_survival: float
    norm: float
    leakage: float
    photon_dist: np.ndarray

    def row(self) -> tuple[float, ...]:
        return tuple(getattr(self, name) for name in OBSERVABLES)


def observables(state, params: ModelParams, window: FockWindow | None = None, _reference=None) -> QrmObservables:
    """All recorded quantities for one pure state.

    ``norm`` is the total probability of ``state`` as given; every other
    quantity is evaluated on the normalized state, so integration drift in
    the norm does not leak into ``delta_n`` (which scales with ``alpha**2``).
    """
    if isinstance(state, JointState):
        window = state.window
    raw = _amplitudes(state)
    norm = float(np.vdot(raw, raw).real)
    amps = raw / np.sqrt(norm)
    reference = _reference if _reference is not None else _reference_field(params, window)
    delta_n, dist, survival = field_observables(amps, params, window, reference)
    s_q, s_q_lin, s_f_lin = entanglement_entropies(amps)
    return QrmObservables(
        p_e=excitation_probability(amps), delta_n=delta_n, n_mean=reference[1] + delta_n,
        s_q=s_q, s_q_linear=s_q_lin, s_f_linear=s_f_lin, p_alpha_survival=survival,
        norm=norm, leakage=boundary_leakage(amps, window), photon_dist=dist,
    )


def default_sample_times(params: ModelParams, horizon: float, samples_per_pi_pulse: int = 8,
                         extra: Sequence[float] = ()) -> np.ndarray:
    """Uniform grid with ``samples_per_pi_pulse`` points per ``T_pi`` plus ``extra`` times."""
    if not horizon > 0:
        raise ParameterError(f"horizon must be positive, got {horizon}")
    if samples_per_pi_pulse < 1:
        raise ParameterError("samples_per_pi_pulse must be at least 1")
    dt = params.t_pi / samples_per_pi_pulse
    count = int(math.floor(horizon / dt + 1e-9))
    grid = np.arange(count + 1) * dt
    if grid[-1] < horizon:
        grid = np.append(grid, horizon)
    extra = [float(x) for x in extra if 0.0 <= x <= horizon]
    return np.unique(np.concatenate([grid, extra]))


def suggested_window(params: ModelParams, window: FockWindow) -> FockWindow:
    """A window twice as wide as ``window``, kept centred and clipped at the vacuum."""
    grow = max(10, window.width // 2)
    return FockWindow(max(0, window.n1 - grow), window.n2 + grow)


def check_leakage(leakage: float, params: ModelParams, window: FockWindow, t: float):
    if leakage > LEAKAGE_LIMIT:
        wider = suggested_window(params, window)
        raise WindowOverflowError(
            f"probability {leakage:.3e} reached the edge of the Fock window [{window.n1}, {window.n2}] "
            f"at t={t:g}; rerun with a wider window such as [{wider.n1}, {wider.n2}]",
            leakage=leakage, suggested=wider)


def evolve_qrm(params: ModelParams, sample_times: Sequence[float], window: FockWindow | None = None,
               rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, cutoff: float = DEFAULT_CUTOFF,
               keep_photon_dist: bool = True, backend: str | None = None) -> TimeSeries:
    """Integrate the rotating-frame Schroedinger equation from ``|g..g> x |alpha>``.

    Parameters
    ----------
    params : ModelParams
        Needs ``g`` and ``alpha``; ``n_qubits`` selects the Dicke ladder.
    sample_times : sequence of float
        Sorted, non-negative.  Samples are taken exactly at these times.
    window : FockWindow, optional
        Defaults to the window built from ``cutoff``.
    keep_photon_dist : bool
        Store ``p_n`` at every sample in ``series.photon_dist``.

    Returns
    -------
    TimeSeries
        Columns ``p_e, delta_n, n_mean, s_q, s_q_linear, s_f_linear,
        p_alpha_survival, norm, leakage``.  ``final_state`` holds the last
        :class:`JointState`.

    Raises
    ------
    WindowOverflowError
        If more than ``1e-6`` of probability reaches the window edges.
    """
    state = initial_joint_state(params, window, cutoff)
    window = state.window
    times = np.asarray(sample_times, dtype=float).reshape(-1)
    if times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ParameterError("sample times must be a non-empty sorted sequence of non-negative times")
    ops = operator_data(params, window)
    kern = kernels.get(backend)
    args = ops.args()
    shape = (params.n_levels, window.width, 1)
    reference = _reference_field(params, window)
    check = params.g > 0  # nothing moves without coupling

    def rhs(t, y):
        return kern.apply_h(t, y, *args)

    def observe(t, y):
        obs = observables(y[:, :, 0], params, window, reference)
        if check:
            check_leakage(obs.leakage, params, window, t)
        return obs

    y0 = state.amplitudes.reshape(shape).copy()
    stats = None
    if times[-1] == 0.0:
        records = [observe(0.0, y0) for _ in times]
        final = y0
    else:
        last = {}

        def observe_keep(t, y):
            last["y"] = y.copy()
            return observe(t, y)

        problem = OdeProblem(rhs, y0, 0.0, float(times[-1]), rtol=rtol, atol=atol, dense_output_times=times)
        records, stats = integrate(problem, observer=observe_keep)
        final = last["y"]

    columns = {name: np.array([getattr(r, name) for r in records]) for name in OBSERVABLES}
    meta = {
        "model": "qrm", "rtol": rtol, "atol": atol, "window": [window.n1, window.n2],
        "cutoff": cutoff, "discarded_mass": state.discarded_mass, "backend": kern.BACKEND,
        "max_norm_drift": float(np.max(np.abs(columns["norm"] - 1.0))),
        "max_leakage": float(np.max(columns["leakage"])),
    }
    log.info("qrm run: window [%d, %d], %d samples, %s", window.n1, window.n2, times.size,
             stats.as_dict() if stats else "no steps")
    return TimeSeries(
        t=times, columns=columns, meta=meta, stats=stats,
        photon_dist=np.array([r.photon_dist for r in records]) if keep_photon_dist else None,
        window=window,
        final_state=JointState(window=window, n_levels=params.n_levels, amplitudes=final[:, :, 0].copy(),
                               frame_time=float(times[-1]), discarded_mass=state.discarded_mass),
    )
