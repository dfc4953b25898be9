"""Lindblad dynamics of a classically driven two-level system.

The equation is integrated in the laboratory frame with

    H(t) = (Omega/2) sigma_z + f(t) sigma_+ + f(t)^* sigma_-,
    f(t) = (G/2) (e^{-i omega t} + delta e^{i omega t}),

and the dissipators ``(gamma/2)(n_th+1) D[sigma_-] + (gamma/2) n_th D[sigma_+]
+ (gamma_phi/2) D[sigma_z]`` with ``D[L] rho = 2 L rho L^dag - {L^dag L, rho}``.
The state vector is ``(rho_gg, rho_ee, rho_eg)``.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ModelParams, QubitAmplitudes, TimeSeries, qubit_entropies
from .errors import ParameterError
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, OdeProblem, integrate


@dataclass(frozen=True)
class QubitDensity:
    """Two-level density matrix ``[[rho_gg, rho_ge], [conj(rho_ge), rho_ee]]``."""

    rho_gg: float
    rho_ee: float
    rho_ge: complex = 0.0

    def __post_init__(self):
        if abs(self.rho_gg + self.rho_ee - 1.0) > 1e-9:
            raise ParameterError(f"populations must sum to 1, got {self.rho_gg + self.rho_ee!r}")
        if not (-1e-12 <= self.rho_ee <= 1.0 + 1e-12):
            raise ParameterError(f"rho_ee = {self.rho_ee} outside [0, 1]")
        if abs(self.rho_ge) ** 2 > self.rho_gg * self.rho_ee + 1e-9:
            raise ParameterError("coherence violates positivity |rho_ge|^2 <= rho_gg rho_ee")

    @classmethod
    def from_pure(cls, qubit: QubitAmplitudes) -> "QubitDensity":
        return cls(abs(qubit.c_g) ** 2, abs(qubit.c_e) ** 2, qubit.c_g * qubit.c_e.conjugate())

    @classmethod
    def ground(cls) -> "QubitDensity":
        return cls(1.0, 0.0, 0.0)

    @classmethod
    def excited(cls) -> "QubitDensity":
        return cls(0.0, 1.0, 0.0)


def master_rhs(params: ModelParams):
    """Right-hand side for ``y = (rho_gg, rho_ee, rho_eg)``."""
    Omega, omega = params.Omega, params.omega
    half_G = 0.5 * params.G if params.G else 0.0
    delta = float(params.delta_flag)
    gd = params.gamma * (params.n_th + 1.0)
    gu = params.gamma * params.n_th
    coherence_decay = 0.5 * (gd + gu) + 2.0 * params.gamma_phi

    def rhs(t, y):
        a, d, c = y[0], y[1], y[2]
        f = half_G * (cmath.exp(-1j * omega * t) + delta * cmath.exp(1j * omega * t))
        b = c.conjugate()
        # -i [H, rho]_ee = -i (f rho_ge - f^* rho_eg)
        dd = -1j * (f * b - f.conjugate() * c) - gd * d + gu * a
        dc = -1j * (Omega * c + f * (a - d)) - coherence_decay * c
        return np.array([-dd, dd, dc])

    return rhs


def evolve_master_srm(initial: QubitDensity, params: ModelParams, sample_times: Sequence[float],
                      rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> TimeSeries:
    """Integrate the driven two-level master equation.

    Parameters
    ----------
    initial : QubitDensity
        Laboratory-frame state at ``t = 0``.
    params : ModelParams
        ``Omega``, ``omega``, ``G``, ``delta_flag`` and the rates ``gamma``,
        ``gamma_phi``, ``n_th``.  ``G = 0`` gives pure relaxation.

    Returns
    -------
    TimeSeries
        Columns ``p_e``, ``s_q``, ``s_q_linear``, ``trace``, ``rho_eg`` and
        ``positivity_margin`` (``rho_gg rho_ee - |rho_eg|^2``).
    """
    if params.G is None:
        raise ParameterError("the semiclassical model needs the Rabi frequency G")
    times = np.asarray(sample_times, dtype=float).reshape(-1)
    if times.size == 0 or times[0] < 0 or np.any(np.diff(times) < 0):
        raise ParameterError("sample times must be a non-empty sorted sequence of non-negative times")
    y0 = np.array([initial.rho_gg, initial.rho_ee, complex(initial.rho_ge).conjugate()], dtype=complex)
    stats = None
    if times[-1] == 0.0:
        states = np.repeat(y0[None], times.size, axis=0)
    else:
        problem = OdeProblem(master_rhs(params), y0, 0.0, float(times[-1]), rtol=rtol, atol=atol,
                             dense_output_times=times)
        states, stats = integrate(problem)

    rho_gg, rho_ee, rho_eg = states[:, 0].real, states[:, 1].real, states[:, 2]
    trace = rho_gg + rho_ee
    s_q = np.empty(times.size)
    s_lin = np.empty(times.size)
    for i in range(times.size):
        s_q[i], s_lin[i] = qubit_entropies(rho_ee[i] / trace[i], rho_eg[i] / trace[i])
    return TimeSeries(
        t=times,
        columns={"p_e": rho_ee, "s_q": s_q, "s_q_linear": s_lin, "trace": trace, "rho_eg": rho_eg,
                 "positivity_margin": rho_gg * rho_ee - np.abs(rho_eg) ** 2},
        meta={"model": "srm_master", "rtol": rtol, "atol": atol},
        stats=stats,
    )
