"""Lossless semiclassical Rabi model: RWA, intermediate, semi-analytic and exact solutions.

The qubit is driven by ``G cos(omega t)``.  After the rotation
``exp(-i omega t sigma_z / 2)`` the state is expanded over the eigenstates
``|phi_+->`` of the time-independent rotating Hamiltonian with amplitudes
``A_+-(t)``; the exact and semi-analytic solvers integrate the rescaled
amplitudes ``a_+- = exp(+-i Upsilon sin(2 omega t) / 2) A_+-``, whose
equations of motion have bounded, slowly varying coefficients.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import ModelParams, QubitAmplitudes, TimeSeries
from .errors import DegenerateSpectrumError, ParameterError
from .integrator import DEFAULT_ATOL, DEFAULT_RTOL, OdeProblem, integrate
from .special import bessel_j

INTERMEDIATE_MAX_UPSILON = 0.25


@dataclass(frozen=True)
class RotatingEigensystem:
    G: float
    Delta: float
    R: float
    R_plus: float
    R_minus: float
    phi_plus: QubitAmplitudes
    phi_minus: QubitAmplitudes

    @property
    def E_plus(self) -> float:
        return 0.5 * self.R

    @property
    def E_minus(self) -> float:
        return -0.5 * self.R


@dataclass(frozen=True)
class ReducedAmplitudes:
    a_plus: complex
    a_minus: complex
    t: float = 0.0

    @property
    def norm2(self) -> float:
        return abs(self.a_plus) ** 2 + abs(self.a_minus) ** 2


def eigensystem(params: ModelParams) -> RotatingEigensystem:
    """Eigenvalues ``+-R/2`` and eigenstates of ``-Delta/2 sigma_z + G/2 sigma_x``."""
    G, Delta = params.G, params.Delta
    if G is None:
        raise ParameterError("eigensystem needs the Rabi frequency G")
    if G == 0 and Delta == 0:
        raise DegenerateSpectrumError("G = 0 at resonance: the rotating Hamiltonian vanishes")
    if not G > 0:
        raise ParameterError(f"eigensystem requires G > 0, got {G}")
    R = math.hypot(G, Delta)
    # the smaller of R_+- from R_+ R_- = G^2/4, avoiding cancellation when G << |Delta|
    if Delta >= 0:
        R_plus = 0.5 * (R + Delta)
        R_minus = 0.25 * G * G / R_plus
    else:
        R_minus = 0.5 * (R - Delta)
        R_plus = 0.25 * G * G / R_minus
    # G / (2 sqrt(R R_+-)) = sqrt(R_-+ / R)
    phi_plus = QubitAmplitudes(math.sqrt(R_plus / R), math.sqrt(R_minus / R))
    phi_minus = QubitAmplitudes(math.sqrt(R_minus / R), -math.sqrt(R_plus / R))
    return RotatingEigensystem(G, Delta, R, R_plus, R_minus, phi_plus, phi_minus)


def initial_reduced_amplitudes(qubit: QubitAmplitudes, eig: RotatingEigensystem) -> ReducedAmplitudes:
    """Projections ``A_+-(0) = <phi_+-|psi(0)>``; at ``t = 0`` also ``a_+- = A_+-``."""
    a_plus = eig.phi_plus.c_g * qubit.c_g + eig.phi_plus.c_e * qubit.c_e
    a_minus = eig.phi_minus.c_g * qubit.c_g + eig.phi_minus.c_e * qubit.c_e
    return ReducedAmplitudes(complex(a_plus), complex(a_minus), 0.0)


def pe_rwa(qubit: QubitAmplitudes, G: float, t):
    """Textbook resonant RWA excitation probability (vectorized over ``t``)."""
    t = np.asarray(t, dtype=float)
    cross = (qubit.c_e * qubit.c_g.conjugate()).imag
    pe = np.sin(0.5 * G * t) ** 2 + qubit.p_e * np.cos(G * t) - cross * np.sin(G * t)
    return np.clip(pe, 0.0, 1.0)


def _require_resonance(params: ModelParams, what: str):
    if params.Delta != 0:
        raise ParameterError(f"{what} is derived for exact resonance (Delta = 0), got Delta={params.Delta}")
    if not params.G or params.G <= 0:
        raise ParameterError(f"{what} requires G > 0")


def intermediate_amplitudes(qubit: QubitAmplitudes, params: ModelParams, t):
    """Closed-form ``a_+-(t)`` obtained by dropping the ``sin 2 omega t`` part of ``Q_t``."""
    _require_resonance(params, "the intermediate solution")
    G = params.G
    upsilon = G / (2.0 * params.omega)
    if upsilon > INTERMEDIATE_MAX_UPSILON:
        raise ParameterError(
            f"intermediate solution needs Upsilon = G/2omega <= {INTERMEDIATE_MAX_UPSILON}, got {upsilon}")
    J1 = bessel_j(1, upsilon)
    s = math.sqrt(1.0 + J1 * J1)
    s_minus_1 = J1 * J1 / (s + 1.0)
    cg, ce = qubit.c_g, qubit.c_e
    norm = 2.0 * math.sqrt(2.0) * s
    b1 = ((s_minus_1 + J1) * cg + (s_minus_1 - J1) * ce) / norm
    b2 = ((s + 1.0 - J1) * cg + (s + 1.0 + J1) * ce) / norm

    t = np.asarray(t, dtype=float)
    up = np.exp(0.5j * G * s * t)
    down = np.exp(-0.5j * G * s * t)
    a_plus = np.exp(0.5j * G * t) * (b1 * up + b2 * down)
    # b1 (1+s) / J1 and b2 (1-s) / J1 stay finite as J1 -> 0
    c1 = ((J1 + 1.0 + s) * cg + (J1 - 1.0 - s) * ce) / norm
    c2 = -J1 / (s + 1.0) * b2
    a_minus = np.exp(-0.5j * G * t) * (c1 * up + c2 * down)
    return a_plus, a_minus


def _pe_from_reduced(a_plus, a_minus, G, upsilon, omega, t):
    phase = np.exp(-1j * (upsilon * np.sin(2.0 * omega * t) + G * t))
    return 0.5 * np.abs(phase * a_plus - a_minus) ** 2


def pe_intermediate(qubit: QubitAmplitudes, params: ModelParams, t):
    """Excitation probability of the intermediate closed-form solution (resonant only)."""
    a_plus, a_minus = intermediate_amplitudes(qubit, params, t)
    upsilon = params.G / (2.0 * params.omega)
    pe = _pe_from_reduced(a_plus, a_minus, params.G, upsilon, params.omega, np.asarray(t, dtype=float))
    return np.clip(pe, 0.0, 1.0)


def _sample_array(sample_times, t0=0.0) -> np.ndarray:
    times = np.asarray(sample_times, dtype=float).reshape(-1)
    if times.size == 0:
        raise ParameterError("at least one sample time is required")
    if np.any(np.diff(times) < 0) or times[0] < t0:
        raise ParameterError("sample times must be sorted and not precede the initial time")
    return times


def _propagate(rhs, y0, t0, times, rtol, atol, **kw):
    """Integrate and return the states at ``times`` (handles a horizon equal to ``t0``)."""
    if times[-1] == t0:
        return np.repeat(np.asarray(y0, dtype=complex)[None], times.size, axis=0), None
    problem = OdeProblem(rhs, y0, t0, float(times[-1]), rtol=rtol, atol=atol,
                         dense_output_times=times, **kw)
    return integrate(problem)


def evolve_semianalytic(qubit: QubitAmplitudes, params: ModelParams, sample_times: Sequence[float],
                        rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL) -> TimeSeries:
    """Integrate the reduced equations with ``Q_t`` truncated to ``J_0, J_1, J_2``.

    Valid at resonance for small ``Upsilon = G / 2 omega``.
    """
    _require_resonance(params, "the semi-analytic solution")
    G, omega = params.G, params.omega
    upsilon = G / (2.0 * omega)
    J0, J1, J2 = (bessel_j(k, upsilon) for k in range(3))
    osc = 0.5j * G * (J0 - J2)
    const = -0.5 * G * J1

    def rhs(t, y):
        q = (osc * math.sin(2.0 * omega * t) + const) * cmath.exp(1j * G * t)
        return np.array([-1j * q * y[1], -1j * q.conjugate() * y[0]])

    eig = eigensystem(params)
    init = initial_reduced_amplitudes(qubit, eig)
    times = _sample_array(sample_times)
    states, stats = _propagate(rhs, np.array([init.a_plus, init.a_minus]), 0.0, times, rtol, atol)
    pe = _pe_from_reduced(states[:, 0], states[:, 1], G, upsilon, omega, times)
    return TimeSeries(
        t=times,
        columns={"p_e": np.clip(pe, 0.0, 1.0), "a_plus": states[:, 0], "a_minus": states[:, 1]},
        meta={"model": "srm_semianalytic", "rtol": rtol, "atol": atol},
        stats=stats,
    )


def exact_rhs(params: ModelParams):
    """Right-hand side of the exact reduced equations ``a_+' = -i Q_t a_-``, ``a_-' = -i Q_t* a_+``."""
    eig = eigensystem(params)
    omega = params.omega
    delta = float(params.delta_flag)
    R, Rp, Rm, G = eig.R, eig.R_plus, eig.R_minus, eig.G
    upsilon = delta * G * G / (2.0 * omega * R)
    pref = delta * G / (2.0 * R)

    def rhs(t, y):
        w = 2.0 * omega * t
        q = pref * cmath.exp(1j * (upsilon * math.sin(w) + R * t)) * (Rm * cmath.exp(1j * w) - Rp * cmath.exp(-1j * w))
        return np.array([-1j * q * y[1], -1j * q.conjugate() * y[0]])

    return rhs, upsilon


def evolve_exact(qubit: QubitAmplitudes, params: ModelParams, sample_times: Sequence[float],
                 rtol: float = DEFAULT_RTOL, atol: float = DEFAULT_ATOL, t0: float = 0.0) -> TimeSeries:
    """Exact SRM dynamics for arbitrary detuning.

    ``qubit`` is the lab-frame state at time ``t0``.  The counter-rotating
    terms are switched off with ``params.delta_flag = 0``.  Besides ``p_e``
    the series carries the reduced amplitudes and the lab-frame qubit
    amplitudes ``c_g``, ``c_e``.
    """
    eig = eigensystem(params)
    rhs, upsilon = exact_rhs(params)
    omega, R = params.omega, eig.R
    E_minus = eig.E_minus

    # lab -> rotating frame -> eigenbasis -> rescaled amplitudes
    g1 = cmath.exp(-0.5j * omega * t0) * qubit.c_g
    e1 = cmath.exp(0.5j * omega * t0) * qubit.c_e
    A_plus = cmath.exp(1j * (E_minus + R) * t0) * (eig.phi_plus.c_g * g1 + eig.phi_plus.c_e * e1)
    A_minus = cmath.exp(1j * E_minus * t0) * (eig.phi_minus.c_g * g1 + eig.phi_minus.c_e * e1)
    s0 = math.sin(2.0 * omega * t0)
    y0 = np.array([cmath.exp(0.5j * upsilon * s0) * A_plus, cmath.exp(-0.5j * upsilon * s0) * A_minus])

    times = _sample_array(sample_times, t0)
    states, stats = _propagate(rhs, y0, t0, times, rtol, atol)
    a_plus, a_minus = states[:, 0], states[:, 1]
    half = 0.5 * upsilon * np.sin(2.0 * omega * times)
    A_plus = np.exp(-1j * half) * a_plus * np.exp(-1j * R * times)
    A_minus = np.exp(1j * half) * a_minus
    global_phase = np.exp(-1j * E_minus * times)
    psi_g = global_phase * (A_plus * eig.phi_plus.c_g + A_minus * eig.phi_minus.c_g)
    psi_e = global_phase * (A_plus * eig.phi_plus.c_e + A_minus * eig.phi_minus.c_e)
    c_g = np.exp(0.5j * omega * times) * psi_g
    c_e = np.exp(-0.5j * omega * times) * psi_e
    return TimeSeries(
        t=times,
        columns={"p_e": np.abs(c_e) ** 2, "a_plus": a_plus, "a_minus": a_minus, "c_g": c_g, "c_e": c_e},
        meta={"model": "srm_exact", "rtol": rtol, "atol": atol, "t0": t0},
        stats=stats,
    )


def evolve_rwa(qubit: QubitAmplitudes, params: ModelParams, sample_times: Sequence[float]) -> TimeSeries:
    times = _sample_array(sample_times)
    _require_resonance(params, "the RWA closed form")
    return TimeSeries(t=times, columns={"p_e": pe_rwa(qubit, params.G, times)}, meta={"model": "srm_rwa"})


def evolve_intermediate(qubit: QubitAmplitudes, params: ModelParams, sample_times: Sequence[float]) -> TimeSeries:
    times = _sample_array(sample_times)
    return TimeSeries(t=times, columns={"p_e": pe_intermediate(qubit, params, times)},
                      meta={"model": "srm_intermediate"})
