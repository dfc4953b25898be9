"""Physical parameters, Fock windows, coherent states and the joint state layout.

All quantities are expressed in units of the cavity (drive) frequency
``omega``, which is normally 1.  The joint atom-field state is stored as a
``(n_levels, width)`` complex array: the first axis runs over the collective
(Dicke) qubit levels ``k = 0..N`` (number of excited qubits), the second over
the retained Fock indices ``n = n1..n2``.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any

import numpy as np
from scipy.special import gammaln

from .errors import ParameterError

log = logging.getLogger(__name__)

DEFAULT_CUTOFF = 1e-10


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the semiclassical and quantum Rabi models.

    Missing members of the pairs ``(Omega, Delta)`` and ``(G, g)`` are
    completed from ``Delta = omega - Omega`` and ``G = 2 g alpha``.  When both
    members of a pair are given they must agree.
    """

    omega: float = 1.0
    Omega: float | None = None
    Delta: float | None = None
    G: float | None = None
    g: float | None = None
    alpha: float = 0.0
    n_qubits: int = 1
    delta_flag: int = 1
    gamma: float = 0.0
    gamma_phi: float = 0.0
    kappa: float = 0.0
    n_th: float = 0.0
    n_c: float = 0.0

    def __post_init__(self):
        set_ = lambda k, v: object.__setattr__(self, k, v)  # noqa: E731

        if not self.omega > 0:
            raise ParameterError(f"omega must be positive, got {self.omega}")
        if not self.alpha >= 0:
            raise ParameterError(f"alpha must be non-negative, got {self.alpha}")
        if self.n_qubits not in (1, 2, 3):
            raise ParameterError(f"n_qubits must be 1, 2 or 3, got {self.n_qubits}")
        if self.delta_flag not in (0, 1):
            raise ParameterError(f"delta_flag must be 0 or 1, got {self.delta_flag}")
        for name in ("gamma", "gamma_phi", "kappa", "n_th", "n_c"):
            if not getattr(self, name) >= 0:
                raise ParameterError(f"{name} must be non-negative, got {getattr(self, name)}")

        if self.Omega is None and self.Delta is None:
            set_("Delta", 0.0)
            set_("Omega", float(self.omega))
        elif self.Omega is None:
            set_("Omega", self.omega - self.Delta)
        elif self.Delta is None:
            set_("Delta", self.omega - self.Omega)
        elif abs(self.Delta - (self.omega - self.Omega)) > 1e-12 * max(1.0, abs(self.omega)):
            raise ParameterError(
                f"inconsistent detuning: Delta={self.Delta} but omega-Omega={self.omega - self.Omega}")

        if self.g is not None and self.g < 0:
            raise ParameterError(f"g must be non-negative, got {self.g}")
        if self.G is not None and self.G < 0:
            raise ParameterError(f"G must be non-negative, got {self.G}")
        if self.G is None and self.g is not None:
            set_("G", 2.0 * self.g * self.alpha)
        elif self.g is None and self.G is not None and self.alpha > 0:
            set_("g", self.G / (2.0 * self.alpha))
        elif self.G is not None and self.g is not None:
            expected = 2.0 * self.g * self.alpha
            if abs(self.G - expected) > 1e-12 * max(abs(self.G), abs(expected), 1e-300):
                raise ParameterError(
                    f"G={self.G} violates the semiclassical correspondence G = 2*g*alpha = {expected}")

    @classmethod
    def from_pi_pulse(cls, omega_t_pi: float, **kwargs) -> "ModelParams":
        """Parameters with Rabi frequency ``G = pi / T_pi`` (``omega_t_pi`` in units of 1/omega).

        If ``alpha`` is given, the one-photon coupling follows as ``g = G / (2 alpha)``.
        """
        if not omega_t_pi > 0:
            raise ParameterError(f"omega*T_pi must be positive, got {omega_t_pi}")
        omega = kwargs.get("omega", 1.0)
        G = math.pi * omega / omega_t_pi
        return cls(G=G, **kwargs)

    @property
    def t_pi(self) -> float:
        """Duration of the resonant pi-pulse, ``pi / G``."""
        if not self.G:
            raise ParameterError("pi-pulse duration undefined for G = 0")
        return math.pi / self.G

    @property
    def n_levels(self) -> int:
        return self.n_qubits + 1

    def with_(self, **changes: Any) -> "ModelParams":
        return replace(self, **changes)

    def as_dict(self) -> dict[str, Any]:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


@dataclass(frozen=True)
class FockWindow:
    """Contiguous range ``[n1, n2]`` of retained photon numbers."""

    n1: int
    n2: int

    def __post_init__(self):
        if self.n1 < 0 or self.n2 < self.n1:
            raise ParameterError(f"invalid Fock window [{self.n1}, {self.n2}]")

    @property
    def width(self) -> int:
        return self.n2 - self.n1 + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(self.n1, self.n2 + 1)

    def __contains__(self, n) -> bool:
        return self.n1 <= n <= self.n2


def log_coherent_amplitude(alpha: float, n):
    """``ln |<n|alpha>|`` evaluated without factorials (vectorized over ``n``)."""
    n = np.asarray(n, dtype=float)
    if alpha == 0:
        return np.where(n == 0, 0.0, -np.inf)
    return -0.5 * alpha * alpha + n * math.log(alpha) - 0.5 * gammaln(n + 1.0)


def build_window(alpha: float, cutoff: float = DEFAULT_CUTOFF) -> FockWindow:
    """Smallest window around ``round(alpha**2)`` whose outer neighbours fall below ``cutoff``.

    Both ``n1 - 1`` (unless ``n1 == 0``) and ``n2 + 1`` carry a coherent-state
    amplitude ``|<n|alpha>| < cutoff``; every index inside the window is at or
    above the cutoff because the Poissonian is unimodal.
    """
    if not alpha >= 0:
        raise ParameterError(f"alpha must be non-negative, got {alpha}")
    if not 0 < cutoff < 1:
        raise ParameterError(f"cutoff must lie in (0, 1), got {cutoff}")
    if alpha == 0:
        return FockWindow(0, 0)

    log_cut = math.log(cutoff)
    mode = int(round(alpha * alpha))
    la = lambda n: float(log_coherent_amplitude(alpha, n))  # noqa: E731

    n1 = mode
    while n1 > 0 and la(n1 - 1) >= log_cut:
        n1 -= 1
    n2 = mode
    while la(n2 + 1) >= log_cut:
        n2 += 1
    return FockWindow(n1, n2)


def coherent_amplitudes(alpha: float, window: FockWindow) -> np.ndarray:
    """Coherent-state amplitudes ``<n|alpha>`` over the window, renormalized to unit norm.

    The mass lost to truncation is logged at DEBUG level; see
    :func:`coherent_tail_mass` for its value.
    """
    la = log_coherent_amplitude(alpha, window.indices)
    amps = np.exp(la - la.max())
    amps /= np.linalg.norm(amps)
    if log.isEnabledFor(logging.DEBUG):
        log.debug("coherent state alpha=%g window=[%d,%d]: discarded mass %.3e",
                  alpha, window.n1, window.n2, coherent_tail_mass(alpha, window))
    return amps.astype(complex)


def coherent_tail_mass(alpha: float, window: FockWindow) -> float:
    """Total Poisson weight ``sum |<n|alpha>|^2`` outside the window, summed term by term."""
    if alpha == 0:
        return 0.0 if window.n1 == 0 else 1.0
    lower = np.arange(0, window.n1)
    mass = float(np.exp(2 * log_coherent_amplitude(alpha, lower)).sum()) if lower.size else 0.0
    # upper tail decays super-exponentially; stop once a block contributes nothing
    start = window.n2 + 1
    while True:
        block = np.arange(start, start + 256)
        w = np.exp(2 * log_coherent_amplitude(alpha, block))
        mass += float(w.sum())
        if w[-1] == 0.0 or w[-1] < 1e-30 * max(mass, 1e-300):
            break
        start += 256
    return mass


@dataclass(frozen=True)
class QubitAmplitudes:
    """Pure single-qubit state ``c_g |g> + c_e |e>``."""

    c_g: complex
    c_e: complex

    def __post_init__(self):
        object.__setattr__(self, "c_g", complex(self.c_g))
        object.__setattr__(self, "c_e", complex(self.c_e))
        norm = abs(self.c_g) ** 2 + abs(self.c_e) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise ParameterError(f"qubit amplitudes not normalized: |c_g|^2+|c_e|^2 = {norm!r}")

    @classmethod
    def ground(cls) -> "QubitAmplitudes":
        return cls(1.0, 0.0)

    @classmethod
    def excited(cls) -> "QubitAmplitudes":
        return cls(0.0, 1.0)

    @property
    def p_e(self) -> float:
        return abs(self.c_e) ** 2

    def as_vector(self) -> np.ndarray:
        return np.array([self.c_g, self.c_e], dtype=complex)


@dataclass(frozen=True)
class JointState:
    """Pure atom-field state in the double rotating frame.

    ``amplitudes[k, j]`` is the amplitude of Dicke level ``k`` and Fock state
    ``n = window.n1 + j``.  The array is stored read-only.
    """

    window: FockWindow
    n_levels: int
    amplitudes: np.ndarray
    frame_time: float = 0.0
    discarded_mass: float = 0.0

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (self.n_levels, self.window.width):
            raise ParameterError(
                f"amplitude array has shape {amps.shape}, expected {(self.n_levels, self.window.width)}")
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)

    @property
    def n_qubits(self) -> int:
        return self.n_levels - 1

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def boundary_leakage(self, edge: int = 5) -> float:
        return boundary_leakage(self.amplitudes, self.window, edge)


def boundary_leakage(amplitudes: np.ndarray, window: FockWindow, edge: int = 5) -> float:
    """Probability held by the ``edge`` lowest and highest Fock indices of the window.

    The lower edge is skipped when the window starts at the vacuum, which is a
    physical boundary rather than a truncation.
    """
    return edge_mass((np.abs(amplitudes) ** 2).sum(axis=0), window, edge)


def edge_mass(photon_dist: np.ndarray, window: FockWindow, edge: int = 5) -> float:
    """Same as :func:`boundary_leakage` for a photon-number distribution."""
    p = np.asarray(photon_dist, dtype=float)
    upper = float(p[-edge:].sum())
    if window.n1 == 0:
        return upper
    if window.width <= 2 * edge:
        return float(p.sum())
    return upper + float(p[:edge].sum())


def initial_joint_state(params: ModelParams, window: FockWindow | None = None,
                        cutoff: float = DEFAULT_CUTOFF) -> JointState:
    """All qubits in the ground level, field in the (windowed) coherent state ``|alpha>``."""
    if window is None:
        window = build_window(params.alpha, cutoff)
    amps = np.zeros((params.n_levels, window.width), dtype=complex)
    amps[0] = coherent_amplitudes(params.alpha, window)
    return JointState(window=window, n_levels=params.n_levels, amplitudes=amps,
                      frame_time=0.0, discarded_mass=coherent_tail_mass(params.alpha, window))


@dataclass
class TimeSeries:
    """Observables sampled along one trajectory.

    ``columns`` maps observable names to arrays aligned with ``t``.  Solvers
    that track the photon-number distribution store it (one row per sample)
    in ``photon_dist`` together with the window it refers to.
    """

    t: np.ndarray
    columns: dict[str, np.ndarray]
    meta: dict[str, Any] = field(default_factory=dict)
    stats: Any = None
    photon_dist: np.ndarray | None = None
    window: FockWindow | None = None
    final_state: Any = None

    def __getitem__(self, name: str) -> np.ndarray:
        return self.columns[name]

    def __len__(self) -> int:
        return len(self.t)

    def at(self, time: float) -> int:
        """Index of the sample whose time equals ``time`` (nearest sample)."""
        return int(np.argmin(np.abs(self.t - time)))


def qubit_entropies(rho_ee: float, rho_eg: complex) -> tuple[float, float]:
    """Von Neumann (nats) and linear entropy of a 2x2 density matrix.

    The matrix is ``[[1 - rho_ee, conj(rho_eg)], [rho_eg, rho_ee]]``; its
    eigenvalues follow from the quadratic formula and ``0 ln 0 = 0``.
    """
    rho_gg = 1.0 - rho_ee
    # 1 - Tr rho^2 = 2 det rho for unit trace; the determinant avoids cancellation
    det = max(0.0, rho_gg * rho_ee - abs(rho_eg) ** 2)
    radius = math.sqrt(max(0.0, (rho_ee - rho_gg) ** 2 + 4.0 * abs(rho_eg) ** 2))
    lam_big = 0.5 * (1.0 + radius)
    lam_small = det / lam_big
    s_vn = 0.0
    for lam in (lam_big, lam_small):
        if lam > 0.0:
            s_vn -= lam * math.log(lam)
    return max(0.0, s_vn), 2.0 * det
