"""Adaptive embedded Runge-Kutta propagator for complex ODE systems.

The scheme is Verner's 6(5) "most robust" pair: nine stages, the last one
evaluated at the new solution so it is reused as the first stage of the next
step (FSAL).  The sixth-order solution is propagated; the fifth-order one
only serves the error estimate.

Samples are produced by stepping onto each requested time exactly, so the
returned sample times are the requested ones, bit for bit.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Sequence

import numpy as np

from .errors import IntegrationError, ParameterError

DEFAULT_RTOL = 1e-10
DEFAULT_ATOL = 1e-12

# Verner (2010), "most robust" 6(5) pair
_C = np.array([0.0, 9 / 50, 1 / 6, 1 / 4, 53 / 100, 3 / 5, 4 / 5, 1.0, 1.0])
_A = np.zeros((9, 9))
_A[1, :1] = [9 / 50]
_A[2, :2] = [29 / 324, 25 / 324]
_A[3, :3] = [1 / 16, 0, 3 / 16]
_A[4, :4] = [79129 / 250000, 0, -261237 / 250000, 19663 / 15625]
_A[5, :5] = [1336883 / 4909125, 0, -25476 / 30875, 194159 / 185250, 8225 / 78546]
_A[6, :6] = [-2459386 / 14727375, 0, 19504 / 30875, 2377474 / 13615875,
             -6157250 / 5773131, 902 / 735]
_A[7, :7] = [2699 / 7410, 0, -252 / 1235, -1393253 / 3993990, 236875 / 72618,
             -135 / 49, 15 / 22]
_B6 = np.array([11 / 144, 0, 0, 256 / 693, 0, 125 / 504, 125 / 528, 5 / 72, 0])
_A[8, :8] = _B6[:8]
_B5 = np.array([28 / 477, 0, 0, 212 / 441, -312500 / 366177, 2125 / 1764, 0,
                -2105 / 35532, 2995 / 17766])
_E = _B6 - _B5

ERROR_ORDER = 5  # order of the embedded solution, sets the controller exponent
SAFETY = 0.8  # unitary norm drift must stay below 1e-8 over 1e4 time units


@dataclass
class StepStats:
    accepted_steps: int = 0
    rejected_steps: int = 0
    max_error_estimate: float = 0.0
    rhs_evaluations: int = 0

    def as_dict(self) -> dict[str, Any]:
        return {
            "accepted_steps": self.accepted_steps,
            "rejected_steps": self.rejected_steps,
            "max_error_estimate": self.max_error_estimate,
            "rhs_evaluations": self.rhs_evaluations,
        }


@dataclass
class OdeProblem:
    """First-order system ``dy/dt = rhs(t, y)`` on ``[t0, t1]``.

    ``post_step``, if given, is applied to every accepted state (e.g. to
    re-symmetrize a density matrix).  It may only remove rounding-level
    drift: the last stage derivative is still reused for the next step.
    """

    rhs: Callable[[float, np.ndarray], np.ndarray]
    y0: np.ndarray
    t0: float
    t1: float
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    dense_output_times: Sequence[float] | None = None
    post_step: Callable[[np.ndarray], np.ndarray] | None = None
    max_step: float = math.inf
    first_step: float | None = None
    _times: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self.y0 = np.asarray(self.y0, dtype=complex)
        if not self.t1 > self.t0:
            raise ParameterError(f"t1 must exceed t0 (got t0={self.t0}, t1={self.t1})")
        if not (self.rtol > 0 and self.atol > 0):
            raise ParameterError("rtol and atol must be positive")
        if not self.max_step > 0:
            raise ParameterError("max_step must be positive")
        times = np.asarray(self.t1 if self.dense_output_times is None
                           else self.dense_output_times, dtype=float).reshape(-1)
        if times.size and (np.any(np.diff(times) < 0) or times[0] < self.t0 or times[-1] > self.t1):
            raise ParameterError("sample times must be sorted and lie inside [t0, t1]")
        self._times = times

    @property
    def dimension(self) -> int:
        return self.y0.size


def _initial_step(f, t0, y0, f0, rtol, atol, span):
    # Hairer, Norsett & Wanner, Solving ODEs I, II.4
    scale = atol + rtol * np.linalg.norm(y0)
    d0 = np.linalg.norm(y0) / scale
    d1 = np.linalg.norm(f0) / scale
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    h0 = min(h0, span)
    y1 = y0 + h0 * f0
    f1 = f(t0 + h0, y1)
    d2 = np.linalg.norm(f1 - f0) / scale / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** (1.0 / (ERROR_ORDER + 1))
    return min(100 * h0, h1, span)


def integrate(problem: OdeProblem, observer: Callable[[float, np.ndarray], Any] | None = None):
    """Integrate ``problem`` and sample it at its ``dense_output_times``.

    Parameters
    ----------
    problem : OdeProblem
    observer : callable, optional
        Called as ``observer(t, y)`` at every sample time; its return values
        are collected instead of copies of the state.  ``y`` is a view of an
        internal buffer: it must not be modified, and must be copied if kept.

    Returns
    -------
    samples : ndarray or list
        States stacked along axis 0 (no observer) or the list of observer
        results.
    stats : StepStats
    """
    f = problem.rhs
    rtol, atol = problem.rtol, problem.atol
    t0, t1 = float(problem.t0), float(problem.t1)
    span = t1 - t0
    h_min = 1e-12 * span
    times = problem._times
    stats = StepStats()

    shape = problem.y0.shape
    dim = problem.y0.size
    record = observer if observer is not None else (lambda t, v: v.copy())
    out = []

    # complex vectors are combined through float views with the real tableau
    K = np.empty((9, dim), dtype=complex)
    Kf = K.view(np.float64)
    y_cur = problem.y0.reshape(-1).copy()
    y_new = np.empty(dim, dtype=complex)
    stage = np.empty(dim, dtype=complex)
    err_buf = np.empty(2 * dim)

    def fnorm(v):
        w = v.view(np.float64)
        return math.sqrt(float(np.dot(w, w)))

    i_sample = 0
    while i_sample < times.size and times[i_sample] == t0:
        out.append(record(t0, y_cur.reshape(shape)))
        i_sample += 1

    K[0] = np.asarray(f(t0, y_cur.reshape(shape))).reshape(-1)
    stats.rhs_evaluations += 1
    t = t0
    if problem.first_step:
        h = problem.first_step
    else:
        flat_f = lambda s, v: np.asarray(f(s, v.reshape(shape))).reshape(-1)  # noqa: E731
        h = _initial_step(flat_f, t0, y_cur.copy(), K[0].copy(), rtol, atol, span)
        stats.rhs_evaluations += 1
    h = min(h, problem.max_step)
    norm_cur = fnorm(y_cur)

    while t < t1:
        target = times[i_sample] if i_sample < times.size else t1
        h_free = h
        landing = False
        if t + h >= target - 1e-14 * max(1.0, abs(target)):
            h = target - t
            landing = True

        for s in range(1, 9):
            buf = y_new if s == 8 else stage
            bf = buf.view(np.float64)
            np.dot(_A[s, :s], Kf[:s], out=bf)
            bf *= h
            bf += y_cur.view(np.float64)
            K[s] = np.asarray(f(t + _C[s] * h, buf.reshape(shape))).reshape(-1)
        stats.rhs_evaluations += 8
        # stage 8 sits at the sixth-order solution
        np.dot(_E, Kf, out=err_buf)
        err = abs(h) * math.sqrt(float(np.dot(err_buf, err_buf)))
        norm_new = fnorm(y_new)
        scale = atol + rtol * max(norm_cur, norm_new)
        ratio = err / scale

        if not math.isfinite(ratio):
            stats.rejected_steps += 1
            h *= 0.25
            if h < h_min:
                raise IntegrationError(f"non-finite right-hand side near t={t}", stats)
            continue

        if ratio <= 1.0:
            t_new = target if landing else t + h
            if problem.post_step is not None:
                fixed = np.asarray(problem.post_step(y_new.reshape(shape))).reshape(-1)
                if fixed is not y_new:
                    y_new[:] = fixed
                norm_new = fnorm(y_new)
            K[0] = K[8]
            y_cur, y_new = y_new, y_cur
            norm_cur = norm_new
            t = t_new
            stats.accepted_steps += 1
            stats.max_error_estimate = max(stats.max_error_estimate, err)
            factor = 5.0 if ratio == 0 else min(5.0, max(0.2, SAFETY * ratio ** (-1.0 / (ERROR_ORDER + 1))))
            h_next = h * factor
            if landing:
                # the landing step was shortened artificially
                h_next = max(h_next, h_free)
                while i_sample < times.size and times[i_sample] == t:
                    out.append(record(t, y_cur.reshape(shape)))
                    i_sample += 1
            h = min(h_next, problem.max_step)
        else:
            stats.rejected_steps += 1
            h *= max(0.2, SAFETY * ratio ** (-1.0 / (ERROR_ORDER + 1)))
            if h < h_min:
                raise IntegrationError(
                    f"step size underflow at t={t} (h={h:.3e} < {h_min:.3e})", stats)

    if observer is None:
        return np.array(out), stats
    return out, stats
