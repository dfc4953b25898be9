"""Bessel functions of the first kind for the small arguments met in the SRM expansions."""
from __future__ import annotations

import math

from .errors import DomainError, ParameterError

MAX_ORDER = 8
MAX_ARGUMENT = 10.0


def bessel_j(n: int, x: float) -> float:
    """Bessel function ``J_n(x)`` from its power series.

    Summation stops once a term drops below ``1e-18`` in magnitude.  The
    argument is limited to ``|x| <= 10``; in practice the solvers only call it
    with ``x = G / 2 omega``, well below 1.

    Parameters
    ----------
    n : int
        Non-negative order, at most 8.
    x : float
        Real argument.
    """
    if not isinstance(n, int) or isinstance(n, bool) or not 0 <= n <= MAX_ORDER:
        raise ParameterError(f"Bessel order must be an integer in [0, {MAX_ORDER}], got {n!r}")
    x = float(x)
    if not math.isfinite(x) or abs(x) > MAX_ARGUMENT:
        raise DomainError(f"bessel_j argument {x} outside the validated range |x| <= {MAX_ARGUMENT}")
    if x < 0:
        # keep the parity relation exact
        value = bessel_j(n, -x)
        return -value if n % 2 else value

    half = 0.5 * x
    term = half ** n / math.factorial(n)
    total = term
    q = half * half
    k = 0
    while abs(term) >= 1e-18 or k < 1:
        k += 1
        term *= -q / (k * (n + k))
        total += term
        if term == 0.0:
            break
    return total
