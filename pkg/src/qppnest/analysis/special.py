"""Regularized incomplete gamma functions and the chi-square upper tail.

Series expansion when x < a + 1, modified Lentz continued fraction otherwise.
"""

from __future__ import annotations

import math
import sys

from src.qppnest.errors import ParameterError

EPS = 1.0e-15
MAX_ITERATIONS = 100_000
_TINY = sys.float_info.min / sys.float_info.epsilon


def _prefactor(a: float, x: float) -> float:
    return math.exp(-x + a * math.log(x) - math.lgamma(a))


def _lower_series(a: float, x: float) -> float:
    ap = a
    term = 1.0 / a
    total = term
    for _ in range(MAX_ITERATIONS):
        ap += 1.0
        term *= x / ap
        total += term
        if abs(term) < abs(total) * EPS:
            break
    return total * _prefactor(a, x)


def _upper_continued_fraction(a: float, x: float) -> float:
    b = x + 1.0 - a
    c = 1.0 / _TINY
    d = 1.0 / b
    h = d
    for i in range(1, MAX_ITERATIONS):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _TINY:
            d = _TINY
        c = b + an / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < EPS:
            break
    return h * _prefactor(a, x)


def gammainc_upper(a: float, x: float) -> float:
    """Q(a, x) = Γ(a, x) / Γ(a)."""
    if a <= 0.0:
        raise ParameterError("a must be positive")
    if x < 0.0:
        raise ParameterError("x must be non-negative")
    if x == 0.0:
        return 1.0
    if x < a + 1.0:
        return max(0.0, 1.0 - _lower_series(a, x))
    return min(1.0, _upper_continued_fraction(a, x))


def gammainc_lower(a: float, x: float) -> float:
    """P(a, x) = 1 - Q(a, x)."""
    return 1.0 - gammainc_upper(a, x)


def chi_square_p_value(chi2: float, dof: int = 255) -> float:
    """Probability that a chi-square variate with ``dof`` degrees exceeds ``chi2``."""
    if dof < 1:
        raise ParameterError("degrees of freedom must be at least 1")
    if chi2 < 0:
        raise ParameterError("chi-square statistic must be non-negative")
    return gammainc_upper(dof / 2.0, chi2 / 2.0)
