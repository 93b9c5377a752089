"""Exponentially scaled modified Bessel functions of order 0 and 1.

``i0e(z) = exp(-|z|) I0(z)`` and ``i1e(z) = exp(-|z|) I1(z)``.  The ascending
power series is used for small arguments and the Hankel asymptotic expansion
for large ones, which keeps both finite for arguments where ``I0`` itself
overflows.
"""
from __future__ import annotations

import math

_ASYMPTOTIC_FROM = 30.0
_MAX_TERMS = 500


def _series(order: int, z: float) -> float:
    # I_n(z) = sum_k (z/2)^(2k+n) / (k! (k+n)!), accumulated in log-free form
    half = 0.5 * z
    term = half**order / math.factorial(order)
    total = term
    q = half * half
    for k in range(1, _MAX_TERMS):
        term *= q / (k * (k + order))
        total += term
        if term < total * 1e-17:
            break
    return total * math.exp(-z)


def _asymptotic(order: int, z: float) -> float:
    mu = 4.0 * order * order
    term = 1.0
    total = 1.0
    smallest = 1.0
    for k in range(1, 60):
        term *= -(mu - (2 * k - 1) ** 2) / (k * 8.0 * z)
        if abs(term) > smallest:
            break
        smallest = abs(term)
        total += term
        if smallest < 1e-17:
            break
    return total / math.sqrt(2.0 * math.pi * z)


def i0e(z: float) -> float:
    z = abs(float(z))
    if z < _ASYMPTOTIC_FROM:
        return _series(0, z)
    return _asymptotic(0, z)


def i1e(z: float) -> float:
    x = float(z)
    a = abs(x)
    val = _series(1, a) if a < _ASYMPTOTIC_FROM else _asymptotic(1, a)
    return math.copysign(val, x) if x != 0.0 else 0.0
