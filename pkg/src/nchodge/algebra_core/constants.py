"""Euler's constant, zeta values and the Taylor series of ``log Gamma(1+s)``.

The table is filled once at import and cross-checked against
:mod:`.oracles`; a disagreement raises :class:`SelfCheckError` and the
package refuses to load.
"""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
import math

import numpy as np

from ..errors import SelfCheckError, UsageError
from . import oracles
from .series import TruncatedSeries

# B_2, B_4, ..., B_16
_BERNOULLI = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
)

SELF_CHECK_TOL = 1e-11
SELF_CHECK_ZETAS = range(2, 9)


def _zeta_tail_from(k: int, start: int, cutoff: int = 10) -> float:
    """``sum_{m >= start} m^-k`` by Euler-Maclaurin after ``cutoff`` explicit terms."""
    n = max(cutoff, start)
    head = math.fsum(float(m) ** -k for m in range(n - 1, start - 1, -1))
    corr = n ** (1 - k) / (k - 1) + 0.5 * n ** (-k)
    rising = float(k)  # k (k+1) ... (k + 2j - 2)
    for j, b in enumerate(_BERNOULLI, start=1):
        corr += float(b) / math.factorial(2 * j) * rising * n ** (-k - 2 * j + 1)
        rising *= (k + 2 * j - 1) * (k + 2 * j)
    return head + corr


@lru_cache(maxsize=None)
def zeta(k: int) -> float:
    """Riemann zeta at an integer ``k >= 2``."""
    if int(k) != k or k < 2:
        raise UsageError(f"zeta(k) needs an integer k >= 2, got {k!r}")
    return 1.0 + _zeta_tail_from(int(k), 2)


@lru_cache(maxsize=None)
def euler_gamma() -> float:
    """Euler's constant via ``1 - sum_{k>=2} (zeta(k) - 1) / k``."""
    terms = []
    k = 2
    while True:
        t = _zeta_tail_from(k, 2) / k
        terms.append(t)
        if t < 1e-20:
            break
        k += 1
    return 1.0 - math.fsum(terms)


def log_gamma_taylor(order: int) -> TruncatedSeries:
    """Taylor series of ``log Gamma(1+s)`` at ``s = 0`` to ``s^{order-1}``.

    Coefficients: ``-gamma`` at ``s`` and ``(-1)^k zeta(k) / k`` at ``s^k``.
    """
    if order < 1:
        raise UsageError("log_gamma_taylor needs order >= 1")
    c = np.zeros(order, dtype=complex)
    if order > 1:
        c[1] = -euler_gamma()
    for k in range(2, order):
        c[k] = (-1) ** k * zeta(k) / k
    return TruncatedSeries("s", c)


def self_check(tol: float = SELF_CHECK_TOL) -> dict:
    """Compare the table against the oracles; returns the deviations."""
    report = {"euler_gamma": abs(euler_gamma() - oracles.euler_gamma_richardson())}
    for k in SELF_CHECK_ZETAS:
        report[f"zeta({k})"] = abs(zeta(k) - oracles.zeta_direct(k))
    bad = {name: dev for name, dev in report.items() if not dev <= tol}
    if bad:
        raise SelfCheckError(f"constants disagree with their oracles: {bad}")
    return report


STARTUP_REPORT = self_check()
