"""Independent reference computations for the special constants.

Nothing here shares code with :mod:`.constants`; the two routes are
compared at import time and in the test-suite.
"""
from __future__ import annotations

import cmath
import math

import numpy as np

# Lanczos approximation, g = 7, nine coefficients.
_LANCZOS_G = 7
_LANCZOS_COEFFS = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


def zeta_direct(k: int, terms: int = 100_000) -> float:
    """``zeta(k)`` by direct summation plus a midpoint integral tail.

    The tail ``sum_{m > M} m^-k`` is replaced by the integral of ``x^-k``
    from ``M + 1/2``; the error is ``O(M^{-k-1})``.
    """
    m = np.arange(terms, 0, -1, dtype=float)
    head = math.fsum(m ** (-float(k)))
    tail = (terms + 0.5) ** (1 - k) / (k - 1)
    return head + tail


def euler_gamma_richardson(levels: int = 7, base: int = 16) -> float:
    """Euler's constant from ``H_n - ln n`` at ``n = base * 2^j``, Richardson-extrapolated in ``1/n``."""
    ns = [base * 2**j for j in range(levels)]
    row = []
    for n in ns:
        h = math.fsum(1.0 / np.arange(n, 0, -1, dtype=float))
        row.append(h - math.log(n))
    table = [row]
    for p in range(1, levels):
        prev = table[-1]
        factor = 2.0**p
        table.append([(factor * prev[i + 1] - prev[i]) / (factor - 1.0) for i in range(len(prev) - 1)])
    return table[-1][0]


def lanczos_gamma(z: complex) -> complex:
    """Gamma function by the Lanczos formula, with reflection for ``Re z < 1/2``."""
    z = complex(z)
    if z.real < 0.5:
        return cmath.pi / (cmath.sin(cmath.pi * z) * lanczos_gamma(1.0 - z))
    z -= 1.0
    x = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        x += _LANCZOS_COEFFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return cmath.sqrt(2 * cmath.pi) * t ** (z + 0.5) * cmath.exp(-t) * x


def lanczos_log_gamma(x: float) -> float:
    """``log Gamma(x)`` for real ``x > 0``."""
    x = float(x)
    if x <= 0:
        raise ValueError("lanczos_log_gamma needs x > 0")
    if x < 0.5:
        return math.log(math.pi / math.sin(math.pi * x)) - lanczos_log_gamma(1.0 - x)
    z = x - 1.0
    acc = _LANCZOS_COEFFS[0]
    for i in range(1, len(_LANCZOS_COEFFS)):
        acc += _LANCZOS_COEFFS[i] / (z + i)
    t = z + _LANCZOS_G + 0.5
    return 0.5 * math.log(2 * math.pi) + (z + 0.5) * math.log(t) - t + math.log(acc)
