"""Gamma class, the scaling operator and the rational-structure lattice map.

Everything lives in ``C[h]/(h^n)``, the cohomology ring of ``CP^{n-1}``,
with basis ``1, h, ..., h^{n-1}``. A cohomology element is a
:class:`TruncatedSeries` in ``h`` of order ``n``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .algebra_core.constants import log_gamma_taylor
from .algebra_core.series import TruncatedSeries, series_exp
from .errors import UsageError

TWO_PI_I = 2j * np.pi


def _compose(f: TruncatedSeries, x: TruncatedSeries) -> TruncatedSeries:
    """``f(x)`` for ``x`` with zero constant term (Horner in the ring)."""
    out = TruncatedSeries.zero(x.var, x.order)
    for k in range(min(f.order, x.order) - 1, -1, -1):
        out = out * x + complex(f.coeffs[k])
    return out


def gamma_hat_from_roots(roots, n: int) -> TruncatedSeries:
    """Product of ``Gamma(1 + lambda)`` over the Chern roots in ``C[h]/(h^n)``.

    Parameters
    ----------
    roots : list of TruncatedSeries
        Nilpotent classes in ``h`` of order ``n``; repeats are allowed.
    n : int
        Ring dimension, so that ``h^n = 0``.
    """
    if n < 1:
        raise UsageError("ring dimension n must be >= 1")
    log_gamma = log_gamma_taylor(n)
    total = TruncatedSeries.zero("h", n)
    for i, lam in enumerate(roots):
        if not isinstance(lam, TruncatedSeries) or lam.var != "h" or lam.order != n:
            raise UsageError(f"root {i} must be a series in h of order {n}")
        if abs(lam.coeffs[0]) > 0:
            raise UsageError(f"root {i} is not nilpotent (nonzero constant term)")
        total = total + _compose(log_gamma, lam)
    return series_exp(total)


def gamma_hat_cpn(n: int) -> TruncatedSeries:
    """Gamma class of ``CP^{n-1}``: ``Gamma(1+h)^n`` in ``C[h]/(h^n)``."""
    if n < 1:
        raise UsageError("gamma_hat_cpn needs n >= 1")
    h = TruncatedSeries.monomial("h", n, 1)
    return gamma_hat_from_roots([h] * n, n)


def d_operator(n: int) -> np.ndarray:
    """``diag(1, 2 pi i, ..., (2 pi i)^{n-1})``: ``(2 pi i)^{k/2}`` on ``H^k`` with ``h^k`` in ``H^{2k}``."""
    if n < 1:
        raise UsageError("d_operator needs n >= 1")
    return np.diag([TWO_PI_I**k for k in range(n)]).astype(complex)


def multiplication_matrix(a: TruncatedSeries) -> np.ndarray:
    """Matrix of cup product by ``a`` on coefficient columns (lower-triangular Toeplitz)."""
    n = a.order
    m = np.zeros((n, n), dtype=complex)
    for k in range(n):
        m[np.arange(k, n), np.arange(0, n - k)] = a.coeffs[k]
    return m


@dataclass(frozen=True, eq=False)
class LatticeMap:
    """Scaling by ``d_operator`` followed by cup product with the Gamma class."""

    n: int
    matrix: np.ndarray

    def __call__(self, v) -> np.ndarray:
        return self.matrix @ np.asarray(v, dtype=complex)

    def determinant(self) -> complex:
        return complex(np.prod(np.diag(self.matrix)))


def lattice_map(n: int) -> LatticeMap:
    """Map ``H(X, Q) -> H(X, C)`` whose image is the Gamma-integral structure."""
    if n < 1:
        raise UsageError("lattice_map needs n >= 1")
    m = multiplication_matrix(gamma_hat_cpn(n)) @ d_operator(n)
    m.setflags(write=False)
    return LatticeMap(n, m)
