"""The classical flat section of ``CP^{n-1}`` and its constant normalization.

With ``L = log(-u)`` (principal branch, so ``u`` must avoid ``[0, inf)``)
the classical ``u``-connection ``d/du + u^-2 K + u^-1 Gr`` equals
``P^-1 o d/du o P`` for ``P(u) = exp(L Gr) exp((L/u) K)``. The classical
section comes from the Laurent expansion of ``(-u)^{(1-n)/2} (-u)^{ns}
Gamma(s)^n`` in ``s``, and ``P psi_cl`` is a constant vector.
"""
from __future__ import annotations

import cmath

import numpy as np

from ..algebra_core.constants import log_gamma_taylor
from ..algebra_core.linalg import matrix_exp_poly
from ..algebra_core.series import exp_linear, series_exp
from ..errors import DomainError, UsageError
from ..quantum_connection import GradingOperator, kappa_matrix


def _log_minus_u(u) -> complex:
    u = complex(u)
    if u.imag == 0 and u.real >= 0:
        raise DomainError(f"u = {u} lies on the branch cut [0, inf) of log(-u)")
    if not (np.isfinite(u.real) and np.isfinite(u.imag)):
        raise DomainError("u must be finite")
    return cmath.log(-u)


def _check_n(n) -> int:
    if int(n) != n or n < 1:
        raise UsageError("n must be an integer >= 1")
    return int(n)


def conjugating_factor(n: int, u, grading=None) -> np.ndarray:
    """``P(u) = exp(log(-u) Gr) exp((log(-u)/u) K)``."""
    n = _check_n(n)
    u = complex(u)
    big_l = _log_minus_u(u)
    gr = GradingOperator.cpn(n).matrix if grading is None else np.asarray(grading, dtype=complex)
    return matrix_exp_poly(big_l * gr, "diagonal") @ matrix_exp_poly((big_l / u) * kappa_matrix(n), "nilpotent")


def psi_cl_coeffs(n: int, u) -> np.ndarray:
    """Classical flat section at ``u``; entry ``k`` is the coefficient of ``h^k``.

    Reads off the ``s^{-(n-k)}`` Laurent coefficients of
    ``(-u)^{(1-n)/2} (-u)^{ns} Gamma(s)^n``, rescaled by ``(-u)^{n-k-1}``.

    Examples
    --------
    >>> psi_cl_coeffs(2, -1.0).real.round(10)
    array([ 1.        , -1.15443133])
    """
    n = _check_n(n)
    big_l = _log_minus_u(u)
    # s^n Gamma(s)^n (-u)^{ns} = exp(n log Gamma(1+s) + n s L)
    g = series_exp(log_gamma_taylor(n) * n) * exp_linear("s", n, n * big_l)
    pref = cmath.exp((1 - n) / 2 * big_l)
    k = np.arange(n)
    return pref * np.exp((n - 1 - k) * big_l) * g.coeffs


def psi_const(n: int, u) -> np.ndarray:
    """``P(u) psi_cl(u)``; independent of ``u`` and equal to the Taylor coefficients of ``Gamma(1+s)^n``."""
    return conjugating_factor(n, u) @ psi_cl_coeffs(n, u)


def classical_section(n: int, u, psi0, u0=-1.0) -> np.ndarray:
    """Exact flat section of the classical connection through ``psi0`` at ``u0``: ``P(u)^-1 P(u0) psi0``."""
    return np.linalg.solve(conjugating_factor(n, u), conjugating_factor(n, u0) @ np.asarray(psi0, dtype=complex))


def check_conjugation_identity(n: int, u, v, grading=None, step: float | None = None) -> float:
    """Residual of ``d/du + u^-2 K + u^-1 Gr = P^-1 o d/du o P`` on the constant section ``v``.

    Both sides act on the constant function ``v``: the left gives
    ``(u^-2 K + u^-1 Gr) v`` and the right ``P^-1 P' v`` with ``P'`` from the
    five-point central difference (error ``O(h^4)``, so a moderate step
    keeps both truncation and cancellation near ``1e-9``). ``grading``
    replaces ``Gr`` in the operator only; ``P`` is always built from the
    true grading.
    """
    n = _check_n(n)
    u = complex(u)
    v = np.asarray(v, dtype=complex).reshape(-1)
    if v.size != n:
        raise UsageError(f"v must have length {n}")
    gr = GradingOperator.cpn(n).matrix if grading is None else np.asarray(grading, dtype=complex)
    lhs = (kappa_matrix(n) / u**2 + gr / u) @ v
    h = step if step is not None else 3e-4 * abs(u)

    def p(x):
        return conjugating_factor(n, x)

    dp = (8 * (p(u + h) - p(u - h)) - (p(u + 2 * h) - p(u - 2 * h))) / (12 * h)
    rhs = np.linalg.solve(conjugating_factor(n, u), dp @ v)
    return float(np.max(np.abs(lhs - rhs), initial=0.0))
