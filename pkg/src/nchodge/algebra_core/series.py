"""Truncated and Laurent power series in a single formal variable.

A :class:`TruncatedSeries` of order ``N`` lives in ``C[x]/(x^N)``: the order
is fixed when the value is built and no operation ever extends it.
"""
from __future__ import annotations

from dataclasses import dataclass
import math

import numpy as np

from ..errors import UsageError

VARIABLES = ("h", "s", "u", "eps")
_ALIASES = {"ε": "eps", "epsilon": "eps"}


def _normalize_var(var: str) -> str:
    var = _ALIASES.get(var, var)
    if var not in VARIABLES:
        raise UsageError(f"unknown series variable {var!r}; expected one of {VARIABLES}")
    return var


def _as_coeffs(coeffs) -> np.ndarray:
    arr = np.array(coeffs, dtype=complex).reshape(-1)
    if not np.all(np.isfinite(arr)):
        raise UsageError("series coefficients must be finite")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class TruncatedSeries:
    """Element of ``C[x]/(x^N)`` with coefficients of ``x^0 .. x^{N-1}``."""

    var: str
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "var", _normalize_var(self.var))
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        if self.coeffs.size == 0:
            raise UsageError("series order must be positive")

    @classmethod
    def zero(cls, var: str, order: int) -> "TruncatedSeries":
        return cls(var, np.zeros(order, dtype=complex))

    @classmethod
    def one(cls, var: str, order: int) -> "TruncatedSeries":
        c = np.zeros(order, dtype=complex)
        c[0] = 1.0
        return cls(var, c)

    @classmethod
    def monomial(cls, var: str, order: int, degree: int, coeff=1.0) -> "TruncatedSeries":
        c = np.zeros(order, dtype=complex)
        if degree < order:
            c[degree] = coeff
        return cls(var, c)

    @property
    def order(self) -> int:
        return int(self.coeffs.size)

    def __getitem__(self, k: int) -> complex:
        return complex(self.coeffs[k])

    def __len__(self) -> int:
        return self.order

    def _check_compatible(self, other: "TruncatedSeries") -> None:
        if not isinstance(other, TruncatedSeries):
            raise UsageError(f"expected TruncatedSeries, got {type(other).__name__}")
        if other.var != self.var or other.order != self.order:
            raise UsageError(
                f"incompatible series: ({self.var}, order {self.order}) vs "
                f"({other.var}, order {other.order})"
            )

    def _coerce(self, other) -> "TruncatedSeries":
        if isinstance(other, TruncatedSeries):
            self._check_compatible(other)
            return other
        if isinstance(other, (int, float, complex, np.number)):
            return TruncatedSeries.monomial(self.var, self.order, 0, other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(self.var, self.coeffs + other.coeffs)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.var, -self.coeffs)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return TruncatedSeries(self.var, self.coeffs - other.coeffs)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return TruncatedSeries(self.var, self.coeffs * other)
        if isinstance(other, TruncatedSeries):
            return series_mul(self, other)
        return NotImplemented

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TruncatedSeries(self.var, self.coeffs / scalar)

    def __pow__(self, k: int):
        if not isinstance(k, (int, np.integer)) or k < 0:
            raise UsageError("only non-negative integer powers are supported")
        out = TruncatedSeries.one(self.var, self.order)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def evaluate(self, x: complex) -> complex:
        """Sum the stored coefficients at ``x`` (Horner)."""
        acc = 0j
        for c in self.coeffs[::-1]:
            acc = acc * x + c
        return acc

    def allclose(self, other: "TruncatedSeries", tol: float = 1e-9) -> bool:
        self._check_compatible(other)
        return bool(np.max(np.abs(self.coeffs - other.coeffs), initial=0.0) <= tol)

    def __repr__(self) -> str:
        terms = ", ".join(f"{c:.10g}" for c in self.coeffs)
        return f"TruncatedSeries({self.var!r}, [{terms}])"


def series_mul(a: TruncatedSeries, b: TruncatedSeries) -> TruncatedSeries:
    """Cauchy product truncated at the common order."""
    a._check_compatible(b)
    n = a.order
    return TruncatedSeries(a.var, np.convolve(a.coeffs, b.coeffs)[:n])


def series_exp(a: TruncatedSeries) -> TruncatedSeries:
    """``exp(a) = sum_{k < N} a^k / k!`` for ``a`` with zero constant term."""
    if abs(a.coeffs[0]) > 1e-12:
        raise UsageError("series_exp requires a zero constant term")
    a = a - complex(a.coeffs[0])
    out = TruncatedSeries.one(a.var, a.order)
    term = out
    for k in range(1, a.order):
        term = term * a / k
        out = out + term
    return out


def series_log(a: TruncatedSeries) -> TruncatedSeries:
    """``log(a)`` for ``a`` with constant term exactly 1."""
    if abs(a.coeffs[0] - 1.0) > 1e-12:
        raise UsageError("series_log requires constant term 1")
    b = a - complex(a.coeffs[0])
    out = TruncatedSeries.zero(a.var, a.order)
    power = TruncatedSeries.one(a.var, a.order)
    for k in range(1, a.order):
        power = power * b
        out = out + power * ((-1) ** (k + 1) / k)
    return out


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Coefficients of ``x^m, x^{m+1}, ..., x^{m+N-1}`` with ``m`` possibly negative.

    Terms of degree ``>= min_degree + N`` are unknown, not zero; products
    keep only the degrees that are determined by both factors.
    """

    var: str
    min_degree: int
    coeffs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "var", _normalize_var(self.var))
        object.__setattr__(self, "coeffs", _as_coeffs(self.coeffs))
        object.__setattr__(self, "min_degree", int(self.min_degree))
        if self.coeffs.size == 0:
            raise UsageError("Laurent series needs at least one coefficient")

    @classmethod
    def from_truncated(cls, t: TruncatedSeries, shift: int = 0) -> "LaurentSeries":
        """``x^shift * t``."""
        return cls(t.var, shift, t.coeffs)

    @property
    def max_known_degree(self) -> int:
        return self.min_degree + self.coeffs.size - 1

    def coeff(self, degree: int) -> complex:
        if degree > self.max_known_degree:
            raise UsageError(f"coefficient of degree {degree} is beyond the truncation")
        if degree < self.min_degree:
            return 0j
        return complex(self.coeffs[degree - self.min_degree])

    def __mul__(self, other):
        if isinstance(other, (int, float, complex, np.number)):
            return LaurentSeries(self.var, self.min_degree, self.coeffs * other)
        if not isinstance(other, LaurentSeries):
            return NotImplemented
        if other.var != self.var:
            raise UsageError("Laurent series in different variables")
        n = min(self.coeffs.size, other.coeffs.size)
        prod = np.convolve(self.coeffs, other.coeffs)[:n]
        return LaurentSeries(self.var, self.min_degree + other.min_degree, prod)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"LaurentSeries({self.var!r}, min_degree={self.min_degree}, coeffs={self.coeffs!r})"


def exp_linear(var: str, order: int, slope: complex) -> TruncatedSeries:
    """Taylor coefficients of ``exp(slope * x)``; used for ``(-u)^{ns}``."""
    c = np.array([slope**k / math.factorial(k) for k in range(order)], dtype=complex)
    return TruncatedSeries(var, c)
