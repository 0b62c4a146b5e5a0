"""Quantum connection of ``CP^{n-1}`` in the ``u`` and ``q`` directions.

In the basis ``1, h, ..., h^{n-1}`` of ``C[h]/(h^n)`` the shift matrix
``S(q) = N + q E_{1n}`` (``N`` the subdiagonal shift) is quantum
multiplication by ``h``, and

    nabla_u = d/du + u^-2 n S(q) + u^-1 Gr,
    nabla_q = d/dq - (q u)^-1 S(q),

with ``Gr = diag(k - (n-1)/2)``. Connection matrices are Laurent
polynomials and are stored as ``{exponent: matrix}``; both classes below
are callable and expose ``terms`` so the transport kernel can evaluate them
without calling back into Python.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra_core.linalg import DEFAULT_TOL
from .algebra_core.serialize import (
    SchemaError,
    complex_from_json,
    complex_to_json,
    matrix_from_json,
    matrix_to_json,
)
from .errors import DomainError, UsageError

EIGENVALUE_TOL = 1e-8
# Eigenvalues closer than this (relative to ||A||) are one repeated exponent.
REPEAT_TOL = 1e-12


def _freeze_terms(terms, rank=None) -> dict:
    out = {}
    for k, m in terms.items():
        if int(k) != k:
            raise UsageError(f"exponent {k!r} is not an integer")
        arr = np.array(m, dtype=complex)
        if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
            raise UsageError(f"term {k} is not a square matrix")
        if rank is None:
            rank = arr.shape[0]
        if arr.shape[0] != rank:
            raise UsageError(f"term {k} has size {arr.shape[0]}, expected {rank}")
        if not np.all(np.isfinite(arr)):
            raise UsageError(f"term {k} has non-finite entries")
        arr.setflags(write=False)
        out[int(k)] = arr
    return dict(sorted(out.items()))


def _eval_terms(terms: dict, rank: int, z: complex, var: str) -> np.ndarray:
    z = complex(z)
    if z == 0 and any(k < 0 for k in terms):
        raise DomainError(f"connection matrix is singular at {var} = 0")
    out = np.zeros((rank, rank), dtype=complex)
    for k, m in terms.items():
        out += m * z**k
    return out


@dataclass(frozen=True, eq=False)
class LaurentMatrix:
    """Matrix-valued Laurent polynomial ``z -> sum_k terms[k] z^k``."""

    var: str
    terms: dict
    rank: int = field(default=0)

    def __post_init__(self):
        if not self.terms:
            raise UsageError("a Laurent matrix needs at least one term")
        terms = _freeze_terms(self.terms)
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "rank", next(iter(terms.values())).shape[0])

    def __call__(self, z) -> np.ndarray:
        return _eval_terms(self.terms, self.rank, z, self.var)

    def derivative(self, z) -> np.ndarray:
        d = {k - 1: k * m for k, m in self.terms.items() if k != 0}
        if not d:
            return np.zeros((self.rank, self.rank), dtype=complex)
        return _eval_terms(d, self.rank, z, self.var)

    def trace_terms(self) -> dict:
        return {k: complex(np.trace(m)) for k, m in self.terms.items()}


@dataclass(frozen=True, eq=False)
class MeromorphicConnection:
    """``d + (sum_k A_k u^k) du`` with pole order at most 2 at ``u = 0``.

    Parameters
    ----------
    rank : int
        Size of the matrices.
    terms : dict
        ``{k: A_k}`` with integer ``k >= -2``.
    meta : dict
        Free-form parameter record, e.g. ``{"n": 3, "q": 1}``.
    """

    rank: int
    terms: dict
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.rank < 1:
            raise UsageError("rank must be positive")
        terms = _freeze_terms(self.terms, self.rank)
        if any(k < -2 for k in terms):
            raise UsageError("pole order at u = 0 exceeds 2")
        object.__setattr__(self, "terms", terms)
        object.__setattr__(self, "meta", dict(self.meta))

    var = "u"

    def term(self, k: int) -> np.ndarray:
        if k in self.terms:
            return self.terms[k]
        return np.zeros((self.rank, self.rank), dtype=complex)

    def __call__(self, u) -> np.ndarray:
        return _eval_terms(self.terms, self.rank, u, "u")

    def derivative(self, u) -> np.ndarray:
        return LaurentMatrix("u", dict(self.terms)).derivative(u)

    def trace_terms(self) -> dict:
        return {k: complex(np.trace(m)) for k, m in self.terms.items()}


@dataclass(frozen=True)
class GradingOperator:
    """Diagonal grading ``Gr``; entries differ by integers."""

    rank: int
    diagonal: tuple

    def __post_init__(self):
        diag = tuple(float(x) for x in self.diagonal)
        if len(diag) != self.rank:
            raise UsageError("diagonal length must equal the rank")
        for x in diag:
            gap = x - diag[0]
            if abs(gap - round(gap)) > 1e-12:
                raise UsageError("grading entries must differ by integers")
        object.__setattr__(self, "diagonal", diag)

    @classmethod
    def cpn(cls, n: int) -> "GradingOperator":
        """``diag((1-n)/2, ..., (n-1)/2)``."""
        return cls(n, tuple(k - (n - 1) / 2 for k in range(n)))

    @property
    def matrix(self) -> np.ndarray:
        return np.diag(np.array(self.diagonal, dtype=complex))


@dataclass(frozen=True)
class ShiftMatrix:
    """Ones on the subdiagonal and ``corner`` in the top-right entry."""

    rank: int
    corner: complex = 0j

    @property
    def matrix(self) -> np.ndarray:
        return shift_matrix(self.rank, self.corner)


def shift_matrix(n: int, q=0.0) -> np.ndarray:
    """``N + q E_{1n}``: multiplication by ``h`` in the small quantum ring."""
    if n < 1:
        raise UsageError("shift_matrix needs n >= 1")
    m = np.diag(np.ones(n - 1, dtype=complex), -1)
    m[0, n - 1] += complex(q)
    return m


def kappa_matrix(n: int) -> np.ndarray:
    """Classical ``A_{-2}`` at ``q = 0``: ``n N``."""
    return n * shift_matrix(n, 0.0)


def build_cpn_u_connection(n: int, q=1.0) -> MeromorphicConnection:
    """``u``-connection of ``CP^{n-1}`` at Novikov parameter ``q``.

    Examples
    --------
    >>> c = build_cpn_u_connection(2, 1.0)
    >>> c.terms[-2].real
    array([[0., 2.],
           [2., 0.]])
    """
    if int(n) != n or n < 2:
        raise UsageError("build_cpn_u_connection needs an integer n >= 2")
    n = int(n)
    q = complex(q)
    if not np.isfinite(q):
        raise UsageError("q must be finite")
    terms = {-2: n * shift_matrix(n, q), -1: GradingOperator.cpn(n).matrix}
    return MeromorphicConnection(n, terms, {"n": n, "q": q})


def build_cpn_q_connection(n: int, u) -> LaurentMatrix:
    """``q``-connection matrix ``-(q u)^{-1} S(q)`` as a Laurent polynomial in ``q``.

    The result is callable; evaluating it at ``q = 0`` raises
    :class:`DomainError`.
    """
    if int(n) != n or n < 2:
        raise UsageError("build_cpn_q_connection needs an integer n >= 2")
    n = int(n)
    u = complex(u)
    if u == 0:
        raise DomainError("u must be nonzero")
    corner = np.zeros((n, n), dtype=complex)
    corner[0, n - 1] = 1.0
    return LaurentMatrix("q", {-1: -shift_matrix(n, 0.0) / u, 0: -corner / u})


def exponent_eigenvalues(conn: MeromorphicConnection, tol: float = EIGENVALUE_TOL) -> list:
    """Distinct eigenvalues of ``A_{-2}`` sorted by ``(Re, Im)``.

    Eigenvalues agreeing to ``REPEAT_TOL * ||A_{-2}||`` are one repeated
    exponent; distinct eigenvalues closer than ``tol`` cannot be told apart
    and raise :class:`UsageError`.
    """
    if -2 not in conn.terms:
        raise UsageError("connection has no u^-2 term")
    a = conn.terms[-2]
    ev = np.linalg.eigvals(a)
    scale = max(1.0, float(np.linalg.norm(a, 2)))
    distinct: list[complex] = []
    for z in sorted(ev, key=lambda z: (z.real, z.imag)):
        for c in distinct:
            gap = abs(z - c)
            if gap <= REPEAT_TOL * scale:
                break
            if gap <= tol:
                raise UsageError(f"exponents {c} and {z} collide within tolerance {tol}")
        else:
            distinct.append(complex(z))
    return sorted(distinct, key=lambda z: (round(z.real, 12), round(z.imag, 12)))


def check_commutation(conn: MeromorphicConnection, gr, tol: float = DEFAULT_TOL) -> bool:
    """True iff ``Gr K - K Gr = K`` for ``K = A_{-2}``."""
    k = conn.term(-2)
    g = gr.matrix if isinstance(gr, GradingOperator) else np.asarray(gr, dtype=complex)
    lhs = g @ k - k @ g
    scale = max(1.0, float(np.max(np.abs(k), initial=0.0)))
    return bool(np.max(np.abs(lhs - k), initial=0.0) <= tol * scale)


def flatness_residual(n: int, u, q) -> float:
    """Max-norm of ``d_u A_q - d_q A_u + [A_u, A_q]`` at ``(u, q)`` (exact derivatives)."""
    u, q = complex(u), complex(q)
    if u == 0 or q == 0:
        raise DomainError("flatness is evaluated away from u = 0 and q = 0")
    s = shift_matrix(n, q)
    e = shift_matrix(n, 1.0) - shift_matrix(n, 0.0)
    a_u = n * s / u**2 + GradingOperator.cpn(n).matrix / u
    a_q = -s / (q * u)
    du_aq = s / (q * u**2)
    dq_au = n * e / u**2
    curv = du_aq - dq_au + a_u @ a_q - a_q @ a_u
    return float(np.max(np.abs(curv)))


def connection_to_json(conn: MeromorphicConnection) -> dict:
    meta = {}
    for key, val in conn.meta.items():
        meta[key] = complex_to_json(val) if isinstance(val, complex) else val
    return {
        "rank": conn.rank,
        "terms": {str(k): matrix_to_json(m) for k, m in conn.terms.items()},
        "meta": meta,
    }


def connection_from_json(obj, path: str = "") -> MeromorphicConnection:
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a connection object")
    for key in ("rank", "terms"):
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing")
    rank = obj["rank"]
    if not isinstance(rank, int) or rank < 1:
        raise SchemaError(f"{path}/rank", "must be a positive integer")
    if not isinstance(obj["terms"], dict):
        raise SchemaError(f"{path}/terms", "expected an object keyed by exponent")
    terms = {}
    for key, val in obj["terms"].items():
        try:
            k = int(key)
        except ValueError:
            raise SchemaError(f"{path}/terms/{key}", "exponent must be an integer") from None
        m = matrix_from_json(val, f"{path}/terms/{key}")
        if m.shape != (rank, rank):
            raise SchemaError(f"{path}/terms/{key}", f"expected a {rank}x{rank} matrix")
        if k < -2:
            raise SchemaError(f"{path}/terms/{key}", "pole order exceeds 2")
        terms[k] = m
    meta = dict(obj.get("meta", {}))
    if "q" in meta:
        meta["q"] = complex_from_json(meta["q"], f"{path}/meta/q")
    return MeromorphicConnection(rank, terms, meta)
