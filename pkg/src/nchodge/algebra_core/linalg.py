"""Small dense complex linear algebra used throughout the package.

Matrices are plain ``numpy`` arrays of dtype ``complex``; this module only
adds the operations with explicit tolerance contracts.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import UsageError

DEFAULT_TOL = 1e-9


def as_matrix(m, rows: int | None = None, cols: int | None = None) -> np.ndarray:
    """Coerce to a finite 2-D complex array, optionally checking its shape."""
    arr = np.array(m, dtype=complex)
    if arr.ndim != 2:
        raise UsageError(f"expected a 2-D matrix, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise UsageError("matrix entries must be finite")
    if rows is not None and arr.shape[0] != rows:
        raise UsageError(f"expected {rows} rows, got {arr.shape[0]}")
    if cols is not None and arr.shape[1] != cols:
        raise UsageError(f"expected {cols} columns, got {arr.shape[1]}")
    return arr


def matrix_exp_poly(m, kind: str, tol: float = 1e-12) -> np.ndarray:
    """Exponential of a nilpotent or diagonal matrix.

    ``kind="nilpotent"`` sums ``M^k / k!`` for ``k < r`` after checking
    ``M^r = 0``; ``kind="diagonal"`` exponentiates the diagonal entrywise.
    """
    m = as_matrix(m)
    r, c = m.shape
    if r != c:
        raise UsageError("matrix_exp_poly needs a square matrix")
    scale = max(1.0, float(np.max(np.abs(m), initial=0.0)))
    if kind == "nilpotent":
        power = np.linalg.matrix_power(m, r)
        if np.max(np.abs(power), initial=0.0) > tol * scale**r:
            raise UsageError("matrix is not nilpotent (M^r != 0)")
        out = np.eye(r, dtype=complex)
        term = np.eye(r, dtype=complex)
        for k in range(1, r):
            term = term @ m / k
            out = out + term
        return out
    if kind == "diagonal":
        off = m - np.diag(np.diag(m))
        if np.max(np.abs(off), initial=0.0) > tol * scale:
            raise UsageError("matrix is not diagonal")
        return np.diag(np.exp(np.diag(m)))
    raise UsageError(f"unknown kind {kind!r}; expected 'nilpotent' or 'diagonal'")


def singular_values(m) -> np.ndarray:
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return np.zeros(0)
    return np.linalg.svd(m, compute_uv=False)


def rank(m, tol: float = DEFAULT_TOL) -> int:
    """Number of singular values above ``tol * sigma_max``; 0 for the zero matrix."""
    if tol <= 0:
        raise UsageError("rank tolerance must be positive")
    s = singular_values(m)
    if s.size == 0 or s[0] == 0.0:
        return 0
    return int(np.count_nonzero(s > tol * s[0]))


def null_space(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ``ker m``."""
    m = np.asarray(m, dtype=complex)
    n = m.shape[1]
    if m.shape[0] == 0 or n == 0:
        return np.eye(n, dtype=complex)
    _, s, vh = np.linalg.svd(m)
    r = 0 if s.size == 0 or s[0] == 0 else int(np.count_nonzero(s > tol * s[0]))
    return vh[r:].conj().T


def column_space(m, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis (columns) of ``im m``."""
    m = np.asarray(m, dtype=complex)
    if m.size == 0:
        return np.zeros((m.shape[0], 0), dtype=complex)
    u, s, _ = np.linalg.svd(m, full_matrices=False)
    r = 0 if s[0] == 0 else int(np.count_nonzero(s > tol * s[0]))
    return u[:, :r]


def orthogonal_complement(basis, dim: int, tol: float = DEFAULT_TOL) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``span(basis)`` in ``C^dim``."""
    basis = np.asarray(basis, dtype=complex).reshape(dim, -1)
    if basis.shape[1] == 0:
        return np.eye(dim, dtype=complex)
    return null_space(basis.conj().T, tol)


def same_subspace(a, b, tol: float = DEFAULT_TOL) -> bool:
    """True when the column spans of ``a`` and ``b`` coincide."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    ra, rb = rank(a, tol) if a.size else 0, rank(b, tol) if b.size else 0
    if ra != rb:
        return False
    if ra == 0:
        return True
    return rank(np.hstack([a, b]), tol) == ra


def principal_root(z: complex, n: int) -> complex:
    """Principal ``n``-th root."""
    if z == 0:
        return 0j
    return complex(abs(z) ** (1.0 / n) * np.exp(1j * np.angle(z) / n))


def factorial(k: int) -> int:
    return math.factorial(k)
