"""Degeneration test, Hodge-style splitting and the perturbed projection ``T``.

``build_splitting`` realizes ``H(A, d)`` as the harmonic subspace
``ker d ∩ ker d^*`` with inclusion ``i``, projection ``p = i^*`` and
homotopy ``h = -d^+``. Then ``p i = 1``, ``i p = 1 + d h + h d`` and
``h^2 = h i = p h = 0``; with this sign ``d h d = -d``.

Perturbing ``d`` by ``u Delta`` gives the projection
``T = p (1 - u Delta h)^{-1} = sum_k u^k p (Delta h)^k`` onto
``H(A, d)[[u]]`` and the transferred differential
``sum_k u^{k+1} p (Delta h)^k Delta i``; ``T (d + u Delta)`` equals the
transferred differential composed with ``T``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..algebra_core.linalg import rank
from ..errors import UsageError
from .algebra import BVAlgebra

SPLIT_TOL = 1e-9


@dataclass(frozen=True)
class DegenerationRow:
    n: int
    dim: int
    expected: int
    free: bool


@dataclass(frozen=True)
class DegenerationReport:
    dim_h: int
    rows: tuple

    @property
    def degenerate(self) -> bool:
        return all(r.free for r in self.rows)

    def first_failure(self) -> int | None:
        for r in self.rows:
            if not r.free:
                return r.n
        return None

    def to_json(self) -> dict:
        return {
            "dim_h": self.dim_h,
            "degenerate": self.degenerate,
            "rows": [{"N": r.n, "dim": r.dim, "expected": r.expected, "free": r.free} for r in self.rows],
        }


def truncated_differential(a: BVAlgebra, n: int) -> np.ndarray:
    """Matrix of ``d + u Delta`` on ``A[u]/(u^n)``, blocks ordered by the power of ``u``."""
    dim = a.dim
    m = np.zeros((n * dim, n * dim), dtype=complex)
    for t in range(n):
        m[t * dim:(t + 1) * dim, t * dim:(t + 1) * dim] = a.d
        if t + 1 < n:
            m[(t + 1) * dim:(t + 2) * dim, t * dim:(t + 1) * dim] = a.delta
    return m


def check_degeneration(a: BVAlgebra, nmax: int, tol: float = SPLIT_TOL) -> DegenerationReport:
    """Compare ``dim H(A[u]/(u^N), d + u Delta)`` with ``N dim H(A, d)`` for ``N <= nmax``.

    Examples
    --------
    >>> from nchodge.bv_formal.generators import grassmann_even_laplacian
    >>> [r.dim for r in check_degeneration(grassmann_even_laplacian(), 2).rows]
    [4, 6]
    """
    if int(nmax) != nmax or nmax < 1:
        raise UsageError("Nmax must be an integer >= 1")
    dim_h = a.cohomology_dim(tol)
    rows = []
    for n in range(1, int(nmax) + 1):
        dim = n * a.dim - 2 * rank(truncated_differential(a, n), tol)
        rows.append(DegenerationRow(n, dim, n * dim_h, dim == n * dim_h))
    return DegenerationReport(dim_h, tuple(rows))


def _pivoted_basis(cols: np.ndarray, r: int) -> np.ndarray:
    """Orthonormal basis of the span of ``cols`` by pivoted Gram-Schmidt.

    At each step the column with the largest residual is taken (first one
    on ties), so an identity input returns the identity.
    """
    res = cols.astype(complex).copy()
    out = []
    for _ in range(r):
        norms = np.linalg.norm(res, axis=0)
        j = int(np.argmax(norms))
        q = res[:, j] / norms[j]
        for v in out:
            q = q - v * np.vdot(v, q)
        q = q / np.linalg.norm(q)
        out.append(q)
        res = res - np.outer(q, q.conj() @ res)
    return np.array(out).T if out else np.zeros((cols.shape[0], 0), dtype=complex)


@dataclass(frozen=True, eq=False)
class Splitting:
    """Inclusion ``incl`` (D x r), projection ``proj`` (r x D) and homotopy ``h`` (D x D).

    ``parity[k]`` is the parity of the ``k``-th cohomology basis vector.
    """

    incl: np.ndarray
    proj: np.ndarray
    h: np.ndarray
    parity: np.ndarray

    @property
    def dim_h(self) -> int:
        return int(self.incl.shape[1])

    def identity_residuals(self, a: BVAlgebra) -> dict:
        i, p, h, d = self.incl, self.proj, self.h, a.d
        dim = a.dim

        def mx(x):
            return float(np.max(np.abs(x), initial=0.0))

        return {
            "p_i": mx(p @ i - np.eye(self.dim_h)),
            "i_p": mx(i @ p - np.eye(dim) - d @ h - h @ d),
            "h_h": mx(h @ h),
            "h_i": mx(h @ i),
            "p_h": mx(p @ h),
            "d_i": mx(d @ i),
            "p_d": mx(p @ d),
            "d_h_d": mx(d @ h @ d + d),
        }

    def t_terms(self, a: BVAlgebra, order: int) -> list:
        """``T_k = p (Delta h)^k`` for ``k = 0..order``; ``T = sum_k u^k T_k``."""
        out = [self.proj.copy()]
        dh = a.delta @ self.h
        for _ in range(order):
            out.append(out[-1] @ dh)
        return out

    def transferred_differential(self, a: BVAlgebra, order: int) -> list:
        """Coefficients of ``u^1..u^{order}`` of the transferred differential on ``H(A, d)[[u]]``."""
        return [t @ a.delta @ self.incl for t in self.t_terms(a, order - 1)]

    def apply_t(self, a: BVAlgebra, coeffs: np.ndarray, u_min: int) -> tuple:
        """Apply ``T`` to a Laurent vector ``sum_j coeffs[j - u_min] u^j``.

        Returns ``(out, u_min)`` on the same window; terms pushed above the
        window are dropped.
        """
        coeffs = np.asarray(coeffs, dtype=complex)
        width = coeffs.shape[0]
        terms = self.t_terms(a, width - 1)
        out = np.zeros((width, self.dim_h), dtype=complex)
        for j in range(width):
            for k in range(j + 1):
                out[j] += terms[k] @ coeffs[j - k]
        return out, u_min


def build_splitting(a: BVAlgebra, tol: float = SPLIT_TOL) -> Splitting:
    """Harmonic splitting of ``(A, d)``; see the module docstring for the identities."""
    d = a.d
    pinv = np.linalg.pinv(d, rcond=tol)
    harm = np.eye(a.dim) - d @ pinv - pinv @ d
    incl = _pivoted_basis(harm, a.cohomology_dim(tol))
    par = []
    for col in incl.T:
        p = a.parity_of(col, 1e-8)
        if p is None:
            raise UsageError("harmonic basis vector is not homogeneous")
        par.append(p)
    return Splitting(incl, incl.conj().T, -pinv, np.array(par, dtype=int))
