"""Finite-dimensional Z/2-graded BV algebras and their axioms.

Elements are coefficient vectors in a fixed basis ``e_0..e_{D-1}`` of
homogeneous elements. ``mult[i, j, k]`` is the coefficient of ``e_k`` in
``e_i e_j``; operators act on column vectors, so ``d[:, j]`` is ``d(e_j)``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..algebra_core.linalg import rank
from ..algebra_core.serialize import (
    SchemaError,
    complex_from_json,
    complex_to_json,
    matrix_from_json,
    matrix_to_json,
)
from ..errors import UsageError

AXIOM_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class BVAlgebra:
    """Supercommutative algebra with odd operators ``d`` and ``Delta``.

    Parameters
    ----------
    parity : sequence of {0, 1}
        Parity of each basis element.
    unit : int
        Index of the unit ``1``.
    mult : ndarray, shape (D, D, D)
        Structure constants.
    d, delta : ndarray, shape (D, D)
    name : str, optional
    """

    parity: np.ndarray
    unit: int
    mult: np.ndarray
    d: np.ndarray
    delta: np.ndarray
    name: str = field(default="", compare=False)

    def __post_init__(self):
        par = np.array(self.parity, dtype=int).reshape(-1)
        dim = par.size
        if dim == 0 or not np.all((par == 0) | (par == 1)):
            raise UsageError("parity must be a non-empty array of 0/1")
        if not 0 <= int(self.unit) < dim:
            raise UsageError("unit index out of range")
        mult = np.array(self.mult, dtype=complex)
        if mult.shape != (dim, dim, dim):
            raise UsageError(f"mult must have shape ({dim}, {dim}, {dim})")
        ops = []
        for name in ("d", "delta"):
            m = np.array(getattr(self, name), dtype=complex)
            if m.shape != (dim, dim):
                raise UsageError(f"{name} must be {dim}x{dim}")
            ops.append(m)
        for arr in (par, mult, *ops):
            arr.setflags(write=False)
        object.__setattr__(self, "parity", par)
        object.__setattr__(self, "unit", int(self.unit))
        object.__setattr__(self, "mult", mult)
        object.__setattr__(self, "d", ops[0])
        object.__setattr__(self, "delta", ops[1])

    @property
    def dim(self) -> int:
        return int(self.parity.size)

    def one(self) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[self.unit] = 1.0
        return v

    def basis(self, i: int) -> np.ndarray:
        v = np.zeros(self.dim, dtype=complex)
        v[i] = 1.0
        return v

    def mul(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", a, b, self.mult)

    def parity_part(self, a, p: int) -> np.ndarray:
        return np.where(self.parity == p, a, 0)

    def parity_of(self, a, tol: float = 1e-12) -> int | None:
        """0 or 1 for homogeneous ``a`` (0 for zero), ``None`` otherwise."""
        a = np.asarray(a)
        even = np.max(np.abs(a[self.parity == 0]), initial=0.0)
        odd = np.max(np.abs(a[self.parity == 1]), initial=0.0)
        scale = max(1.0, even, odd)
        if odd <= tol * scale:
            return 0
        if even <= tol * scale:
            return 1
        return None

    @property
    def bracket_tensor(self) -> np.ndarray:
        """``beta[i, j, :] = [e_i, e_j] = Delta(e_i e_j) - Delta(e_i) e_j - (-1)^{|e_i|} e_i Delta(e_j)``."""
        cached = self.__dict__.get("_bracket")
        if cached is None:
            dl = self.delta
            prod = np.einsum("ijk,lk->ijl", self.mult, dl)  # Delta(e_i e_j)
            left = np.einsum("mi,mjk->ijk", dl, self.mult)  # Delta(e_i) e_j
            right = np.einsum("mj,imk->ijk", dl, self.mult)  # e_i Delta(e_j)
            sign = np.where(self.parity == 0, 1.0, -1.0)[:, None, None]
            cached = prod - left - sign * right
            cached.setflags(write=False)
            object.__setattr__(self, "_bracket", cached)
        return cached

    def bracket(self, a, b) -> np.ndarray:
        return np.einsum("i,j,ijk->k", a, b, self.bracket_tensor)

    def is_abelian(self, tol: float = AXIOM_TOL) -> bool:
        return float(np.max(np.abs(self.bracket_tensor), initial=0.0)) <= tol

    def cohomology_dim(self, tol: float = 1e-9) -> int:
        """``dim H(A, d) = D - 2 rank d``."""
        return self.dim - 2 * rank(self.d, tol)


@dataclass(frozen=True)
class AxiomResult:
    axiom: str
    ok: bool
    residual: float


@dataclass
class AxiomReport:
    results: list

    @property
    def ok(self) -> bool:
        return all(r.ok for r in self.results)

    def failures(self) -> list:
        return [r.axiom for r in self.results if not r.ok]

    def __getitem__(self, axiom: str) -> AxiomResult:
        for r in self.results:
            if r.axiom == axiom:
                return r
        raise KeyError(axiom)

    def to_json(self) -> list:
        return [{"axiom": r.axiom, "ok": r.ok, "residual": r.residual} for r in self.results]


def _maxabs(x) -> float:
    return float(np.max(np.abs(x), initial=0.0))


def check_bv_axioms(a: BVAlgebra, tol: float = AXIOM_TOL) -> AxiomReport:
    """Evaluate every BV axiom on basis elements; failures are itemized, never raised.

    The order-at-most-two condition on ``Delta`` is tested through its
    bracket: ``[a, bc] = [a, b] c + (-1)^{(|a|+1)|b|} b [a, c]``.
    """
    m, d, dl, par = a.mult, a.d, a.delta, a.parity
    dim = a.dim
    eye = np.eye(dim)
    sgn = np.where(par == 0, 1.0, -1.0)
    scale = max(1.0, _maxabs(m), _maxabs(d), _maxabs(dl))
    res = []

    def add(name, value):
        res.append(AxiomResult(name, value <= tol * scale**2, value))

    u = a.unit
    add("unit", max(_maxabs(m[u] - eye), _maxabs(m[:, u, :] - eye)))
    # (e_i e_j) e_k vs e_i (e_j e_k)
    lhs = np.einsum("ijl,lkm->ijkm", m, m)
    rhs = np.einsum("jkl,ilm->ijkm", m, m)
    add("associativity", _maxabs(lhs - rhs))
    koszul = np.where(np.outer(par, par) % 2 == 1, -1.0, 1.0)
    add("supercommutativity", _maxabs(m - koszul[:, :, None] * m.transpose(1, 0, 2)))
    target = (par[:, None, None] + par[None, :, None] + par[None, None, :]) % 2
    add("mult_parity", _maxabs(np.where(target == 1, m, 0)))
    same = (par[:, None] == par[None, :])
    add("operator_parity", max(_maxabs(np.where(same, d, 0)), _maxabs(np.where(same, dl, 0))))
    add("unit_annihilated", max(_maxabs(d[:, u]), _maxabs(dl[:, u])))
    add("d_squared", _maxabs(d @ d))
    add("delta_squared", _maxabs(dl @ dl))
    add("anticommutator", _maxabs(d @ dl + dl @ d))
    # d(e_i e_j) = d(e_i) e_j + (-1)^{|e_i|} e_i d(e_j)
    dprod = np.einsum("ijk,lk->ijl", m, d)
    dleft = np.einsum("mi,mjk->ijk", d, m)
    dright = np.einsum("mj,imk->ijk", d, m)
    add("d_derivation", _maxabs(dprod - dleft - sgn[:, None, None] * dright))
    beta = a.bracket_tensor
    # [e_i, e_j e_k] = [e_i, e_j] e_k + (-1)^{(|e_i|+1)|e_j|} e_j [e_i, e_k]
    lhs = np.einsum("jkl,ilm->ijkm", m, beta)
    t1 = np.einsum("ijl,lkm->ijkm", beta, m)
    t2 = np.einsum("ikl,jlm->ijkm", beta, m)
    s = np.where(((par[:, None] + 1) * par[None, :]) % 2 == 1, -1.0, 1.0)
    add("bracket_biderivation", _maxabs(lhs - t1 - s[:, :, None, None] * t2))
    # [a, [b, c]] = [[a, b], c] + (-1)^{(|a|+1)(|b|+1)} [b, [a, c]]
    lhs = np.einsum("jkl,ilm->ijkm", beta, beta)
    t1 = np.einsum("ijl,lkm->ijkm", beta, beta)
    t2 = np.einsum("ikl,jlm->ijkm", beta, beta)
    s = np.where(((par[:, None] + 1) * (par[None, :] + 1)) % 2 == 1, -1.0, 1.0)
    add("jacobi", _maxabs(lhs - t1 - s[:, :, None, None] * t2))
    return AxiomReport(res)


def algebra_to_json(a: BVAlgebra) -> dict:
    mult = []
    for i in range(a.dim):
        row = []
        for j in range(a.dim):
            nz = np.nonzero(a.mult[i, j])[0]
            row.append([[int(k), complex_to_json(a.mult[i, j, k])] for k in nz])
        mult.append(row)
    return {
        "dim": a.dim,
        "parity": [int(p) for p in a.parity],
        "unit": a.unit,
        "mult": mult,
        "d": matrix_to_json(a.d),
        "delta": matrix_to_json(a.delta),
    }


def algebra_from_json(obj, path: str = "") -> BVAlgebra:
    """Decode ``{"dim", "parity", "unit", "mult", "d", "delta"}``; ``mult[i][j]`` lists ``[k, coeff]``."""
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an algebra object")
    for key in ("dim", "parity", "unit", "mult", "d", "delta"):
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing")
    dim = obj["dim"]
    if not isinstance(dim, int) or dim < 1:
        raise SchemaError(f"{path}/dim", "must be a positive integer")
    par = obj["parity"]
    if not isinstance(par, list) or len(par) != dim or any(p not in (0, 1) for p in par):
        raise SchemaError(f"{path}/parity", f"expected {dim} entries of 0/1")
    unit = obj["unit"]
    if not isinstance(unit, int) or not 0 <= unit < dim:
        raise SchemaError(f"{path}/unit", "index out of range")
    mult = np.zeros((dim, dim, dim), dtype=complex)
    rows = obj["mult"]
    if not isinstance(rows, list) or len(rows) != dim:
        raise SchemaError(f"{path}/mult", f"expected {dim} rows")
    for i, row in enumerate(rows):
        if not isinstance(row, list) or len(row) != dim:
            raise SchemaError(f"{path}/mult/{i}", f"expected {dim} entries")
        for j, entry in enumerate(row):
            if not isinstance(entry, list):
                raise SchemaError(f"{path}/mult/{i}/{j}", "expected a list of [k, coeff]")
            for t, pair in enumerate(entry):
                where = f"{path}/mult/{i}/{j}/{t}"
                if not isinstance(pair, list) or len(pair) != 2 or not isinstance(pair[0], int):
                    raise SchemaError(where, "expected [k, coeff]")
                if not 0 <= pair[0] < dim:
                    raise SchemaError(f"{where}/0", "index out of range")
                mult[i, j, pair[0]] += complex_from_json(pair[1], f"{where}/1")
    d = matrix_from_json(obj["d"], f"{path}/d")
    dl = matrix_from_json(obj["delta"], f"{path}/delta")
    for name, mat in (("d", d), ("delta", dl)):
        if mat.shape != (dim, dim):
            raise SchemaError(f"{path}/{name}", f"expected {dim}x{dim}")
    return BVAlgebra(par, unit, mult, d, dl, obj.get("name", ""))
