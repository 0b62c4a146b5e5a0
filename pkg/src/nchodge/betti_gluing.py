"""Gluing data on the Betti side and the equivalent descent data.

Gluing data: points ``c_1..c_n``, spaces ``U_i = C^{d_i}`` and maps
``T_ij : U_j -> U_i`` with every ``T_ii`` invertible. Descent data: a
generic stalk ``U``, subspaces ``psi_i : V_i -> U`` and monodromies
``T_i`` fixing ``im psi_i`` pointwise. The two are exchanged through
``U = ⊕ U_i`` and ``U_i = U / V_i``; the latter needs the Mayer-Vietoris
complex to be acyclic.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .algebra_core.linalg import orthogonal_complement, rank
from .algebra_core.serialize import (
    SchemaError,
    complex_from_json,
    complex_to_json,
    matrix_from_json,
    matrix_to_json,
)
from .errors import NotConvertibleError, UsageError

RANK_TOL = 1e-9
DISTINCT_TOL = 1e-12


def _is_invertible(m) -> bool:
    return m.shape[0] == m.shape[1] and m.shape[0] > 0 and rank(m, RANK_TOL) == m.shape[0]


@dataclass(frozen=True, eq=False)
class BiiiData:
    """Points, dimensions and the grid ``maps[i][j] = T_ij : U_j -> U_i`` (0-based).

    ``check=False`` skips the invertibility of the diagonal blocks so that
    broken instances can be built for :func:`check_quiver_rep`.
    """

    points: tuple
    dims: tuple
    maps: tuple
    check: bool = field(default=True, repr=False)

    def __post_init__(self):
        pts = tuple(complex(c) for c in self.points)
        dims = tuple(int(d) for d in self.dims)
        n = len(pts)
        if n == 0 or len(dims) != n:
            raise UsageError("need one dimension per point and at least one point")
        if min(dims) < 1:
            raise UsageError("every U_i must have dimension >= 1")
        for a in range(n):
            for b in range(a):
                if abs(pts[a] - pts[b]) <= DISTINCT_TOL:
                    raise UsageError(f"points {b} and {a} coincide")
        if len(self.maps) != n or any(len(row) != n for row in self.maps):
            raise UsageError(f"maps must be an {n}x{n} grid")
        grid = []
        for i in range(n):
            row = []
            for j in range(n):
                m = np.array(self.maps[i][j], dtype=complex).reshape(dims[i], dims[j])
                if not np.all(np.isfinite(m)):
                    raise UsageError(f"T_{i + 1}{j + 1} has non-finite entries")
                m.setflags(write=False)
                row.append(m)
            grid.append(tuple(row))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "dims", dims)
        object.__setattr__(self, "maps", tuple(grid))
        if self.check:
            for i in range(n):
                if not _is_invertible(grid[i][i]):
                    raise UsageError(f"T_{i + 1}{i + 1} is not invertible")

    @property
    def n(self) -> int:
        return len(self.points)

    def total_matrix(self) -> np.ndarray:
        """``T = (T_ij)`` as one matrix on ``⊕ U_i``."""
        return np.block([[self.maps[i][j] for j in range(self.n)] for i in range(self.n)])

    def offsets(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.dims)])

    def permuted(self, order) -> "BiiiData":
        """Relabel the points by ``order`` (new point ``k`` is old point ``order[k]``)."""
        order = [int(k) for k in order]
        if sorted(order) != list(range(self.n)):
            raise UsageError("order must be a permutation of the point indices")
        return BiiiData(
            tuple(self.points[k] for k in order),
            tuple(self.dims[k] for k in order),
            tuple(tuple(self.maps[a][b] for b in order) for a in order),
            self.check,
        )


@dataclass(frozen=True, eq=False)
class DescentData:
    """Generic stalk ``C^dim_u``, inclusions ``psi[i]`` (``dim_u x dim V_i``) and monodromies ``T[i]``."""

    dim_u: int
    psi: tuple
    monodromies: tuple

    def __post_init__(self):
        r = int(self.dim_u)
        if r < 0:
            raise UsageError("dim_u must be non-negative")
        if len(self.psi) != len(self.monodromies) or not self.psi:
            raise UsageError("need one psi_i and one T_i per point")
        psi, mons = [], []
        for i, (p, t) in enumerate(zip(self.psi, self.monodromies)):
            p = np.array(p, dtype=complex)
            if p.size == 0:
                p = np.zeros((r, 0), dtype=complex)
            if p.ndim != 2 or p.shape[0] != r:
                raise UsageError(f"psi_{i + 1} must have {r} rows")
            t = np.array(t, dtype=complex).reshape(r, r)
            if r and not _is_invertible(t):
                raise UsageError(f"T_{i + 1} is not invertible")
            if p.shape[1] and r:
                resid = np.max(np.abs((t - np.eye(r)) @ p))
                scale = max(1.0, np.max(np.abs(t))) * max(1.0, np.max(np.abs(p)))
                if resid > 1e-9 * scale:
                    raise UsageError(f"im psi_{i + 1} is not fixed by T_{i + 1}")
            p.setflags(write=False)
            t.setflags(write=False)
            psi.append(p)
            mons.append(t)
        object.__setattr__(self, "dim_u", r)
        object.__setattr__(self, "psi", tuple(psi))
        object.__setattr__(self, "monodromies", tuple(mons))

    @property
    def n(self) -> int:
        return len(self.psi)


def biii_to_descent(b: BiiiData) -> DescentData:
    """``U = ⊕ U_i``, ``V_i = ⊕_{j != i} U_j`` and ``T_i`` the identity off column-block ``i``."""
    off = b.offsets()
    r = int(off[-1])
    psi, mons = [], []
    for i in range(b.n):
        keep = [k for k in range(r) if not off[i] <= k < off[i + 1]]
        psi.append(np.eye(r, dtype=complex)[:, keep])
        t = np.eye(r, dtype=complex)
        t[:, off[i]:off[i + 1]] = np.vstack([b.maps[j][i] for j in range(b.n)])
        mons.append(t)
    return DescentData(r, tuple(psi), tuple(mons))


@dataclass(frozen=True)
class AcyclicityReport:
    acyclic: bool
    via_complex: bool
    via_conditions: bool
    injective: bool
    quotient_iso: bool


def _quotient_maps(d: DescentData) -> list:
    """Orthonormal bases ``Q_i`` of ``(im psi_i)^perp``; ``Q_i^*`` realizes ``U -> U/V_i``."""
    out = []
    for p in d.psi:
        if p.shape[1] == 0 or rank(p, RANK_TOL) == 0:
            out.append(np.eye(d.dim_u, dtype=complex))
        else:
            out.append(orthogonal_complement(p, d.dim_u, RANK_TOL))
    return out


def mayer_vietoris_matrix(d: DescentData) -> np.ndarray:
    """``(⊕ V_i) ⊕ U -> U^n``, ``(v, u) -> (psi_i(v_i) - u)_i``."""
    r, n = d.dim_u, d.n
    cols_v = sum(p.shape[1] for p in d.psi)
    m = np.zeros((n * r, cols_v + r), dtype=complex)
    c = 0
    for i, p in enumerate(d.psi):
        m[i * r:(i + 1) * r, c:c + p.shape[1]] = p
        m[i * r:(i + 1) * r, cols_v:] = -np.eye(r)
        c += p.shape[1]
    return m


def check_acyclicity(d: DescentData) -> AcyclicityReport:
    """Acyclicity of the Mayer-Vietoris complex, decided twice.

    ``via_complex`` asks for the two-term complex to be an isomorphism by
    rank; ``via_conditions`` checks (a) every ``psi_i`` injective and (b)
    ``U -> ⊕ U/V_i`` an isomorphism. The two must agree.
    """
    m = mayer_vietoris_matrix(d)
    rows, cols = m.shape
    if rows == 0 and cols == 0:
        via_complex = True
    else:
        via_complex = rows == cols and rank(m, RANK_TOL) == rows
    injective = all(p.shape[1] == 0 or rank(p, RANK_TOL) == p.shape[1] for p in d.psi)
    qs = _quotient_maps(d)
    codims = [q.shape[1] for q in qs]
    if sum(codims) != d.dim_u:
        quotient_iso = False
    elif d.dim_u == 0:
        quotient_iso = True
    else:
        phi = np.vstack([q.conj().T for q in qs])
        quotient_iso = rank(phi, RANK_TOL) == d.dim_u
    via_conditions = injective and quotient_iso
    return AcyclicityReport(via_complex and via_conditions, via_complex, via_conditions, injective, quotient_iso)


@dataclass(frozen=True, eq=False)
class Conversion:
    """Gluing data recovered from descent data with the identification ``phi : U -> ⊕ U_i``."""

    biii: BiiiData
    identification: np.ndarray


def descent_to_biii(d: DescentData, points=None) -> Conversion:
    """Recover ``T_ij`` from the block decomposition of ``phi T_i phi^-1``.

    Raises
    ------
    NotConvertibleError
        If the acyclicity conditions fail.
    """
    rep = check_acyclicity(d)
    if not rep.via_conditions:
        why = "psi_i not injective" if not rep.injective else "U -> ⊕ U/V_i is not an isomorphism"
        raise NotConvertibleError(f"descent data is not acyclic: {why}")
    qs = _quotient_maps(d)
    phi = np.vstack([q.conj().T for q in qs])
    phi_inv = np.linalg.inv(phi)
    dims = [q.shape[1] for q in qs]
    off = np.concatenate([[0], np.cumsum(dims)])
    n = d.n
    grid = [[None] * n for _ in range(n)]
    for i in range(n):
        block = phi @ d.monodromies[i] @ phi_inv
        for j in range(n):
            grid[j][i] = block[off[j]:off[j + 1], off[i]:off[i + 1]]
    if points is None:
        points = tuple(complex(k) for k in range(n))
    return Conversion(BiiiData(tuple(points), tuple(dims), tuple(tuple(r) for r in grid)), phi)


def quiver_relations(t, projectors, inverses) -> dict:
    """Residuals of the path-algebra relations.

    ``sum p_i = 1``, ``p_i p_j = delta_ij p_i``, ``R_i p_i T p_i = p_i`` and
    ``p_i T p_i R_i = p_i``, where ``R_i`` plays the role of ``T_ii^-1``.
    """
    t = np.asarray(t, dtype=complex)
    size = t.shape[0]
    eye = np.eye(size)
    res = {"partition": float(np.max(np.abs(sum(projectors) - eye), initial=0.0))}
    orth = 0.0
    for i, p in enumerate(projectors):
        for j, q in enumerate(projectors):
            target = p if i == j else np.zeros_like(p)
            orth = max(orth, float(np.max(np.abs(p @ q - target), initial=0.0)))
    res["orthogonal_idempotents"] = orth
    left = right = 0.0
    for p, r in zip(projectors, inverses):
        ptp = p @ t @ p
        left = max(left, float(np.max(np.abs(r @ ptp - p), initial=0.0)))
        right = max(right, float(np.max(np.abs(ptp @ r - p), initial=0.0)))
    res["left_inverse"] = left
    res["right_inverse"] = right
    return res


def quiver_data(b: BiiiData):
    """``(T, [p_i], [R_i])`` with ``R_i`` the pseudo-inverse of ``T_ii`` placed in block ``i``."""
    t = b.total_matrix()
    off = b.offsets()
    size = int(off[-1])
    ps, rs = [], []
    for i in range(b.n):
        p = np.zeros((size, size), dtype=complex)
        p[off[i]:off[i + 1], off[i]:off[i + 1]] = np.eye(b.dims[i])
        r = np.zeros((size, size), dtype=complex)
        r[off[i]:off[i + 1], off[i]:off[i + 1]] = np.linalg.pinv(b.maps[i][i])
        ps.append(p)
        rs.append(r)
    return t, ps, rs


def check_quiver_rep(b: BiiiData, tol: float = 1e-9) -> bool:
    """True iff ``(T_ij)`` satisfies the quiver-algebra relations."""
    t, ps, rs = quiver_data(b)
    scale = max(1.0, float(np.max(np.abs(t), initial=0.0)))
    res = quiver_relations(t, ps, rs)
    return all(v <= tol * scale for v in res.values())


@dataclass(frozen=True, eq=False)
class GluedStructure:
    """Regular pieces ``(dim U_i, T_ii)`` plus off-diagonal gluing maps, in the order of ``points``."""

    points: tuple
    regular: tuple
    gluing: dict

    def to_biii(self) -> BiiiData:
        n = len(self.points)
        dims = [d for d, _ in self.regular]
        grid = []
        for i in range(n):
            row = []
            for j in range(n):
                if i == j:
                    row.append(self.regular[i][1])
                else:
                    row.append(self.gluing.get((i, j), np.zeros((dims[i], dims[j]))))
            grid.append(row)
        return BiiiData(tuple(self.points), tuple(dims), tuple(tuple(r) for r in grid))

    def local_system(self) -> np.ndarray:
        return self.to_biii().total_matrix()


def glue(regular, gluing, points) -> GluedStructure:
    """Assemble regular pieces and gluing maps into validated gluing data.

    Parameters
    ----------
    regular : list of (int, matrix)
        ``(dim U_i, T_ii)`` per point.
    gluing : dict
        ``{(i, j): T_ij}`` for ``i != j`` (0-based); missing entries are zero.
    points : list of complex
    """
    regular = tuple((int(d), np.array(t, dtype=complex).reshape(int(d), int(d))) for d, t in regular)
    if len(regular) != len(points):
        raise UsageError("need one regular piece per point")
    gl = {}
    for (i, j), m in dict(gluing).items():
        if i == j:
            raise UsageError("gluing maps must be off-diagonal")
        if not (0 <= i < len(points) and 0 <= j < len(points)):
            raise UsageError(f"gluing index ({i}, {j}) out of range")
        gl[(int(i), int(j))] = np.array(m, dtype=complex).reshape(regular[i][0], regular[j][0])
    g = GluedStructure(tuple(complex(c) for c in points), regular, gl)
    g.to_biii()  # re-validates invertibility and distinctness
    return g


def biii_to_json(b: BiiiData) -> dict:
    return {
        "points": [complex_to_json(c) for c in b.points],
        "dims": list(b.dims),
        "maps": {f"{i + 1},{j + 1}": matrix_to_json(b.maps[i][j]) for i in range(b.n) for j in range(b.n)},
    }


def biii_from_json(obj, path: str = "") -> BiiiData:
    """Decode ``{"points", "dims", "maps": {"i,j": matrix}}`` with 1-based ``i, j``; missing maps are zero."""
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    for key in ("points", "dims", "maps"):
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing")
    if not isinstance(obj["points"], list):
        raise SchemaError(f"{path}/points", "expected an array")
    pts = [complex_from_json(z, f"{path}/points/{i}") for i, z in enumerate(obj["points"])]
    dims = obj["dims"]
    if not isinstance(dims, list) or len(dims) != len(pts) or not all(isinstance(x, int) and x >= 1 for x in dims):
        raise SchemaError(f"{path}/dims", "expected one positive integer per point")
    if not isinstance(obj["maps"], dict):
        raise SchemaError(f"{path}/maps", "expected an object keyed by \"i,j\"")
    n = len(pts)
    grid = [[np.zeros((dims[i], dims[j]), dtype=complex) for j in range(n)] for i in range(n)]
    for key, val in obj["maps"].items():
        try:
            i, j = (int(x) - 1 for x in key.split(","))
        except ValueError:
            raise SchemaError(f"{path}/maps/{key}", "key must be \"i,j\"") from None
        if not (0 <= i < n and 0 <= j < n):
            raise SchemaError(f"{path}/maps/{key}", "index out of range")
        m = matrix_from_json(val, f"{path}/maps/{key}")
        if m.shape != (dims[i], dims[j]):
            raise SchemaError(f"{path}/maps/{key}", f"expected {dims[i]}x{dims[j]}")
        grid[i][j] = m
    try:
        return BiiiData(tuple(pts), tuple(dims), tuple(tuple(r) for r in grid))
    except UsageError as exc:
        raise SchemaError(f"{path}/maps", str(exc)) from None


def descent_to_json(d: DescentData) -> dict:
    return {
        "dim_u": d.dim_u,
        "psi": [matrix_to_json(p) if p.size else {"rows": d.dim_u, "cols": 0, "entries": []} for p in d.psi],
        "T": [matrix_to_json(t) for t in d.monodromies],
    }


def descent_from_json(obj, path: str = "") -> DescentData:
    """Decode ``{"dim_u": r, "psi": [matrix], "T": [matrix]}``."""
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected an object")
    for key in ("dim_u", "psi", "T"):
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing")
    r = obj["dim_u"]
    if not isinstance(r, int) or r < 0:
        raise SchemaError(f"{path}/dim_u", "must be a non-negative integer")
    if not isinstance(obj["psi"], list) or not isinstance(obj["T"], list):
        raise SchemaError(path, "psi and T must be arrays")
    if len(obj["psi"]) != len(obj["T"]):
        raise SchemaError(f"{path}/T", "need one monodromy per psi")
    psi = []
    for i, p in enumerate(obj["psi"]):
        m = matrix_from_json(p, f"{path}/psi/{i}")
        if m.shape[0] != r and m.size:
            raise SchemaError(f"{path}/psi/{i}", f"expected {r} rows")
        psi.append(m if m.size else np.zeros((r, 0), dtype=complex))
    ts = []
    for i, t in enumerate(obj["T"]):
        m = matrix_from_json(t, f"{path}/T/{i}")
        if m.shape != (r, r):
            raise SchemaError(f"{path}/T/{i}", f"expected {r}x{r}")
        ts.append(m)
    try:
        return DescentData(r, tuple(psi), tuple(ts))
    except UsageError as exc:
        raise SchemaError(path, str(exc)) from None
