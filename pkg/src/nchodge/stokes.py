"""Stokes filtrations of exponential type on the circle of directions.

For exponents ``c_1..c_m`` the label of ``c_k`` in direction ``phi`` is
``Re(c_k e^{-i phi})``. Labels of ``c_a`` and ``c_b`` cross where
``c_a - c_b`` points along ``i e^{i phi}``; those angles are the Stokes
directions and cut the circle into arcs with a fixed label order.

Flags are stored per arc as a list of ``m`` basis matrices (columns span
``F_1 ⊆ ... ⊆ F_m``), position ``t`` carrying the ``t``-th smallest label.
All arcs share one trivialization of the local system, cut at the first
Stokes direction: crossing it from the last arc back into arc 0 applies
the monodromy ``T``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
import math

import numpy as np

from .algebra_core.linalg import rank
from .algebra_core.serialize import (
    SchemaError,
    complex_from_json,
    matrix_from_json,
    matrix_to_json,
    vector_to_json,
)
from .errors import NcHodgeError, UsageError
from .quantum_connection import exponent_eigenvalues

TWO_PI = 2 * math.pi
ANGLE_TOL = 1e-10
DISTINCT_TOL = 1e-8
RANK_TOL = 1e-9


def _canon(phi: float) -> float:
    phi = math.fmod(phi, TWO_PI)
    if phi < 0:
        phi += TWO_PI
    if TWO_PI - phi < ANGLE_TOL:
        phi = 0.0
    return phi


@dataclass(frozen=True)
class ExponentSet:
    """Distinct exponents ``c_1, ..., c_m``."""

    exponents: tuple

    def __post_init__(self):
        ex = tuple(complex(c) for c in self.exponents)
        if not ex:
            raise UsageError("an exponent set needs at least one exponent")
        for c in ex:
            if not (math.isfinite(c.real) and math.isfinite(c.imag)):
                raise UsageError("exponents must be finite")
        for a in range(len(ex)):
            for b in range(a):
                if abs(ex[a] - ex[b]) <= DISTINCT_TOL:
                    raise UsageError(f"exponents {b} and {a} coincide within {DISTINCT_TOL}; refusing to merge")
        object.__setattr__(self, "exponents", ex)

    def __len__(self) -> int:
        return len(self.exponents)

    def labels(self, phi: float) -> np.ndarray:
        return np.array([(c * complex(math.cos(phi), -math.sin(phi))).real for c in self.exponents])

    @property
    def scale(self) -> float:
        return max(1.0, max(abs(c) for c in self.exponents))


def _as_exponents(e) -> ExponentSet:
    return e if isinstance(e, ExponentSet) else ExponentSet(tuple(e))


@dataclass(frozen=True)
class ArcDecomposition:
    """Stokes directions, the arcs between them and the label order on each arc.

    ``arcs[i]`` runs from ``directions[i]`` to ``directions[i+1]`` (the last
    one wraps past ``2 pi``), so direction ``i`` separates arc ``i - 1``
    from arc ``i``. ``orders[i][t]`` is the exponent index at position ``t``.
    """

    exponents: ExponentSet
    directions: tuple
    arcs: tuple
    orders: tuple

    def arc_before(self, k: int) -> int:
        return (k - 1) % len(self.arcs)

    def direction_index(self, phi: float) -> int:
        phi = _canon(phi)
        for k, d in enumerate(self.directions):
            gap = abs(phi - d)
            if min(gap, TWO_PI - gap) <= ANGLE_TOL * 10:
                return k
        raise UsageError(f"{phi} is not a Stokes direction")


def _arc_order(e: ExponentSet, phi: float) -> tuple:
    vals = e.labels(phi)
    order = tuple(int(i) for i in np.argsort(vals, kind="stable"))
    gaps = np.diff(vals[list(order)])
    if gaps.size and np.min(gaps) <= 1e-12 * e.scale:
        raise UsageError(f"labels tie inside an arc near angle {phi}; exponent set is not generic")
    return order


def stokes_directions(e) -> ArcDecomposition:
    """All angles ``Arg(c_a - c_b) - pi/2`` over ordered pairs, with arcs and orders."""
    e = _as_exponents(e)
    raw = []
    m = len(e)
    for a in range(m):
        for b in range(m):
            if a != b:
                d = e.exponents[a] - e.exponents[b]
                raw.append(_canon(math.atan2(d.imag, d.real) - math.pi / 2))
    raw.sort()
    dirs: list[float] = []
    for phi in raw:
        if dirs and phi - dirs[-1] <= ANGLE_TOL:
            continue
        dirs.append(phi)
    if len(dirs) > 1 and dirs[0] + TWO_PI - dirs[-1] <= ANGLE_TOL:
        dirs.pop()
    if not dirs:
        return ArcDecomposition(e, (), ((0.0, TWO_PI),), (_arc_order(e, 0.0),))
    arcs = []
    for i, phi in enumerate(dirs):
        end = dirs[i + 1] if i + 1 < len(dirs) else dirs[0] + TWO_PI
        arcs.append((phi, end))
    orders = tuple(_arc_order(e, (a + b) / 2) for a, b in arcs)
    return ArcDecomposition(e, tuple(dirs), tuple(arcs), orders)


@dataclass(frozen=True)
class CrossingPermutation:
    """Label reordering across one Stokes direction.

    ``perm[t]`` is the position on the arc before of the exponent sitting
    at position ``t`` after; ``blocks`` are the maximal reversed intervals
    ``(i, j)`` in 1-based positions.
    """

    direction: float
    before: tuple
    after: tuple
    perm: tuple
    blocks: tuple

    def is_involution(self) -> bool:
        return all(self.perm[self.perm[t]] == t for t in range(len(self.perm)))


def _blocks_of(perm: tuple) -> tuple:
    """Maximal reversed intervals of ``perm``; raises if it is not a product of them."""
    m = len(perm)
    blocks = []
    t = 0
    while t < m:
        if perm[t] == t:
            t += 1
            continue
        j = perm[t]
        if j < t:
            raise NcHodgeError(f"crossing permutation {perm} is not a product of block reversals")
        for s in range(t, j + 1):
            if perm[s] != t + j - s:
                raise NcHodgeError(f"crossing permutation {perm} is not a product of block reversals")
        blocks.append((t + 1, j + 1))
        t = j + 1
    return tuple(blocks)


def _crossing(e: ExponentSet, dec: ArcDecomposition, k: int) -> CrossingPermutation:
    before = dec.orders[dec.arc_before(k)]
    after = dec.orders[k]
    pos_before = {c: t for t, c in enumerate(before)}
    perm = tuple(pos_before[c] for c in after)
    blocks = _blocks_of(perm)
    # independent route: the reversed blocks are exactly the groups of labels tied at phi
    phi = dec.directions[k]
    vals = e.labels(phi)[list(before)]
    ties = []
    t = 0
    while t < len(vals):
        s = t
        while s + 1 < len(vals) and abs(vals[s + 1] - vals[t]) <= 1e-8 * e.scale:
            s += 1
        if s > t:
            ties.append((t + 1, s + 1))
        t = s + 1
    if tuple(ties) != blocks:
        raise NcHodgeError(f"label ties {ties} at {phi} disagree with reversed blocks {blocks}")
    return CrossingPermutation(phi, before, after, perm, blocks)


def crossing_permutation(e, phi: float) -> CrossingPermutation:
    """Permutation and reversed blocks across the Stokes direction ``phi``."""
    e = _as_exponents(e)
    dec = stokes_directions(e)
    return _crossing(e, dec, dec.direction_index(phi))


def all_crossings(e) -> list:
    """Crossings in increasing direction order, starting at the first Stokes direction."""
    e = _as_exponents(e)
    dec = stokes_directions(e)
    return [_crossing(e, dec, k) for k in range(len(dec.directions))]


def circle_composite(e) -> tuple:
    """Composite of all crossings once around: maps the arc-0 order to itself."""
    crossings = all_crossings(e)
    dec = stokes_directions(e)
    order = dec.orders[0]
    for cr in crossings[1:] + crossings[:1]:
        if tuple(order) != cr.before:
            raise NcHodgeError("crossing chain does not match arc orders")
        order = tuple(order[p] for p in cr.perm)
    start = dec.orders[0]
    pos = {c: t for t, c in enumerate(start)}
    return tuple(pos[c] for c in order)


def skeleton_from_connection(conn, tol: float = 1e-8):
    """Exponents of ``A_{-2}`` and their algebraic multiplicities."""
    distinct = exponent_eigenvalues(conn, tol)
    ev = np.linalg.eigvals(conn.terms[-2])
    mult = []
    for c in distinct:
        mult.append(int(np.count_nonzero(np.abs(ev - c) <= tol)))
    if sum(mult) != conn.rank:
        raise NcHodgeError("eigenvalue multiplicities do not add up to the rank")
    return ExponentSet(tuple(distinct)), tuple(mult)


@dataclass(frozen=True, eq=False)
class FilteredLocalSystem:
    """Fiber ``C^r``, monodromy ``T`` and one flag per arc.

    ``flags[i][t]`` is an ``r x d`` basis of the ``(t+1)``-th step on arc
    ``i``; arcs and positions follow :func:`stokes_directions`.
    """

    rank: int
    monodromy: np.ndarray
    flags: tuple
    multiplicities: tuple | None = None

    def __post_init__(self):
        t = np.array(self.monodromy, dtype=complex)
        if t.shape != (self.rank, self.rank):
            raise UsageError(f"monodromy must be {self.rank}x{self.rank}")
        flags = []
        for i, arc in enumerate(self.flags):
            steps = []
            for s, b in enumerate(arc):
                b = np.array(b, dtype=complex)
                if b.ndim == 1:
                    b = b.reshape(self.rank, -1) if b.size else np.zeros((self.rank, 0), dtype=complex)
                if b.ndim != 2 or b.shape[0] != self.rank:
                    raise UsageError(f"arc {i} step {s}: basis must have {self.rank} rows")
                steps.append(b)
            flags.append(tuple(steps))
        object.__setattr__(self, "monodromy", t)
        object.__setattr__(self, "flags", tuple(flags))


@dataclass(frozen=True)
class Issue:
    direction: float | None
    condition: str
    detail: str

    def to_json(self) -> dict:
        return {"direction": self.direction, "condition": self.condition, "detail": self.detail}


@dataclass
class ValidationReport:
    issues: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not self.issues

    def add(self, direction, condition, detail):
        self.issues.append(Issue(direction, condition, detail))

    def to_json(self) -> list:
        return [i.to_json() for i in self.issues]


def _dim(b) -> int:
    return 0 if b.shape[1] == 0 else rank(b, RANK_TOL)


def _contains(big, small) -> bool:
    if small.shape[1] == 0:
        return True
    if big.shape[1] == 0:
        return _dim(small) == 0
    return rank(np.hstack([big, small]), RANK_TOL) == _dim(big)


def _equal(a, b) -> bool:
    return _dim(a) == _dim(b) and _contains(a, b)


def _opposed(before, after, i: int, j: int) -> list:
    """Failures of opposedness on ``F_j / F_{i-1}`` (1-based block ``[i, j]``)."""
    r = before[0].shape[0]
    zero = np.zeros((r, 0), dtype=complex)
    low = before[i - 2] if i >= 2 else zero
    top = before[j - 1]
    d_low, d_top = _dim(low), _dim(top)
    length = j - i + 1
    bad = []
    for t in range(length + 1):
        g = before[i - 2 + t] if i - 2 + t >= 0 else zero
        s = length - t
        gp = after[i - 2 + s] if i - 2 + s >= 0 else zero
        both = np.hstack([g, gp])
        span_dim = 0 if both.shape[1] == 0 else rank(both, RANK_TOL)
        if span_dim != d_top or _dim(g) + _dim(gp) != d_top + d_low:
            bad.append(t)
    return bad


def _check_crossing(report, phi, before, after, cr, cond_prefix=""):
    m = len(before)
    inside = set()
    for i, j in cr.blocks:
        inside.update(range(i, j))  # positions i..j-1 (1-based) are free
    for t in range(1, m + 1):
        if t in inside:
            continue
        is_top = any(t == j for _, j in cr.blocks)
        if not _equal(before[t - 1], after[t - 1]):
            cond = "block_top" if is_top else "unchanged_step"
            report.add(phi, cond_prefix + cond, f"step {t} differs across the direction")
    for i, j in cr.blocks:
        bad = _opposed(before, after, i, j)
        if bad:
            report.add(phi, cond_prefix + "opposed", f"block [{i}, {j}] fails complementarity at t = {bad}")


def validate_filtration(f: FilteredLocalSystem, e) -> ValidationReport:
    """Itemized check of a filtered local system against the crossing rules.

    Conditions: ``nesting`` (steps increase to the full space),
    ``multiplicity`` (graded dimension of each exponent is the same on every
    arc), ``unchanged_step``, ``block_top``, ``opposed`` and ``monodromy``
    (the wrap-around crossing, where the last arc is moved by ``T``).
    """
    e = _as_exponents(e)
    dec = stokes_directions(e)
    m = len(e)
    if len(f.flags) != len(dec.arcs):
        raise UsageError(f"expected flags on {len(dec.arcs)} arcs, got {len(f.flags)}")
    for i, arc in enumerate(f.flags):
        if len(arc) != m:
            raise UsageError(f"arc {i}: expected {m} steps, got {len(arc)}")
    report = ValidationReport()
    r = f.rank
    if rank(f.monodromy, RANK_TOL) < r:
        report.add(None, "monodromy", "monodromy is not invertible")
    graded = []
    for i, arc in enumerate(f.flags):
        dims = [_dim(b) for b in arc]
        for t in range(1, m):
            if not _contains(arc[t], arc[t - 1]):
                report.add(dec.arcs[i][0], "nesting", f"arc {i}: step {t} does not contain step {t - 1}")
        if dims[-1] != r:
            report.add(dec.arcs[i][0], "nesting", f"arc {i}: last step has dimension {dims[-1]} < {r}")
        g = {}
        prev = 0
        for t, c in enumerate(dec.orders[i]):
            g[c] = dims[t] - prev
            prev = dims[t]
        graded.append(g)
    expected = graded[0] if f.multiplicities is None else dict(enumerate(f.multiplicities))
    for i, g in enumerate(graded):
        if g != expected:
            report.add(dec.arcs[i][0], "multiplicity", f"arc {i}: graded dimensions {g} != {expected}")
    if not dec.directions:
        arc = f.flags[0]
        for t in range(m):
            if not _equal(f.monodromy @ arc[t], arc[t]):
                report.add(None, "monodromy", f"T does not preserve step {t + 1}")
        return report
    crossings = [_crossing(e, dec, k) for k in range(len(dec.directions))]
    for k, cr in enumerate(crossings):
        after = f.flags[k]
        before = f.flags[dec.arc_before(k)]
        if k == 0:
            before = tuple(f.monodromy @ b for b in before)
            _check_crossing(report, cr.direction, before, after, cr, "monodromy:")
        else:
            _check_crossing(report, cr.direction, before, after, cr)
    return report


def _flag_from_basis(basis, order, mult) -> tuple:
    steps = []
    d = 0
    for c in order:
        d += mult[c]
        steps.append(basis[:, :d].copy())
    return tuple(steps)


def generate_filtration(e, multiplicities=None, rng=None) -> FilteredLocalSystem:
    """Random valid filtered local system with flags in general position.

    A random flag is placed on arc 0 and pushed across each Stokes
    direction by replacing every reversed block with a random flag on its
    quotient (generically opposed). The monodromy is then the unique map
    carrying the last arc's pushed flag basis onto arc 0's basis. Bases are
    kept unitary so the monodromy is unitary and well conditioned.
    """
    e = _as_exponents(e)
    rng = np.random.default_rng(rng)
    dec = stokes_directions(e)
    m = len(e)
    mult = tuple(int(x) for x in (multiplicities or (1,) * m))
    if len(mult) != m or min(mult) < 1:
        raise UsageError("multiplicities must be positive, one per exponent")
    r = sum(mult)

    def rand(rows, cols):
        return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))

    def push(basis, cr):
        """Basis adapted to the after-order, given one adapted to the before-order."""
        offsets = np.cumsum((0,) + tuple(mult[c] for c in cr.before))
        new = basis.copy()
        for i, j in cr.blocks:
            lo, hi = offsets[i - 1], offsets[j]
            new[:, lo:hi] = basis[:, lo:hi] @ rand(hi - lo, hi - lo)
        # QR keeps every leading-column span, so the flag is unchanged
        return np.linalg.qr(new)[0]

    b0 = np.linalg.qr(rand(r, r))[0]
    if not dec.directions:
        t = rand(r, r)
        # T must preserve the one-step flag F_1 = C^r; any invertible map does
        return FilteredLocalSystem(r, t, (_flag_from_basis(b0, dec.orders[0], mult),), mult)
    crossings = [_crossing(e, dec, k) for k in range(len(dec.directions))]
    bases = [b0]
    for cr in crossings[1:]:
        bases.append(push(bases[-1], cr))
    wrapped = push(bases[-1], crossings[0])
    t = b0 @ np.linalg.inv(wrapped)
    flags = tuple(_flag_from_basis(b, dec.orders[i], mult) for i, b in enumerate(bases))
    return FilteredLocalSystem(r, t, flags, mult)


def exponents_to_json(e) -> list:
    return vector_to_json(_as_exponents(e).exponents)


def exponents_from_json(obj, path: str = "") -> ExponentSet:
    if not isinstance(obj, list) or not obj:
        raise SchemaError(path, "expected a non-empty array of [re, im]")
    vals = [complex_from_json(z, f"{path}/{i}") for i, z in enumerate(obj)]
    try:
        return ExponentSet(tuple(vals))
    except UsageError as exc:
        raise SchemaError(path, str(exc)) from None


def filtration_to_json(f: FilteredLocalSystem, e) -> dict:
    out = {
        "exponents": exponents_to_json(e),
        "rank": f.rank,
        "monodromy": matrix_to_json(f.monodromy),
        "flags": [[matrix_to_json(b) for b in arc] for arc in f.flags],
    }
    if f.multiplicities is not None:
        out["multiplicities"] = list(f.multiplicities)
    return out


def filtration_from_json(obj, path: str = ""):
    """Decode ``{"exponents", "rank", "monodromy", "flags"}``; returns ``(F, E)``."""
    if not isinstance(obj, dict):
        raise SchemaError(path, "expected a filtration object")
    for key in ("exponents", "rank", "monodromy", "flags"):
        if key not in obj:
            raise SchemaError(f"{path}/{key}", "missing")
    e = exponents_from_json(obj["exponents"], f"{path}/exponents")
    r = obj["rank"]
    if not isinstance(r, int) or r < 1:
        raise SchemaError(f"{path}/rank", "must be a positive integer")
    t = matrix_from_json(obj["monodromy"], f"{path}/monodromy")
    if t.shape != (r, r):
        raise SchemaError(f"{path}/monodromy", f"expected {r}x{r}")
    if not isinstance(obj["flags"], list):
        raise SchemaError(f"{path}/flags", "expected an array of arcs")
    flags = []
    for i, arc in enumerate(obj["flags"]):
        if not isinstance(arc, list):
            raise SchemaError(f"{path}/flags/{i}", "expected an array of basis matrices")
        steps = []
        for s, b in enumerate(arc):
            mat = matrix_from_json(b, f"{path}/flags/{i}/{s}")
            if mat.size and mat.shape[0] != r:
                raise SchemaError(f"{path}/flags/{i}/{s}", f"expected {r} rows")
            steps.append(mat if mat.size else np.zeros((r, 0), dtype=complex))
        flags.append(steps)
    mult = obj.get("multiplicities")
    if mult is not None and (not isinstance(mult, list) or not all(isinstance(x, int) for x in mult)):
        raise SchemaError(f"{path}/multiplicities", "expected an array of integers")
    return FilteredLocalSystem(r, t, tuple(flags), tuple(mult) if mult else None), e
