"""Formal arcs, Maurer-Cartan equations and canonical coordinates.

A formal arc ``a(eps) = a_1 eps + ... + a_K eps^K`` has even coefficients
in ``A``. Its lift ``a~(eps, u)`` solves ``(d + u Delta) a~ + [a~, a~]/2 = 0``
with ``a~(eps, 0) = a(eps)``; the coordinate change
``F(x) = u (exp(x/u) - 1)`` turns such solutions into ``(d + u Delta)``-cocycles,
and the perturbed projection ``T`` of a splitting sends their classes to
``H(A, d)((u))``. ``phi_T`` keeps the ``u^0`` part.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import factorial

import numpy as np

from ..algebra_core.linalg import null_space
from ..errors import (
    DegenerationError,
    GaugeAdjustmentError,
    UsageError,
    WindowOverflowError,
)
from .algebra import BVAlgebra
from .homological import Splitting, build_splitting, check_degeneration

MAX_ORDER = 6
MAX_U = 8
SOLVE_TOL = 1e-9


def _check_order(order: int) -> int:
    if int(order) != order or order < 1:
        raise UsageError("epsilon order must be an integer >= 1")
    if order > MAX_ORDER:
        raise UsageError(f"epsilon order {order} exceeds the cap {MAX_ORDER}")
    return int(order)


def _check_window(u_min: int, u_max: int) -> None:
    if u_min > u_max:
        raise UsageError("empty u-window")
    if u_min < -MAX_U or u_max > MAX_U:
        raise WindowOverflowError(
            f"u-window [u^{u_min}, u^{u_max}] exceeds the supported [u^-{MAX_U}, u^{MAX_U}]",
            (u_min, u_max),
        )


@dataclass(frozen=True)
class FormalArc:
    """``a(eps) = sum_{k=1}^K coeffs[k-1] eps^k``.

    Parameters
    ----------
    coeffs : ndarray, shape (K, D)
    parity : int
        Declared parity of every coefficient (0 for Maurer-Cartan arcs,
        1 for gauge parameters).
    """

    coeffs: np.ndarray
    parity: int = 0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 2:
            raise UsageError("arc coefficients must be a (K, D) array")
        _check_order(c.shape[0])
        if self.parity not in (0, 1):
            raise UsageError("parity must be 0 or 1")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @property
    def order(self) -> int:
        return int(self.coeffs.shape[0])

    @property
    def dim(self) -> int:
        return int(self.coeffs.shape[1])

    def check_parity(self, a: BVAlgebra, tol: float = 1e-12) -> None:
        if self.dim != a.dim:
            raise UsageError(f"arc lives in dimension {self.dim}, algebra has {a.dim}")
        wrong = a.parity != self.parity
        bad = np.max(np.abs(self.coeffs[:, wrong]), initial=0.0)
        if bad > tol * max(1.0, np.max(np.abs(self.coeffs), initial=0.0)):
            raise UsageError(f"arc coefficients are not of parity {self.parity} (stray part {bad:.3g})")

    def eps_array(self) -> np.ndarray:
        """Coefficients with a zero row for ``eps^0`` prepended, shape (K+1, D)."""
        return np.vstack([np.zeros((1, self.dim), dtype=complex), self.coeffs])


@dataclass(frozen=True)
class MixedSeries:
    """Element of ``eps A((u))[[eps]]`` truncated to ``eps^K`` and ``u^{u_min}..u^{u_max}``.

    ``coeffs[n, j - u_min]`` is the vector coefficient of ``eps^n u^j``;
    the row ``n = 0`` is kept (and stays zero for series in ``eps A``).
    """

    coeffs: np.ndarray
    u_min: int

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=complex)
        if c.ndim != 3:
            raise UsageError("mixed series coefficients must have shape (K+1, W, D)")
        _check_order(max(1, c.shape[0] - 1))
        _check_window(int(self.u_min), int(self.u_min) + c.shape[1] - 1)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        object.__setattr__(self, "u_min", int(self.u_min))

    @classmethod
    def zeros(cls, dim: int, order: int, u_min: int, u_max: int) -> "MixedSeries":
        _check_window(u_min, u_max)
        return cls(np.zeros((order + 1, u_max - u_min + 1, dim), dtype=complex), u_min)

    @classmethod
    def from_arc(cls, arc: FormalArc) -> "MixedSeries":
        return cls(arc.eps_array()[:, None, :], 0)

    @property
    def order(self) -> int:
        return int(self.coeffs.shape[0] - 1)

    @property
    def u_max(self) -> int:
        return self.u_min + int(self.coeffs.shape[1]) - 1

    @property
    def dim(self) -> int:
        return int(self.coeffs.shape[2])

    def component(self, n: int, j: int) -> np.ndarray:
        if not 0 <= n <= self.order or not self.u_min <= j <= self.u_max:
            return np.zeros(self.dim, dtype=complex)
        return self.coeffs[n, j - self.u_min]

    def window(self, u_min: int, u_max: int) -> "MixedSeries":
        """Same series on another window (padding with zeros or dropping terms)."""
        _check_window(u_min, u_max)
        out = np.zeros((self.order + 1, u_max - u_min + 1, self.dim), dtype=complex)
        lo, hi = max(u_min, self.u_min), min(u_max, self.u_max)
        if lo <= hi:
            out[:, lo - u_min:hi - u_min + 1] = self.coeffs[:, lo - self.u_min:hi - self.u_min + 1]
        return MixedSeries(out, u_min)

    def __add__(self, other: "MixedSeries") -> "MixedSeries":
        if self.order != other.order or self.dim != other.dim:
            raise UsageError("mixed series of different shapes")
        lo, hi = min(self.u_min, other.u_min), max(self.u_max, other.u_max)
        return MixedSeries(self.window(lo, hi).coeffs + other.window(lo, hi).coeffs, lo)

    def scale(self, c) -> "MixedSeries":
        return MixedSeries(self.coeffs * c, self.u_min)

    def apply(self, op) -> "MixedSeries":
        return MixedSeries(self.coeffs @ np.asarray(op).T, self.u_min)

    def shift(self, k: int) -> "MixedSeries":
        """Multiply by ``u^k``."""
        return MixedSeries(self.coeffs, self.u_min + k)

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.coeffs), initial=0.0))


def _bilinear(x: MixedSeries, y: MixedSeries, tensor: np.ndarray, u_max: int | None = None, shift: int = 0) -> MixedSeries:
    """``u^shift sum tensor[i, j, :] x_i y_j`` with convolution in ``eps`` and ``u``."""
    k = x.order
    lo = x.u_min + y.u_min + shift
    hi = x.u_max + y.u_max + shift
    if u_max is not None:
        hi = min(hi, u_max)
    if hi < lo:
        return MixedSeries.zeros(x.dim, k, lo, lo)
    _check_window(lo, hi)
    z = np.einsum("naI,mbJ,IJk->nmabk", x.coeffs, y.coeffs, tensor)
    out = np.zeros((k + 1, hi - lo + 1, x.dim), dtype=complex)
    wx, wy = x.coeffs.shape[1], y.coeffs.shape[1]
    for n in range(k + 1):
        for m in range(k + 1 - n):
            for a in range(wx):
                for b in range(min(wy, hi - lo - a + 1)):
                    out[n + m, a + b] += z[n, m, a, b]
    return MixedSeries(out, lo)


def series_product(alg: BVAlgebra, x: MixedSeries, y: MixedSeries, u_max: int | None = None) -> MixedSeries:
    return _bilinear(x, y, alg.mult, u_max)


def series_bracket(alg: BVAlgebra, x: MixedSeries, y: MixedSeries, u_max: int | None = None) -> MixedSeries:
    return _bilinear(x, y, alg.bracket_tensor, u_max)


def differential(alg: BVAlgebra, x: MixedSeries) -> MixedSeries:
    """``(d + u Delta) x``."""
    return x.apply(alg.d) + x.apply(alg.delta).shift(1)


def maurer_cartan_residual(alg: BVAlgebra, arc: FormalArc) -> np.ndarray:
    """Coefficients of ``eps^1..eps^K`` in ``d a + [a, a]/2``, shape (K, D).

    Examples
    --------
    >>> from nchodge.bv_formal.generators import truncated_polynomial
    >>> a = FormalArc(np.array([[0, 1, 0]]))
    >>> float(np.abs(maurer_cartan_residual(truncated_polynomial(3), a)).max())
    0.0
    """
    arc.check_parity(alg)
    x = MixedSeries.from_arc(arc)
    res = x.apply(alg.d) + series_bracket(alg, x, x).scale(0.5)
    return res.coeffs[1:, -res.u_min]


def lifted_residual(alg: BVAlgebra, x: MixedSeries) -> MixedSeries:
    """``(d + u Delta) x + [x, x]/2`` over the full window."""
    return differential(alg, x) + series_bracket(alg, x, x).scale(0.5)


def f_transform(alg: BVAlgebra, x: MixedSeries, u_max: int | None = None) -> MixedSeries:
    """``F(x) = u (exp(x/u) - 1) = sum_m x^m / (m! u^{m-1})``, truncated at ``eps^K``.

    The result spans ``u^{K (u_min - 1) + 1}`` upward; ``u_max`` drops
    higher powers (all lower coefficients stay exact).

    Examples
    --------
    >>> from nchodge.bv_formal.generators import truncated_polynomial
    >>> x = MixedSeries(np.array([[[0, 0, 0]], [[0, 1, 0]], [[0, 0, 0]]]), 0)
    >>> b = f_transform(truncated_polynomial(3), x)
    >>> b.u_min, b.component(2, -1).real.tolist()
    (-1, [0.0, 0.0, 0.5])
    """
    k = x.order
    top_min = min(m * (x.u_min - 1) + 1 for m in range(1, k + 1))
    top_max = max(m * (x.u_max - 1) + 1 for m in range(1, k + 1))
    if u_max is not None:
        top_max = min(top_max, u_max)
    if top_min < -MAX_U or top_max > MAX_U:
        raise WindowOverflowError(
            f"F needs the u-window [u^{top_min}, u^{top_max}], beyond [u^-{MAX_U}, u^{MAX_U}]",
            (top_min, top_max),
        )
    total = x.window(top_min, top_max)
    power = x.window(x.u_min, min(x.u_max, top_max))
    for m in range(2, k + 1):
        # x^m / (m! u^{m-1}) from the previous power
        power = _bilinear(power, x, alg.mult, u_max=top_max, shift=-1).scale(1.0 / m)
        total = total + power.window(top_min, top_max)
    return total


def _even_columns(alg: BVAlgebra, parity: int = 0) -> np.ndarray:
    return np.flatnonzero(alg.parity == parity)


def _stack_ops(blocks: list, rows: int, cols: int, dim: int, ncols: int) -> np.ndarray:
    m = np.zeros((rows * dim, cols * ncols), dtype=complex)
    for (r, c), blk in blocks:
        m[r * dim:(r + 1) * dim, c * ncols:(c + 1) * ncols] += blk
    return m


@dataclass(frozen=True)
class PhiResult:
    """Output of :func:`phi_t`.

    ``classes[k-1]`` holds the ``eps^k`` coefficient in the cohomology basis
    of the splitting; ``residual`` is the largest ``u^{j > 0}`` component of
    ``T([b~_n])`` left after the gauge selection. ``t_components[k-1]``
    holds ``T([b~_k])`` from ``u^{t_u_min}`` upward; its negative powers
    are determined by the arc and are not part of the normalization.
    """

    classes: np.ndarray
    residual: float
    lift: MixedSeries
    transformed: MixedSeries
    t_components: np.ndarray
    t_u_min: int


def phi_t(
    alg: BVAlgebra,
    arc: FormalArc,
    splitting: Splitting | None = None,
    order: int | None = None,
    strict: bool = False,
    tol: float = 1e-8,
) -> PhiResult:
    """Canonical coordinates of a Maurer-Cartan arc, order by order in ``eps``.

    At each order ``n`` the lift coefficients ``a~_{n,1..M}`` (``M = K + 1``)
    solve the ``u^1..u^M`` equations of ``(d + u Delta) a~ + [a~, a~]/2 = 0``;
    among all solutions the one minimizing the ``u^{j > 0}`` components of
    ``T(F(a~)_n)`` is taken (least squares, minimal norm). The ``u^0``
    components form the result.

    The ``u^{j < 0}`` components cannot be changed by the lift (the lift
    only adds non-negative powers) and are generally nonzero as soon as
    ``a^2 != 0``; e.g. ``a = eps x`` in ``C[x]/(x^3)`` leaves
    ``eps^2 x^2 / (2u)``. They are reported in ``t_components``.

    Examples
    --------
    >>> from nchodge.bv_formal.generators import truncated_polynomial
    >>> r = phi_t(truncated_polynomial(3), FormalArc([[0, 1, 0], [0, 0, 0]]))
    >>> r.classes.real.tolist(), r.residual
    ([[0.0, 1.0, 0.0], [0.0, 0.0, 0.0]], 0.0)

    Raises
    ------
    DegenerationError
        If the algebra is not degenerate on the needed window or the lift
        equations are inconsistent at some order (the order is named).
    GaugeAdjustmentError
        With ``strict=True``, when some ``u``-dependence survives.
    """
    k = arc.order if order is None else _check_order(order)
    if k > arc.order:
        raise UsageError(f"arc known to order {arc.order}, requested {k}")
    arc.check_parity(alg)
    coeffs = arc.coeffs[:k]
    arc = FormalArc(coeffs)
    mc = maurer_cartan_residual(alg, arc)
    scale = max(1.0, float(np.max(np.abs(coeffs), initial=0.0))) ** 2
    if np.max(np.abs(mc), initial=0.0) > tol * scale:
        raise UsageError(f"arc violates the Maurer-Cartan equation (residual {np.max(np.abs(mc)):.3g})")
    m_u = k + 1
    rep = check_degeneration(alg, m_u + 1)
    if not rep.degenerate:
        raise DegenerationError(f"algebra is not degenerate: H(A[u]/u^N) is not free at N={rep.first_failure()}")
    s = build_splitting(alg) if splitting is None else splitting
    dim = alg.dim
    cols = _even_columns(alg)
    nc = cols.size
    embed = np.zeros((dim, nc))
    embed[cols, np.arange(nc)] = 1.0

    lift = np.zeros((k + 1, m_u + 1, dim), dtype=complex)
    lift[1:, 0] = coeffs
    u_lo = 1 - k
    t_comp = np.zeros((k, m_u - u_lo + 1, s.dim_h), dtype=complex)
    residual = 0.0
    t_terms = s.t_terms(alg, m_u - u_lo)
    for n in range(1, k + 1):
        # bracket terms from lower orders at eps^n, u^0..u^M
        low = lift.copy()
        low[n:] = 0
        low[n, 0] = coeffs[n - 1]
        xs = MixedSeries(low, 0)
        known = (series_bracket(alg, xs, xs, u_max=m_u).scale(0.5)).window(0, m_u).coeffs[n]
        # equations at u^j (j = 1..M): d z_j + Delta z_{j-1} = -known_j - [j == 1] Delta a_n
        blocks = []
        for j in range(1, m_u + 1):
            blocks.append(((j - 1, j - 1), alg.d @ embed))
            if j >= 2:
                blocks.append(((j - 1, j - 2), alg.delta @ embed))
        mat = _stack_ops(blocks, m_u, m_u, dim, nc)
        rhs = -known[1:].copy()
        rhs[0] -= alg.delta @ coeffs[n - 1]
        rhs = rhs.reshape(-1)
        z0, *_ = np.linalg.lstsq(mat, rhs, rcond=None)
        bad = np.linalg.norm(mat @ z0 - rhs)
        if bad > tol * max(1.0, np.linalg.norm(rhs)):
            raise DegenerationError(f"lift equations are inconsistent at epsilon-order {n} (residual {bad:.3g})")
        null = null_space(mat, 1e-10)

        # F(a~)_n is affine in z: the part without z, plus z itself
        base = lift.copy()
        base[n:] = 0
        base[n, 0] = coeffs[n - 1]
        fb = f_transform(alg, MixedSeries(base, 0), u_max=m_u).window(u_lo, m_u).coeffs[n]

        def t_of(vec_by_u):
            out = np.zeros((m_u - u_lo + 1, s.dim_h), dtype=complex)
            for j in range(out.shape[0]):
                for t in range(j + 1):
                    out[j] += t_terms[t] @ vec_by_u[j - t]
            return out

        def z_to_u(z):
            v = np.zeros((m_u - u_lo + 1, dim), dtype=complex)
            v[1 - u_lo:] = (embed @ z.reshape(m_u, nc).T).T
            return v

        t_base = t_of(fb)
        # components at u^j > 0 that are exact on this window
        exact_hi = m_u + 1 - n
        rows = [j - u_lo for j in range(1, exact_hi + 1)]
        t_z0 = t_of(z_to_u(z0))
        if null.shape[1]:
            resp = np.stack([t_of(z_to_u(v))[rows].reshape(-1) for v in null.T], axis=1)
            target = -(t_base + t_z0)[rows].reshape(-1)
            y, *_ = np.linalg.lstsq(resp, target, rcond=None)
            z = z0 + null @ y
        else:
            z = z0
        lift[n, 1:] = (embed @ z.reshape(m_u, nc).T).T
        total = t_base + t_of(z_to_u(z))
        t_comp[n - 1] = total
        residual = max(residual, float(np.max(np.abs(total[rows]), initial=0.0)))
    if strict and residual > tol:
        raise GaugeAdjustmentError(f"u-dependence of size {residual:.3g} survives the gauge selection")
    lift_series = MixedSeries(lift, 0)
    transformed = f_transform(alg, lift_series, u_max=m_u)
    return PhiResult(t_comp[:, -u_lo].copy(), residual, lift_series, transformed, t_comp, u_lo)


def _eps_bracket(alg: BVAlgebra, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bracket of two ``eps``-series given as (K+1, D) arrays, truncated at ``eps^K``."""
    k = x.shape[0] - 1
    out = np.zeros_like(x, dtype=complex)
    beta = alg.bracket_tensor
    for n in range(k + 1):
        for m in range(k + 1 - n):
            out[n + m] += np.einsum("i,j,ijk->k", x[n], y[m], beta)
    return out


def gauge_transform(alg: BVAlgebra, arc: FormalArc, xi: FormalArc) -> FormalArc:
    """Time-one flow of ``da/dt = d xi + [xi, a]`` for an odd ``eps``-series ``xi``.

    The flow is affine in ``a`` and every term raises the ``eps``-order,
    so the exponential series terminates.
    """
    if xi.parity != 1:
        raise UsageError("gauge parameters must be odd")
    xi.check_parity(alg)
    arc.check_parity(alg)
    k = arc.order
    x = np.zeros((k + 1, alg.dim), dtype=complex)
    x[1:min(k, xi.order) + 1] = xi.coeffs[:k]
    a = arc.eps_array()
    out = a.copy()
    term = a.copy()
    forcing = x @ alg.d.T
    # a(1) = sum_m L^m a / m! + sum_{m>=1} L^{m-1} c / m! with L = [xi, .]
    cterm = forcing.copy()
    for m in range(1, k + 1):
        term = _eps_bracket(alg, x, term)
        out += term / factorial(m)
        out += cterm / factorial(m)
        cterm = _eps_bracket(alg, x, cterm)
    return FormalArc(out[1:])


def random_mc_arc(alg: BVAlgebra, order: int, rng=None, scale: float = 1.0, attempts: int = 20) -> FormalArc:
    """Random even Maurer-Cartan arc, solved order by order with least squares.

    Each order adds a random element of ``ker d``; raises
    DegenerationError if every attempt meets an obstruction.
    """
    rng = np.random.default_rng(rng)
    order = _check_order(order)
    cols = _even_columns(alg)
    d_even = alg.d[:, cols]
    ker = null_space(d_even, 1e-10)
    for _ in range(attempts):
        coeffs = np.zeros((order, alg.dim), dtype=complex)
        ok = True
        for n in range(1, order + 1):
            arc_part = np.zeros((order + 1, alg.dim), dtype=complex)
            arc_part[1:n] = coeffs[:n - 1]
            br = _eps_bracket(alg, arc_part, arc_part)[n] * 0.5
            z, *_ = np.linalg.lstsq(d_even, -br, rcond=None)
            if np.linalg.norm(d_even @ z + br) > 1e-10 * max(1.0, np.linalg.norm(br)):
                ok = False
                break
            if ker.shape[1]:
                w = rng.standard_normal(ker.shape[1]) + 1j * rng.standard_normal(ker.shape[1])
                z = z + scale * (ker @ w)
            coeffs[n - 1, cols] = z
        if ok:
            return FormalArc(coeffs)
    raise DegenerationError("Maurer-Cartan equation obstructed in every attempt")


def random_lifted_mc(alg: BVAlgebra, rng=None, u_degree: int = 1, attempts: int = 50) -> MixedSeries:
    """Random even ``a~ = eps a_1(u) + eps^2 a_2(u)`` solving ``(d + u Delta) a~ + [a~, a~]/2 = 0``.

    ``a_1`` has ``u``-degree ``u_degree`` and ``a_2`` twice that, both
    polynomial; the equations hold at every power of ``u``.
    """
    rng = np.random.default_rng(rng)
    dim = alg.dim
    cols = _even_columns(alg)
    nc = cols.size
    embed = np.zeros((dim, nc))
    embed[cols, np.arange(nc)] = 1.0

    def op(deg):
        blocks = []
        for j in range(deg + 1):
            blocks.append(((j, j), alg.d @ embed))
            blocks.append(((j + 1, j), alg.delta @ embed))
        return _stack_ops(blocks, deg + 2, deg + 1, dim, nc)

    m1 = op(u_degree)
    ker1 = null_space(m1, 1e-10)
    m2 = op(2 * u_degree)
    ker2 = null_space(m2, 1e-10)
    for _ in range(attempts):
        if ker1.shape[1] == 0:
            break
        w = rng.standard_normal(ker1.shape[1]) + 1j * rng.standard_normal(ker1.shape[1])
        z1 = ker1 @ w
        a1 = (embed @ z1.reshape(u_degree + 1, nc).T).T
        x = np.zeros((3, 2 * u_degree + 1, dim), dtype=complex)
        x[1, :u_degree + 1] = a1
        xs = MixedSeries(x, 0)
        br = series_bracket(alg, xs, xs).scale(0.5).window(0, 2 * u_degree + 1).coeffs[2]
        rhs = -br.reshape(-1)
        z2, *_ = np.linalg.lstsq(m2, rhs, rcond=None)
        if np.linalg.norm(m2 @ z2 - rhs) > 1e-10 * max(1.0, np.linalg.norm(rhs)):
            continue
        if ker2.shape[1]:
            w2 = rng.standard_normal(ker2.shape[1]) + 1j * rng.standard_normal(ker2.shape[1])
            z2 = z2 + ker2 @ w2
        x[2] = (embed @ z2.reshape(2 * u_degree + 1, nc).T).T
        return MixedSeries(x, 0)
    raise DegenerationError("no unobstructed second-order lift found")
