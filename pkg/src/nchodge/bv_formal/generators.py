"""Built-in BV algebras: Grassmann algebras with contraction operators,
truncated polynomial rings and square-zero extensions."""
from __future__ import annotations

from itertools import combinations

import numpy as np

from ..errors import UsageError
from .algebra import BVAlgebra


def grassmann_basis(k: int) -> list:
    """Monomials ``theta_S`` as sorted tuples, ordered by degree then lexicographically."""
    if k < 0:
        raise UsageError("number of generators must be non-negative")
    return [s for r in range(k + 1) for s in combinations(range(k), r)]


def _index(basis) -> dict:
    return {s: i for i, s in enumerate(basis)}


def grassmann_mult(k: int) -> np.ndarray:
    basis = grassmann_basis(k)
    idx = _index(basis)
    dim = len(basis)
    m = np.zeros((dim, dim, dim))
    for i, s in enumerate(basis):
        for j, t in enumerate(basis):
            if set(s) & set(t):
                continue
            inversions = sum(1 for x in s for y in t if x > y)
            m[i, j, idx[tuple(sorted(s + t))]] = (-1) ** inversions
    return m


def partial(k: int, i: int) -> np.ndarray:
    """Left derivative ``d/d theta_i``."""
    basis = grassmann_basis(k)
    idx = _index(basis)
    op = np.zeros((len(basis), len(basis)))
    for col, s in enumerate(basis):
        if i in s:
            pos = s.index(i)
            rest = s[:pos] + s[pos + 1:]
            op[idx[rest], col] = (-1) ** pos
    return op


def theta(k: int, c: int) -> np.ndarray:
    """Left multiplication by ``theta_c``."""
    basis = grassmann_basis(k)
    idx = _index(basis)
    op = np.zeros((len(basis), len(basis)))
    for col, s in enumerate(basis):
        if c not in s:
            inversions = sum(1 for x in s if x < c)
            op[idx[tuple(sorted(s + (c,)))], col] = (-1) ** inversions
    return op


def grassmann_algebra(k: int, d=None, delta=None, name: str = "") -> BVAlgebra:
    basis = grassmann_basis(k)
    dim = len(basis)
    par = [len(s) % 2 for s in basis]
    d = np.zeros((dim, dim)) if d is None else d
    delta = np.zeros((dim, dim)) if delta is None else delta
    return BVAlgebra(par, 0, grassmann_mult(k), d, delta, name)


def grassmann_contraction(k: int = 3, d_index: int | None = None, c: int = 2, i: int = 0, j: int = 1) -> BVAlgebra:
    """``Delta = theta_c d_i d_j`` (odd, second order) and optionally ``d = d/d theta_b``.

    ``c`` must differ from ``i``, ``j`` and from ``d_index`` so that every
    axiom holds.
    """
    if len({c, i, j}) != 3 or max(c, i, j) >= k:
        raise UsageError("need distinct indices c, i, j below k")
    if d_index is not None and (d_index == c or not 0 <= d_index < k):
        raise UsageError("d_index must differ from c")
    delta = theta(k, c) @ partial(k, i) @ partial(k, j)
    d = None if d_index is None else partial(k, d_index)
    return grassmann_algebra(k, d, delta, f"grassmann{k}:theta{c}d{i}d{j}")


def grassmann_even_laplacian() -> BVAlgebra:
    """Two generators, ``d = 0`` and the even operator ``d^2/d theta_1 d theta_2``.

    ``Delta`` here is even, so the operator-parity axiom fails and the
    bracket identities (written for odd ``Delta``) fail with it. Its
    complex ``(A[u]/u^2, u Delta)`` has 6-dimensional cohomology, not 8.
    """
    return grassmann_algebra(2, None, partial(2, 0) @ partial(2, 1), "grassmann2:d0d1")


def grassmann_degenerate(kind: str = "small") -> BVAlgebra:
    """Non-abelian Grassmann algebras with the degeneration property.

    ``"small"``: 4 generators, ``d = theta_1 theta_2 d/d theta_0`` and
    ``Delta = theta_1 d_0 d_3`` (``dim H = 12``); brackets of Maurer-Cartan
    arcs vanish there. ``"large"``: 5 generators,
    ``d = theta_0 theta_3 d/d theta_2`` and ``Delta = theta_3 d_1 d_2``
    (``dim H = 24``), where they do not.
    """
    if kind == "small":
        k, d = 4, theta(4, 1) @ theta(4, 2) @ partial(4, 0)
        delta = theta(4, 1) @ partial(4, 0) @ partial(4, 3)
    elif kind == "large":
        k, d = 5, theta(5, 0) @ theta(5, 3) @ partial(5, 2)
        delta = theta(5, 3) @ partial(5, 1) @ partial(5, 2)
    else:
        raise UsageError("kind must be 'small' or 'large'")
    return grassmann_algebra(k, d, delta, f"grassmann_degenerate_{kind}")


def truncated_polynomial(k: int) -> BVAlgebra:
    """``C[x]/(x^k)`` with ``x`` even and ``d = Delta = 0``."""
    if k < 1:
        raise UsageError("k must be >= 1")
    m = np.zeros((k, k, k))
    for i in range(k):
        for j in range(k - i):
            m[i, j, i + j] = 1.0
    return BVAlgebra([0] * k, 0, m, np.zeros((k, k)), np.zeros((k, k)), f"poly{k}")


def square_zero(parity, d=None) -> BVAlgebra:
    """``C 1 ⊕ V`` with ``V V = 0``; ``parity`` lists the parities of ``V``'s basis.

    With ``Delta = 0`` every product of positive-degree elements vanishes,
    the abelian case.
    """
    par = [0] + [int(p) for p in parity]
    dim = len(par)
    m = np.zeros((dim, dim, dim))
    for i in range(dim):
        m[0, i, i] = 1.0
        m[i, 0, i] = 1.0
    if d is None:
        d = np.zeros((dim, dim))
    else:
        d = np.asarray(d, dtype=complex)
        if d.shape == (dim - 1, dim - 1):
            full = np.zeros((dim, dim), dtype=complex)
            full[1:, 1:] = d
            d = full
    return BVAlgebra(par, 0, m, d, np.zeros((dim, dim)), "square_zero")


def random_chain_differential(parity, rank_: int, rng=None) -> np.ndarray:
    """Odd ``d`` with ``d^2 = 0`` and the given rank on a graded space.

    Picks ``rank_`` pairs (odd-to-even or even-to-odd) of basis vectors in
    a random parity-preserving change of basis.
    """
    rng = np.random.default_rng(rng)
    par = np.asarray(parity)
    ev, od = np.flatnonzero(par == 0), np.flatnonzero(par == 1)
    dim = par.size
    if 2 * rank_ > dim:
        raise UsageError("rank too large for the space")
    ev_l, od_l = list(rng.permutation(ev)), list(rng.permutation(od))
    d0 = np.zeros((dim, dim))
    for _ in range(rank_):
        if ev_l and od_l and (len(ev_l) >= 2 or len(od_l) >= 2):
            src, dst = (ev_l.pop(), od_l.pop()) if rng.random() < 0.5 else (od_l.pop(), ev_l.pop())
        else:
            raise UsageError("not enough basis vectors of both parities")
        d0[dst, src] = 1.0
    g = np.zeros((dim, dim), dtype=complex)
    for idx in (ev, od):
        block = rng.standard_normal((idx.size, idx.size)) + 1j * rng.standard_normal((idx.size, idx.size))
        g[np.ix_(idx, idx)] = block
    return g @ d0 @ np.linalg.inv(g)


def builtin_algebras() -> dict:
    """Named algebras used by the command line and the tests."""
    return {
        "grassmann_even": grassmann_even_laplacian(),
        "grassmann_theta": grassmann_algebra(1, None, partial(1, 0), "grassmann1:d0"),
        "contraction3": grassmann_contraction(3),
        "contraction4_d": grassmann_contraction(4, 0, 2, 0, 1),
        "degenerate_small": grassmann_degenerate("small"),
        "degenerate_large": grassmann_degenerate("large"),
        "poly3": truncated_polynomial(3),
        "square_zero": square_zero([0, 1, 0, 1]),
    }
