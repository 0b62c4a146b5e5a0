"""Transferred brackets on ``H(A, d)`` for the Lie structure given by the BV bracket."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np

from ..errors import UsageError
from .algebra import BVAlgebra
from .homological import Splitting, build_splitting


@dataclass(frozen=True)
class MinimalModelReport:
    m2: float
    m3: float | None

    def vanish(self, tol: float = 1e-9) -> bool:
        return self.m2 <= tol and (self.m3 is None or self.m3 <= tol)

    def to_json(self) -> dict:
        return {"m2": self.m2, "m3": self.m3}


def transferred_m2(a: BVAlgebra, s: Splitting) -> np.ndarray:
    """``m2[x, y, :] = p [i e_x, i e_y]`` on the cohomology basis."""
    x = np.einsum("ia,jb,ijk->abk", s.incl, s.incl, a.bracket_tensor, optimize=True)
    return x @ s.proj.T


def transferred_m3(a: BVAlgebra, s: Splitting) -> np.ndarray:
    """Graded symmetrization of ``p [h [i e_x, i e_y], i e_z]``.

    The sum runs over all six orderings of the arguments with the Koszul
    sign of the parities in ``A``; this is the cubic term
    ``p [h [x, x], x]`` of an even element ``x`` with coefficients in an
    auxiliary Grassmann algebra, polarized.
    """
    beta = a.bracket_tensor
    x = np.einsum("ia,jb,ijk->abk", s.incl, s.incl, beta, optimize=True)
    raw = np.einsum("abi,jc,ijk->abck", x @ s.h.T, s.incl, beta, optimize=True) @ s.proj.T
    par = s.parity
    axes = [par[:, None, None], par[None, :, None], par[None, None, :]]
    total = np.zeros_like(raw)
    for perm in permutations(range(3)):
        sign = np.ones(raw.shape[:3])
        for i in range(3):
            for j in range(i + 1, 3):
                if perm[i] > perm[j]:
                    sign = sign * (-1.0) ** (axes[perm[i]] * axes[perm[j]])
        moved = np.transpose(raw, [perm.index(0), perm.index(1), perm.index(2), 3])
        total += sign[..., None] * moved
    return total


def minimal_model_products_vanish(a: BVAlgebra, s: Splitting | None = None, order: int = 3) -> MinimalModelReport:
    """Max norms of the transferred ``m2`` (and ``m3`` when ``order == 3``).

    Both vanish when ``A`` has the degeneration property; nothing is
    asserted otherwise.
    """
    if order not in (2, 3):
        raise UsageError("order must be 2 or 3")
    s = build_splitting(a) if s is None else s
    if s.dim_h == 0:
        return MinimalModelReport(0.0, 0.0 if order == 3 else None)
    m2 = float(np.max(np.abs(transferred_m2(a, s))))
    m3 = float(np.max(np.abs(transferred_m3(a, s)))) if order == 3 else None
    return MinimalModelReport(m2, m3)
