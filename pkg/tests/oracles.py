"""Independent reference routes used only by the tests."""
from __future__ import annotations

import numpy as np

from nchodge.algebra_core.linalg import rank
from nchodge.algebra_core.oracles import lanczos_gamma
from nchodge.flat_transport import PlanePath, transport
from nchodge.quantum_connection import build_cpn_u_connection
from nchodge.stokes import FilteredLocalSystem, all_crossings, stokes_directions


def gamma_power_taylor(n: int, k: int, radius: float = 0.5, samples: int = 256) -> np.ndarray:
    """First ``k`` Taylor coefficients of ``Gamma(1+s)^n`` by a Cauchy integral of the Lanczos Gamma."""
    th = 2 * np.pi * np.arange(samples) / samples
    s = radius * np.exp(1j * th)
    f = np.array([lanczos_gamma(1 + x) ** n for x in s])
    return np.array([np.mean(f * np.exp(-1j * j * th)) / radius**j for j in range(k)])


def classical_limit_transport(n: int, psi0, u0: float, u1: float, qs=(1e-2, 1e-3, 1e-4), tol: float = 1e-13):
    """``q -> 0`` limit of the quantum ``u``-transport from ``u0`` to ``u1``.

    The quantum ``u``-connection is polynomial in ``q``, so the transported
    vector is analytic in ``q``; the values at ``qs`` are extrapolated to
    ``q = 0`` with the Lagrange polynomial through them.
    """
    path = PlanePath.polyline([complex(u0), complex(u1)])
    vals = [transport(build_cpn_u_connection(n, q), path, psi0, tol) for q in qs]
    qs = np.asarray(qs, dtype=float)
    out = np.zeros_like(vals[0])
    for i, v in enumerate(vals):
        w = np.prod([-qs[j] / (qs[i] - qs[j]) for j in range(len(qs)) if j != i])
        out = out + w * v
    return out


def _pinned(cr, t: int) -> bool:
    """Step ``t`` (1-based) is compared for equality across this crossing."""
    return not any(i <= t < j for i, j in cr.blocks)


def corrupt_filtration(f: FilteredLocalSystem, e, arc: int, step: int, rng) -> FilteredLocalSystem:
    """Replace one step of one flag by a different subspace of the same dimension.

    A step that some adjacent crossing pins (an equality condition) gets a
    random replacement. A step free at both adjacent crossings is only
    constrained by opposedness, and a random replacement would be valid
    again; there the replacement meets the complementary step of the
    opposite flag, which breaks opposedness.
    """
    rng = np.random.default_rng(rng)
    dec = stokes_directions(e)
    crossings = all_crossings(e)
    k_in = arc
    k_out = (arc + 1) % len(dec.arcs)
    old = f.flags[arc][step - 1]
    r, dim = old.shape
    if _pinned(crossings[k_in], step) or _pinned(crossings[k_out], step):
        while True:
            new = rng.standard_normal((r, dim)) + 1j * rng.standard_normal((r, dim))
            if rank(np.hstack([old, new]), 1e-9) > dim:
                break
    else:
        cr = crossings[k_in]
        a, b = next((i, j) for i, j in cr.blocks if i <= step < j)
        before = f.flags[dec.arc_before(k_in)]
        if k_in == 0:
            before = tuple(f.monodromy @ x for x in before)
        g = before[a - 2 + b - step]
        v = g @ (rng.standard_normal(g.shape[1]) + 1j * rng.standard_normal(g.shape[1]))
        prev = f.flags[arc][step - 2] if step >= 2 else np.zeros((r, 0), dtype=complex)
        fill = old @ (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim)))
        q = np.linalg.qr(np.hstack([prev, v[:, None], fill]))[0]
        new = q[:, :dim]
    flags = [list(x) for x in f.flags]
    flags[arc][step - 1] = new
    return FilteredLocalSystem(f.rank, f.monodromy, tuple(tuple(x) for x in flags), f.multiplicities)


def _cplx(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def random_biii(rng, n=None, max_dim=2):
    from nchodge.betti_gluing import BiiiData

    n = int(rng.integers(1, 5)) if n is None else n
    dims = [int(x) for x in rng.integers(1, max_dim + 1, size=n)]
    grid = [[_cplx(rng, dims[i], dims[j]) for j in range(n)] for i in range(n)]
    pts = tuple(complex(k, 0.5 * k) for k in range(n))
    return BiiiData(pts, tuple(dims), tuple(tuple(row) for row in grid))


def _fixing_monodromy(rng, psi):
    """Invertible ``T`` with ``(T - 1) psi = 0``."""
    r = psi.shape[0]
    if psi.shape[1] == 0 or rank(psi, 1e-9) == 0:
        return np.eye(r) + 0.5 * _cplx(rng, r, r) / np.sqrt(r)
    q, _ = np.linalg.qr(psi, mode="complete")
    k = rank(psi, 1e-9)
    comp = q[:, k:]
    return np.eye(r) + 0.5 * _cplx(rng, r, r - k) @ comp.conj().T / np.sqrt(r)


def random_descent(rng, kind="generic"):
    """Random descent data (``dim U <= 4``, at most 4 points).

    ``kind``: ``"generic"`` (independent random subspaces, acyclic or not),
    ``"acyclic"`` (from random gluing data in a random basis) or one of the
    adversarial families ``"rank_deficient"``, ``"repeated"``,
    ``"perturbed"`` and ``"dependent_column"``.
    """
    from nchodge.betti_gluing import DescentData, biii_to_descent

    if kind == "generic":
        r = int(rng.integers(1, 5))
        n = int(rng.integers(1, 5))
        psi = [_cplx(rng, r, int(rng.integers(0, r + 1))) for _ in range(n)]
        return DescentData(r, tuple(psi), tuple(_fixing_monodromy(rng, p) for p in psi))
    if kind in ("acyclic", "perturbed", "dependent_column"):
        while True:
            b = random_biii(rng, max_dim=2)
            if int(b.offsets()[-1]) <= 4:
                break
        d = biii_to_descent(b)
        g = _cplx(rng, d.dim_u, d.dim_u)
        psi = [g @ p for p in d.psi]
        if kind == "perturbed":
            psi = [p + 1e-3 * _cplx(rng, *p.shape) for p in psi]
        if kind == "dependent_column":
            i = int(np.argmax([p.shape[1] for p in psi]))
            p = psi[i]
            if p.shape[1] >= 1:
                psi[i] = np.hstack([p, p @ _cplx(rng, p.shape[1], 1)])
        return DescentData(d.dim_u, tuple(psi), tuple(_fixing_monodromy(rng, p) for p in psi))
    if kind == "rank_deficient":
        r = int(rng.integers(2, 5))
        n = int(rng.integers(1, 5))
        psi = []
        for _ in range(n):
            k = int(rng.integers(1, r + 1))
            inner = int(rng.integers(0, k))
            psi.append(_cplx(rng, r, inner) @ _cplx(rng, inner, k))
        return DescentData(r, tuple(psi), tuple(_fixing_monodromy(rng, p) for p in psi))
    if kind == "repeated":
        r = int(rng.integers(2, 5))
        line = _cplx(rng, r, r - 1)
        psi = [line, line @ _cplx(rng, r - 1, r - 1)]
        return DescentData(r, tuple(psi), tuple(_fixing_monodromy(rng, p) for p in psi))
    raise ValueError(kind)
