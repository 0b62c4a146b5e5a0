"""Acceptance suite: ten criteria, each reported as one PASS/FAIL line.

Run under pytest (the lines are repeated in the terminal summary) or
directly with ``python tests/test_acceptance.py``.
"""
import cmath
import math
import os
import sys
import time

import numpy as np

sys.path.insert(0, os.path.dirname(__file__))

from oracles import (  # noqa: E402
    corrupt_filtration,
    gamma_power_taylor,
    random_biii,
    random_descent,
)

from nchodge.algebra_core.constants import euler_gamma, log_gamma_taylor, zeta  # noqa: E402
from nchodge.algebra_core.oracles import euler_gamma_richardson, lanczos_gamma, zeta_direct  # noqa: E402
from nchodge.betti_gluing import biii_to_descent, check_acyclicity, descent_to_biii  # noqa: E402
from nchodge.bv_formal import (  # noqa: E402
    FormalArc,
    build_splitting,
    builtin_algebras,
    check_bv_axioms,
    check_degeneration,
    differential,
    f_transform,
    gauge_transform,
    grassmann_degenerate,
    grassmann_even_laplacian,
    phi_t,
    random_chain_differential,
    random_lifted_mc,
    random_mc_arc,
    square_zero,
    truncated_polynomial,
)
from nchodge.char_class import gamma_hat_cpn  # noqa: E402
from nchodge.flat_transport import PlanePath, check_conjugation_identity, monodromy, psi_const  # noqa: E402
from nchodge.quantum_connection import build_cpn_q_connection, build_cpn_u_connection, kappa_matrix  # noqa: E402
from nchodge.stokes import (  # noqa: E402
    all_crossings,
    circle_composite,
    generate_filtration,
    stokes_directions,
    validate_filtration,
)

RESULTS = {}


def report(number, name, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] {number:2d} {name}: {detail}"
    RESULTS[number] = line
    print(line)
    return ok


def _nilpotent_log(u):
    """``log(1 + x)`` for a nilpotent ``x = u - 1`` as a finite sum."""
    x = u - np.eye(u.shape[0])
    out = np.zeros_like(x)
    power = np.eye(u.shape[0], dtype=complex)
    for k in range(1, u.shape[0] + 1):
        power = power @ x
        out += (-1) ** (k + 1) * power / k
    return out


def _nilpotent_exp(x):
    out = np.eye(x.shape[0], dtype=complex)
    power = np.eye(x.shape[0], dtype=complex)
    for k in range(1, x.shape[0] + 1):
        power = power @ x / k
        out += power
    return out


def test_01_gamma_class_reproduction():
    start = time.perf_counter()
    err = 0.0
    oracle_err = 0.0
    for n in range(2, 7):
        got = psi_const(n, -1.0)
        err = max(err, float(np.max(np.abs(got - gamma_hat_cpn(n).coeffs))))
        oracle_err = max(oracle_err, float(np.max(np.abs(got - gamma_power_taylor(n, n)))))
    elapsed = time.perf_counter() - start
    ok = err <= 1e-10 and oracle_err <= 1e-10 and elapsed < 1.0
    assert report(
        1, "gamma class", ok,
        f"max |psi_const - Gamma-hat| = {err:.1e}, vs Cauchy oracle {oracle_err:.1e}, {elapsed:.2f} s",
    )


def test_02_u_independence():
    spread = 0.0
    for n in (2, 3, 4):
        vals = [psi_const(n, u) for u in (-0.5, -1.0, -2.0, -4.0)]
        spread = max(spread, max(float(np.max(np.abs(v - vals[0]))) for v in vals))
    assert report(2, "u-independence", spread <= 1e-8, f"max spread {spread:.1e}")


def test_03_conjugation_identity():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        n = int(rng.integers(2, 6))
        u = -float(rng.uniform(0.5, 4.0))
        v = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        worst = max(worst, check_conjugation_identity(n, u, v))
    assert report(3, "conjugation identity", worst < 1e-8, f"max residual {worst:.1e} on 100 vectors")


def _q_monodromy_error(n, radius, u=-1.0):
    loop = PlanePath.circle(0j, radius, 1, math.pi)
    m = monodromy(build_cpn_q_connection(n, u), loop, 1e-12)
    target = _nilpotent_exp((2j * math.pi / u) * np.diag(np.ones(n - 1), -1))
    return float(np.max(np.abs(m - target)))


def test_04_q_monodromy():
    start = time.perf_counter()
    e2 = [_q_monodromy_error(2, r) for r in (1e-2, 1e-3, 1e-4)]
    e3 = [_q_monodromy_error(3, r) for r in (1e-2, 1e-3, 1e-4)]
    elapsed = time.perf_counter() - start
    mono = all(a > b for a, b in zip(e2, e2[1:])) and all(a > b for a, b in zip(e3, e3[1:]))
    ok = e2[1] <= 2e-2 and e3[1] <= 5e-2 and mono and elapsed < 30
    assert report(
        4, "q-monodromy", ok,
        f"n=2 errors {', '.join(f'{x:.1e}' for x in e2)}; n=3 {', '.join(f'{x:.1e}' for x in e3)}; {elapsed:.1f} s",
    )


def _u_monodromy_log(n):
    loop = PlanePath.circle(0j, 1.0, 1, math.pi)
    m = monodromy(build_cpn_u_connection(n, 0.0), loop, 1e-12)
    unip = (-1) ** (n - 1) * m
    x = unip - np.eye(n)
    nilp = float(np.max(np.abs(np.linalg.matrix_power(x, n))))
    return _nilpotent_log(unip), nilp


def test_05_u_monodromy():
    k2 = kappa_matrix(2)
    log2, _ = _u_monodromy_log(2)
    # recorded once from the n = 2 run
    c = complex(np.vdot(k2, log2) / np.vdot(k2, k2))
    worst_c = 0.0
    worst_res = 0.0
    worst_nil = 0.0
    for n in (2, 3, 4):
        k = kappa_matrix(n)
        log_n, nilp = _u_monodromy_log(n)
        cn = complex(np.vdot(k, log_n) / np.vdot(k, k))
        worst_c = max(worst_c, abs(cn - c))
        worst_res = max(worst_res, float(np.max(np.abs(log_n - cn * k))))
        worst_nil = max(worst_nil, nilp)
    ok = worst_c <= 1e-6 and worst_res <= 1e-6 and worst_nil <= 1e-6
    assert report(
        5, "u-monodromy", ok,
        f"log = c K with c = {c.real:.6f}{c.imag:+.6f}i (2 pi i = {2 * math.pi:.6f}i), "
        f"spread {worst_c:.1e}, off-K part {worst_res:.1e}",
    )


def test_06_mayer_vietoris():
    rng = np.random.default_rng(6)
    kinds = ["generic"] * 75 + ["acyclic"] * 75
    kinds += ["rank_deficient", "repeated", "perturbed", "dependent_column"] * 12 + ["repeated", "dependent_column"]
    disagree = 0
    acyclic = 0
    for kind in kinds:
        rep = check_acyclicity(random_descent(rng, kind))
        disagree += rep.via_complex != rep.via_conditions
        acyclic += rep.acyclic
    ok = disagree == 0 and len(kinds) == 200
    assert report(
        6, "Mayer-Vietoris equivalence", ok,
        f"{disagree} disagreements on {len(kinds)} instances (50 adversarial, {acyclic} acyclic)",
    )


def test_07_biii_round_trip():
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        b = random_biii(rng, max_dim=4)
        conv = descent_to_biii(biii_to_descent(b), b.points)
        phi = conv.identification
        expect = phi @ b.total_matrix() @ np.linalg.inv(phi)
        worst = max(worst, float(np.max(np.abs(conv.biii.total_matrix() - expect))))
        # the identification respects the splitting U = ⊕ U_i
        off = b.offsets()
        mask = np.ones(phi.shape, dtype=bool)
        for i in range(b.n):
            mask[off[i]:off[i + 1], off[i]:off[i + 1]] = False
        worst = max(worst, float(np.max(np.abs(phi[mask]), initial=0.0)))
    assert report(7, "B(iii) round trip", worst <= 1e-10, f"max deviation {worst:.1e} on 100 instances")


def test_08_stokes_structure():
    rng = np.random.default_rng(8)
    bad_perm = 0
    bad_circle = 0
    rejected_valid = 0
    accepted_corrupt = 0
    corruptions = 0
    for _ in range(50):
        m = int(rng.integers(1, 6))
        e = tuple(rng.standard_normal(m) + 1j * rng.standard_normal(m))
        for cr in all_crossings(e):
            perm = cr.perm
            covered = list(range(len(perm)))
            for i, j in cr.blocks:
                covered[i - 1:j] = covered[i - 1:j][::-1]
            bad_perm += tuple(covered) != tuple(perm) or not cr.is_involution()
        bad_circle += tuple(circle_composite(e)) != tuple(range(m))
        mult = tuple(int(x) for x in rng.integers(1, 3, size=m))
        if sum(mult) > 6:
            mult = None
        f = generate_filtration(e, mult, rng)
        rejected_valid += not validate_filtration(f, e).valid
        if m == 1:
            continue
        for arc in range(len(stokes_directions(e).arcs)):
            step = int(rng.integers(1, m))
            corruptions += 1
            accepted_corrupt += validate_filtration(corrupt_filtration(f, e, arc, step, rng), e).valid
    ok = bad_perm == bad_circle == rejected_valid == accepted_corrupt == 0
    assert report(
        8, "Stokes crossing structure", ok,
        f"{bad_perm} bad permutations, {bad_circle} non-identity composites, "
        f"{rejected_valid}/50 valid rejected, {accepted_corrupt}/{corruptions} corruptions accepted",
    )


def _abelian_algebra(rng):
    par = [int(x) for x in rng.integers(0, 2, size=6)]
    par[0], par[1] = 0, 1
    d = random_chain_differential(par, 2, rng)
    return square_zero(par, d)


def test_09_bv_degeneration():
    rng = np.random.default_rng(9)
    notes = []
    # Delta = 0 family
    family = [truncated_polynomial(3), truncated_polynomial(5), square_zero([0, 1, 1]), _abelian_algebra(rng)]
    free = all(check_degeneration(a, 4).degenerate for a in family)
    notes.append(f"Delta=0 free {free}")
    # the even Grassmann example
    row = check_degeneration(grassmann_even_laplacian(), 2).rows[1]
    even_ok = (row.dim, row.expected, row.free) == (6, 8, False)
    notes.append(f"Grassmann N=2 {row.dim} vs {row.expected}")
    # F(a) linearizes the Maurer-Cartan equation
    lemma = 0.0
    algs = [grassmann_degenerate("large"), grassmann_degenerate("small"), builtin_algebras()["contraction3"]]
    for k in range(100):
        alg = algs[k % len(algs)]
        x = random_lifted_mc(alg, rng, u_degree=1 + k % 2)
        lemma = max(lemma, differential(alg, f_transform(alg, x)).max_abs())
    notes.append(f"(d+u Delta)F(a) {lemma:.1e}")
    # phi_T on abelian algebras
    ident = 0.0
    for _ in range(5):
        alg = _abelian_algebra(rng)
        s = build_splitting(alg)
        arc = random_mc_arc(alg, 4, rng)
        res = phi_t(alg, arc, s)
        ident = max(ident, float(np.max(np.abs(res.classes - arc.coeffs @ s.proj.T))))
    notes.append(f"abelian identity {ident:.1e}")
    # gauge invariance on degenerate algebras
    gauge = 0.0
    for kind in ("small", "large"):
        alg = grassmann_degenerate(kind)
        s = build_splitting(alg)
        odd = alg.parity == 1
        for _ in range(5):
            arc = random_mc_arc(alg, 2, rng)
            xi = np.zeros((2, alg.dim), dtype=complex)
            xi[:, odd] = rng.standard_normal((2, int(odd.sum()))) + 1j * rng.standard_normal((2, int(odd.sum())))
            moved = gauge_transform(alg, arc, FormalArc(xi, parity=1))
            a = phi_t(alg, arc, s).classes
            b = phi_t(alg, moved, s).classes
            gauge = max(gauge, float(np.max(np.abs(a - b))))
    notes.append(f"gauge {gauge:.1e}")
    axioms = all(check_bv_axioms(a).ok for a in algs)
    ok = free and even_ok and lemma <= 1e-10 and ident <= 1e-10 and gauge <= 1e-9 and axioms
    assert report(9, "BV degeneration", ok, "; ".join(notes))


def test_10_constants():
    series = log_gamma_taylor(10)
    lg = max(abs(series.evaluate(s) - cmath.log(lanczos_gamma(1 + s))) for s in (0.1, -0.1))
    const = abs(euler_gamma() - euler_gamma_richardson())
    const = max([const] + [abs(zeta(k) - zeta_direct(k)) for k in range(2, 9)])
    ok = lg <= 1e-8 and const <= 1e-11
    assert report(10, "constants", ok, f"log Gamma series {lg:.1e}, gamma/zeta {const:.1e}")


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_") and callable(fn):
            try:
                fn()
            except AssertionError:
                failed += 1
    sys.exit(1 if failed else 0)
