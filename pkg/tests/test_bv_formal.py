import numpy as np
import pytest

from nchodge.bv_formal import (
    BVAlgebra,
    FormalArc,
    MixedSeries,
    algebra_from_json,
    algebra_to_json,
    build_splitting,
    builtin_algebras,
    check_bv_axioms,
    check_degeneration,
    differential,
    f_transform,
    grassmann_algebra,
    grassmann_contraction,
    grassmann_degenerate,
    grassmann_even_laplacian,
    maurer_cartan_residual,
    minimal_model_products_vanish,
    phi_t,
    random_chain_differential,
    random_lifted_mc,
    random_mc_arc,
    square_zero,
    truncated_polynomial,
)
from nchodge.bv_formal.generators import grassmann_basis, partial, theta
from nchodge.errors import DegenerationError, UsageError, WindowOverflowError


def basis_vec(alg, i):
    v = np.zeros(alg.dim, dtype=complex)
    v[i] = 1
    return v


def grassmann_index(k, monomial):
    return grassmann_basis(k).index(tuple(monomial))


def test_builtins_pass_axioms():
    for name, alg in builtin_algebras().items():
        rep = check_bv_axioms(alg)
        if name == "grassmann_even":
            failed = set(rep.failures())
            assert failed == {"operator_parity", "bracket_biderivation", "jacobi"}
        else:
            assert rep.ok, (name, rep.failures())


def test_even_laplacian_bracket():
    alg = grassmann_even_laplacian()
    t1, t2 = basis_vec(alg, grassmann_index(2, (0,))), basis_vec(alg, grassmann_index(2, (1,)))
    assert np.allclose(alg.bracket(t1, t2), -alg.one())


def test_first_order_delta_has_zero_bracket():
    alg = grassmann_algebra(2, None, partial(2, 0))
    assert check_bv_axioms(alg).ok
    assert np.max(np.abs(alg.bracket_tensor)) == 0
    assert alg.is_abelian()


def test_non_associative_perturbation_reported():
    alg = truncated_polynomial(5)
    m = alg.mult.copy()
    # x * x^2 = 1.5 x^3 keeps commutativity but (x x) x^2 != x (x x^2)
    m[1, 2, 3] = m[2, 1, 3] = 1.5
    bad = BVAlgebra(alg.parity, alg.unit, m, alg.d, alg.delta)
    rep = check_bv_axioms(bad)
    assert not rep.ok and not rep["associativity"].ok
    assert rep["unit"].ok and rep["supercommutativity"].ok


def test_degeneration_examples():
    for alg in (truncated_polynomial(4), square_zero([0, 1, 1])):
        rep = check_degeneration(alg, 4)
        assert rep.degenerate and [r.dim for r in rep.rows] == [n * alg.dim for n in range(1, 5)]
    rep = check_degeneration(grassmann_even_laplacian(), 3)
    assert rep.dim_h == 4
    assert (rep.rows[1].dim, rep.rows[1].expected, rep.rows[1].free) == (6, 8, False)
    assert rep.first_failure() == 2
    rep = check_degeneration(builtin_algebras()["grassmann_theta"], 2)
    assert rep.rows[0].free and (rep.rows[1].dim, rep.rows[1].expected) == (2, 4)
    for alg in builtin_algebras().values():
        assert check_degeneration(alg, 1).rows[0].free
    for kind in ("small", "large"):
        assert check_degeneration(grassmann_degenerate(kind), 5).degenerate
    with pytest.raises(UsageError):
        check_degeneration(truncated_polynomial(2), 0)


def test_maurer_cartan_examples():
    alg = grassmann_even_laplacian()
    a1 = basis_vec(alg, grassmann_index(2, (0, 1)))
    arc = FormalArc(np.stack([a1, np.zeros(alg.dim)]))
    # Delta(a1 a1) = 0 but Delta(a1) = -1, so [a1, a1] = -2 Delta(a1) a1 = 2 a1
    res = maurer_cartan_residual(alg, arc)
    assert np.array_equal(res[0], np.zeros(alg.dim))
    assert np.allclose(res[1], a1)
    abelian = square_zero([0, 1, 0])
    arc = FormalArc(np.array([[0, 1, 0, 2], [0, 0, 0, 1j]]))
    assert np.max(np.abs(maurer_cartan_residual(abelian, arc))) == 0
    alg = grassmann_contraction(3)
    a1 = basis_vec(alg, grassmann_index(3, (0, 1)))
    res = maurer_cartan_residual(alg, FormalArc(np.stack([a1, np.zeros(alg.dim)])))
    assert np.max(np.abs(res[0])) == 0 and np.max(np.abs(res[1])) > 0.5


def test_parity_violation_rejected():
    alg = grassmann_contraction(3)
    with pytest.raises(UsageError):
        maurer_cartan_residual(alg, FormalArc(np.array([basis_vec(alg, 1)])))


def test_f_transform_examples():
    alg = grassmann_contraction(3)
    a = np.zeros((3, 1, alg.dim), dtype=complex)
    a[1, 0, grassmann_index(3, (0, 1))] = 1
    x = MixedSeries(a, 0)
    fx = f_transform(alg, x)
    assert np.allclose(fx.window(0, 0).coeffs, a)
    assert fx.max_abs() == x.max_abs()

    poly = truncated_polynomial(3)
    a = np.zeros((3, 1, 3), dtype=complex)
    a[1, 0, 1] = 1
    fx = f_transform(poly, MixedSeries(a, 0))
    assert fx.u_min == -1
    assert np.allclose(fx.component(1, 0), [0, 1, 0])
    assert np.allclose(fx.component(2, -1), [0, 0, 0.5])
    assert np.allclose(fx.component(2, 0), 0)


def test_f_linearizes_lifted_maurer_cartan():
    rng = np.random.default_rng(4)
    for alg in (grassmann_degenerate("large"), grassmann_contraction(3), grassmann_contraction(4, 0, 2, 0, 1)):
        for _ in range(4):
            x = random_lifted_mc(alg, rng)
            assert differential(alg, f_transform(alg, x)).max_abs() <= 1e-10


def test_window_overflow():
    a = np.zeros((6, 1, 3), dtype=complex)
    a[1, 0, 1] = 1
    x = MixedSeries(a, -2)
    with pytest.raises(WindowOverflowError) as exc:
        f_transform(truncated_polynomial(3), x)
    assert exc.value.args


def test_splitting_examples():
    s = build_splitting(truncated_polynomial(3))
    assert np.allclose(s.incl @ s.proj, np.eye(3)) and np.max(np.abs(s.h)) == 0
    acyclic = grassmann_algebra(2, partial(2, 0))
    assert build_splitting(acyclic).dim_h == 0
    rng = np.random.default_rng(1)
    par = [1, 0, 1, 1, 0, 0, 1, 0]
    for r in (1, 2, 3):
        alg = square_zero(par, random_chain_differential(par, r, rng))
        s = build_splitting(alg)
        assert s.dim_h == alg.dim - 2 * r
        res = s.identity_residuals(alg)
        assert max(res.values()) <= 1e-10, res
    alg = grassmann_degenerate("large")
    s = build_splitting(alg)
    assert s.dim_h == 24 and max(s.identity_residuals(alg).values()) <= 1e-10


def test_phi_t_examples():
    poly = truncated_polynomial(3)
    r = phi_t(poly, FormalArc(np.array([[0, 1, 0], [0, 0, 0]])))
    assert np.allclose(r.classes, [[0, 1, 0], [0, 0, 0]]) and r.residual == 0
    # the eps^2 x^2 / (2u) term stays in the negative u-powers
    assert np.allclose(r.t_components[1][-1 - r.t_u_min], [0, 0, 0.5])
    rng = np.random.default_rng(6)
    alg = square_zero([0, 1, 0, 1])
    s = build_splitting(alg)
    arc = random_mc_arc(alg, 3, rng)
    res = phi_t(alg, arc, s)
    assert np.allclose(res.classes, arc.coeffs @ s.proj.T, atol=1e-12)


def test_phi_t_degenerate_grassmann_is_linear():
    alg = grassmann_algebra(3)
    s = build_splitting(alg)
    rng = np.random.default_rng(2)
    arc = random_mc_arc(alg, 3, rng)
    assert np.allclose(phi_t(alg, arc, s).classes, arc.coeffs @ s.proj.T, atol=1e-12)


def test_phi_t_errors():
    poly = truncated_polynomial(3)
    with pytest.raises(UsageError):
        phi_t(poly, FormalArc(np.array([[0, 1, 0]])), order=2)
    alg = grassmann_contraction(3)
    a1 = basis_vec(alg, grassmann_index(3, (0, 1)))
    with pytest.raises((UsageError, DegenerationError)):
        phi_t(alg, FormalArc(np.stack([a1, np.zeros(alg.dim)])))
    even = grassmann_even_laplacian()
    with pytest.raises(DegenerationError):
        phi_t(even, FormalArc(np.array([basis_vec(even, 3)])))
    with pytest.raises(UsageError):
        FormalArc(np.zeros((7, 3)))


def test_minimal_model():
    assert minimal_model_products_vanish(square_zero([0, 1, 1])).vanish()
    for kind in ("small", "large"):
        rep = minimal_model_products_vanish(grassmann_degenerate(kind))
        assert rep.vanish(1e-12)
    rep = minimal_model_products_vanish(grassmann_contraction(3), order=2)
    assert rep.m3 is None and rep.m2 > 0.5
    with pytest.raises(UsageError):
        minimal_model_products_vanish(truncated_polynomial(2), order=4)


def test_delta_from_operators():
    k = 4
    delta = theta(k, 2) @ partial(k, 0) @ partial(k, 1)
    assert np.allclose(grassmann_contraction(4).delta, delta)
    with pytest.raises(UsageError):
        grassmann_contraction(3, c=0)


def test_json_round_trip():
    for alg in builtin_algebras().values():
        back = algebra_from_json(algebra_to_json(alg))
        assert np.array_equal(back.parity, alg.parity) and back.unit == alg.unit
        assert np.array_equal(back.mult, alg.mult)
        assert np.array_equal(back.d, alg.d) and np.array_equal(back.delta, alg.delta)
        assert algebra_to_json(back) == algebra_to_json(alg)
