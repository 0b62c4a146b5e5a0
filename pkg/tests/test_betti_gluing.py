import numpy as np
import pytest

from nchodge.betti_gluing import (
    BiiiData,
    DescentData,
    biii_from_json,
    biii_to_descent,
    biii_to_json,
    check_acyclicity,
    check_quiver_rep,
    descent_from_json,
    descent_to_biii,
    descent_to_json,
    glue,
    mayer_vietoris_matrix,
    quiver_data,
    quiver_relations,
)
from nchodge.errors import NotConvertibleError, UsageError
from nchodge.stokes import skeleton_from_connection
from nchodge.quantum_connection import build_cpn_u_connection
from oracles import random_biii, random_descent


def scalar_biii(t):
    t = np.asarray(t, dtype=complex)
    n = t.shape[0]
    grid = tuple(tuple(t[i:i + 1, j:j + 1] for j in range(n)) for i in range(n))
    return BiiiData(tuple(complex(k) for k in range(n)), (1,) * n, grid)


def test_descent_single_point():
    t = np.array([[2, 1], [0, 1j]])
    d = biii_to_descent(BiiiData((0j,), (2,), ((t,),)))
    assert d.dim_u == 2 and d.psi[0].shape == (2, 0)
    assert np.array_equal(d.monodromies[0], t)


def test_descent_two_points():
    t11, t12, t21, t22 = 2.0, 3.0 - 1j, 0.5j, -4.0
    d = biii_to_descent(scalar_biii([[t11, t12], [t21, t22]]))
    assert np.array_equal(d.monodromies[0], [[t11, 0], [t21, 1]])
    assert np.array_equal(d.monodromies[1], [[1, t12], [0, t22]])
    assert np.array_equal(d.psi[0], [[0], [1]])
    assert np.array_equal(d.psi[1], [[1], [0]])


def test_block_form_properties():
    rng = np.random.default_rng(21)
    for _ in range(30):
        b = random_biii(rng, n=3, max_dim=3)
        d = biii_to_descent(b)
        for i in range(b.n):
            ti = d.monodromies[i]
            assert np.array_equal((ti - np.eye(d.dim_u)) @ d.psi[i], np.zeros_like(d.psi[i]))
            det_ii = np.linalg.det(b.maps[i][i])
            assert abs(np.linalg.det(ti) - det_ii) <= 1e-10 * max(1, abs(det_ii))


def test_invertibility_follows_diagonal_block():
    t = np.array([[0.0, 1.0], [1.0, 2.0]])
    with pytest.raises(UsageError):
        scalar_biii(t)
    b = BiiiData((0j, 1j), (1, 1), ((t[:1, :1], t[:1, 1:]), (t[1:, :1], t[1:, 1:])), check=False)
    # T_1 = [[0, 0], [1, 1]] is singular because T_11 is
    with pytest.raises(UsageError):
        biii_to_descent(b)


def test_acyclicity_examples():
    triv = DescentData(1, (np.zeros((1, 0)),), (np.eye(1),))
    rep = check_acyclicity(triv)
    assert rep.acyclic and rep.via_complex and rep.via_conditions
    lines = DescentData(2, (np.array([[1.0], [0.0]]), np.array([[1.0], [1.0]])), (np.eye(2), np.eye(2)))
    assert check_acyclicity(lines).acyclic
    same = DescentData(2, (np.array([[1.0], [0.0]]), np.array([[2.0], [0.0]])), (np.eye(2), np.eye(2)))
    rep = check_acyclicity(same)
    assert not rep.acyclic and not rep.via_complex and rep.injective and not rep.quotient_iso


def test_condition_b_violation_not_convertible():
    d = DescentData(1, (np.zeros((1, 0)), np.zeros((1, 0))), (np.eye(1), np.eye(1)))
    assert not check_acyclicity(d).acyclic
    with pytest.raises(NotConvertibleError):
        descent_to_biii(d)


def test_mayer_vietoris_sign_convention():
    d = DescentData(1, (np.zeros((1, 0)),), (np.eye(1),))
    assert np.array_equal(mayer_vietoris_matrix(d), [[-1]])


def test_complex_and_conditions_agree_on_adversarial_families():
    rng = np.random.default_rng(5)
    kinds = ["generic", "acyclic", "rank_deficient", "repeated", "perturbed", "dependent_column"]
    for k in range(120):
        rep = check_acyclicity(random_descent(rng, kinds[k % len(kinds)]))
        assert rep.via_complex == rep.via_conditions


def test_round_trip_single_point():
    t = np.array([[1, 2], [3, 4.0]])
    conv = descent_to_biii(DescentData(2, (np.zeros((2, 0)),), (t,)))
    assert conv.biii.n == 1 and conv.biii.dims == (2,)
    phi = conv.identification
    assert np.allclose(conv.biii.maps[0][0], phi @ t @ np.linalg.inv(phi))


def test_round_trip_recovers_gluing_data():
    rng = np.random.default_rng(9)
    for _ in range(40):
        b = random_biii(rng, max_dim=3)
        conv = descent_to_biii(biii_to_descent(b), b.points)
        phi = conv.identification
        assert conv.biii.dims == b.dims
        mask = np.ones_like(phi, dtype=bool)
        off = b.offsets()
        for i in range(b.n):
            mask[off[i]:off[i + 1], off[i]:off[i + 1]] = False
        assert np.max(np.abs(phi[mask]), initial=0) <= 1e-12
        got = conv.biii.total_matrix()
        want = phi @ b.total_matrix() @ np.linalg.inv(phi)
        assert np.max(np.abs(got - want)) <= 1e-10


def test_quiver_examples():
    rng = np.random.default_rng(2)
    for _ in range(10):
        assert check_quiver_rep(random_biii(rng, n=3, max_dim=3))
    b = scalar_biii([[2.0, 1.0], [1.0, 3.0]])
    grid = [list(r) for r in b.maps]
    grid[0][0] = np.zeros((1, 1))
    bad = BiiiData(b.points, b.dims, tuple(tuple(r) for r in grid), check=False)
    assert not check_quiver_rep(bad)


def test_quiver_checker_catches_bad_projectors():
    b = random_biii(np.random.default_rng(4), n=3)
    t, ps, rs = quiver_data(b)
    assert max(quiver_relations(t, ps, rs).values()) <= 1e-10
    ps = list(ps)
    ps[0] = ps[0] * (1 + 1e-3)
    res = quiver_relations(t, ps, rs)
    assert res["orthogonal_idempotents"] > 1e-4 and res["partition"] > 1e-4


def test_glue_examples():
    g = glue([(2, np.diag([1, 2]))], {}, [0])
    assert g.to_biii().n == 1
    g = glue([(1, [[2]]), (1, [[3]])], {}, [0, 1])
    assert np.array_equal(g.local_system(), np.diag([2, 3]))
    e, mult = skeleton_from_connection(build_cpn_u_connection(2, 1))
    g = glue([(m, [[1.0]]) for m in mult], {(0, 1): [[2.0]], (1, 0): [[-1.0]]}, e.exponents)
    b = g.to_biii()
    assert check_quiver_rep(b)
    assert np.array_equal(b.total_matrix(), [[1, 2], [-1, 1]])


def test_glue_rejects_bad_input():
    with pytest.raises(UsageError):
        glue([(1, [[0.0]])], {}, [0])
    with pytest.raises(UsageError):
        glue([(1, [[1.0]]), (1, [[1.0]])], {}, [0, 0])
    with pytest.raises(UsageError):
        glue([(1, [[1.0]]), (1, [[1.0]])], {(0, 0): [[1.0]]}, [0, 1])


def test_permuted_relabels_blocks():
    b = random_biii(np.random.default_rng(8), n=3)
    p = b.permuted((2, 0, 1))
    assert p.points == (b.points[2], b.points[0], b.points[1])
    assert np.array_equal(p.maps[0][1], b.maps[2][0])
    with pytest.raises(UsageError):
        b.permuted((0, 0, 1))


def test_descent_invariant_enforced():
    psi = np.array([[1.0], [0.0]])
    with pytest.raises(UsageError):
        DescentData(2, (psi,), (np.array([[2.0, 0], [0, 1]]),))


def test_json_round_trips():
    rng = np.random.default_rng(13)
    b = random_biii(rng, n=3)
    b2 = biii_from_json(biii_to_json(b))
    assert b2.points == b.points and b2.dims == b.dims
    assert np.array_equal(b2.total_matrix(), b.total_matrix())
    d = biii_to_descent(b)
    d2 = descent_from_json(descent_to_json(d))
    assert descent_to_json(d2) == descent_to_json(d)
