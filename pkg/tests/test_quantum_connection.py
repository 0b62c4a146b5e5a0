import cmath

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nchodge.errors import DomainError, UsageError
from nchodge.quantum_connection import (
    GradingOperator,
    MeromorphicConnection,
    ShiftMatrix,
    build_cpn_q_connection,
    build_cpn_u_connection,
    check_commutation,
    connection_from_json,
    connection_to_json,
    exponent_eigenvalues,
    flatness_residual,
    kappa_matrix,
    shift_matrix,
)

OMEGA = cmath.exp(2j * cmath.pi / 3)


def test_cp1_u_connection():
    c = build_cpn_u_connection(2, 1.0)
    assert np.array_equal(c.terms[-2], [[0, 2], [2, 0]])
    assert np.array_equal(c.terms[-1], np.diag([-0.5, 0.5]))


def test_cp2_u_connection():
    q0 = 0.3 - 0.2j
    c = build_cpn_u_connection(3, q0)
    assert np.allclose(c.terms[-2], [[0, 0, 3 * q0], [3, 0, 0], [0, 3, 0]], atol=0)
    assert np.array_equal(c.terms[-1], np.diag([-1.0, 0, 1]))


def test_classical_limit():
    assert np.array_equal(build_cpn_u_connection(2, 0).terms[-2], [[0, 0], [2, 0]])
    with pytest.raises(UsageError):
        build_cpn_u_connection(1)


def test_q_connection_examples():
    a = build_cpn_q_connection(2, -1.0)
    assert np.allclose(a(1.0), [[0, 1], [1, 0]])
    assert np.allclose(a(4.0), [[0, 1], [0.25, 0]])
    for n in (2, 3, 5):
        q = 0.7 + 0.1j
        assert np.allclose(build_cpn_q_connection(n, -2.0)(q), build_cpn_q_connection(n, -1.0)(q) / 2)
    with pytest.raises(DomainError):
        a(0)
    with pytest.raises(DomainError):
        build_cpn_q_connection(2, 0)


def _same_set(a, b, tol=1e-10):
    return len(a) == len(b) and all(min(abs(x - y) for y in b) <= tol for x in a)


def test_exponents():
    assert _same_set(exponent_eigenvalues(build_cpn_u_connection(2, 1)), [-2, 2])
    assert _same_set(exponent_eigenvalues(build_cpn_u_connection(3, 1)), [3, 3 * OMEGA, 3 * OMEGA**2])
    assert exponent_eigenvalues(build_cpn_u_connection(2, 0)) == [0j]
    with pytest.raises(UsageError):
        exponent_eigenvalues(MeromorphicConnection(2, {-1: np.eye(2)}))


def test_exponents_sorted():
    ev = exponent_eigenvalues(build_cpn_u_connection(5, 1))
    # real parts that agree up to rounding noise are ordered by imaginary part
    for a, b in zip(ev, ev[1:]):
        assert a.real < b.real - 1e-9 or (abs(a.real - b.real) <= 1e-9 and a.imag < b.imag)


@given(st.integers(2, 8), st.floats(0.1, 3), st.floats(-3, 3))
def test_shift_and_eigenvalue_laws(n, r, theta):
    q = r * cmath.exp(1j * theta)
    s = ShiftMatrix(n, q).matrix
    assert np.allclose(np.linalg.matrix_power(s, n), q * np.eye(n), atol=1e-10 * max(1, abs(q)))
    c = build_cpn_u_connection(n, q)
    assert np.array_equal(c.terms[-2], n * shift_matrix(n, q))
    root = abs(q) ** (1 / n) * cmath.exp(1j * cmath.phase(q) / n)
    expected = [n * root * cmath.exp(2j * cmath.pi * j / n) for j in range(n)]
    assert _same_set(exponent_eigenvalues(c), expected, 1e-10 * n)


def test_commutation():
    for n in (2, 5):
        c = build_cpn_u_connection(n, 0)
        assert check_commutation(c, GradingOperator.cpn(n))
        assert not check_commutation(c, np.eye(n))
    assert np.array_equal(kappa_matrix(3), build_cpn_u_connection(3, 0).terms[-2])


def test_flatness():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(2, 7))
        u = complex(rng.normal(), rng.normal())
        q = complex(rng.normal(), rng.normal())
        assert flatness_residual(n, u, q) < 1e-12


def test_flatness_against_finite_differences():
    n, u, q = 3, -1.3 + 0.2j, 0.4 - 0.5j
    e = 1e-6
    a_u = build_cpn_u_connection
    a_q = build_cpn_q_connection
    dq_au = (a_u(n, q + e)(u) - a_u(n, q - e)(u)) / (2 * e)
    du_aq = (a_q(n, u + e)(q) - a_q(n, u - e)(q)) / (2 * e)
    au, aq = a_u(n, q)(u), a_q(n, u)(q)
    assert np.max(np.abs(du_aq - dq_au + au @ aq - aq @ au)) < 1e-8


def test_grading_invariant():
    with pytest.raises(UsageError):
        GradingOperator(2, (0.0, 0.5))


def test_json_round_trip():
    c = build_cpn_u_connection(3, 0.5 + 1j)
    back = connection_from_json(connection_to_json(c))
    assert back.rank == 3
    for k in c.terms:
        assert np.array_equal(back.terms[k], c.terms[k])
    assert back.meta["n"] == 3
    assert connection_to_json(back) == connection_to_json(c)
