import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from nchodge.algebra_core import TruncatedSeries, euler_gamma, series_mul, zeta
from nchodge.char_class import d_operator, gamma_hat_cpn, gamma_hat_from_roots, lattice_map, multiplication_matrix
from nchodge.errors import UsageError
from oracles import gamma_power_taylor

G = euler_gamma()


def h(n, k=1, c=1.0):
    return TruncatedSeries.monomial("h", n, k, c)


def test_empty_product_is_one():
    assert gamma_hat_from_roots([], 3).allclose(TruncatedSeries.one("h", 3), 0)


def test_cp1():
    g = gamma_hat_from_roots([h(2), h(2)], 2)
    assert g.coeffs[0] == 1
    assert g.coeffs[1].real == pytest.approx(-1.1544313298, abs=1e-10)
    assert g.coeffs[1].real == pytest.approx(-2 * G, abs=1e-14)


def test_cp2():
    g = gamma_hat_from_roots([h(3)] * 3, 3)
    assert g.coeffs[1].real == pytest.approx(-1.7316469947, abs=1e-10)
    # (3 gamma)^2 / 2 + 3 zeta(2) / 2
    assert g.coeffs[2].real == pytest.approx(3.9667017574, abs=1e-10)
    assert g.coeffs[2].real == pytest.approx((3 * G) ** 2 / 2 + 3 * zeta(2) / 2, abs=1e-13)


def test_gamma_hat_cpn():
    assert gamma_hat_cpn(1).allclose(TruncatedSeries.one("h", 1), 0)
    assert gamma_hat_cpn(2).coeffs[1].real == pytest.approx(-2 * G, abs=1e-14)
    assert np.max(np.abs(gamma_hat_cpn(4).coeffs - gamma_power_taylor(4, 4))) <= 1e-12
    with pytest.raises(UsageError):
        gamma_hat_cpn(0)


def test_non_nilpotent_root_rejected():
    with pytest.raises(UsageError):
        gamma_hat_from_roots([TruncatedSeries("h", [1, 1])], 2)


roots = st.lists(
    st.tuples(st.floats(-2, 2, allow_nan=False), st.floats(-2, 2, allow_nan=False)), min_size=0, max_size=3
)


@given(roots, roots)
def test_multiplicative(r1, r2):
    n = 4

    def mk(rs):
        return [TruncatedSeries("h", [0, a, b, 0]) for a, b in rs]

    lhs = gamma_hat_from_roots(mk(r1) + mk(r2), n)
    rhs = series_mul(gamma_hat_from_roots(mk(r1), n), gamma_hat_from_roots(mk(r2), n))
    assert np.max(np.abs(lhs.coeffs - rhs.coeffs)) <= 1e-11
    assert lhs.coeffs[0] == 1


def test_d_operator():
    assert np.array_equal(d_operator(1), [[1]])
    assert np.allclose(d_operator(2), np.diag([1, 2j * math.pi]))
    assert d_operator(2)[1, 1].imag == pytest.approx(6.2831853072, abs=1e-10)
    assert np.allclose(d_operator(3), np.diag([1, 2j * math.pi, -4 * math.pi**2]))


def test_lattice_map_examples():
    assert np.array_equal(lattice_map(1).matrix, [[1]])
    assert np.allclose(lattice_map(2).matrix, [[1, 0], [-2 * G, 2j * math.pi]], atol=1e-14)
    for n in range(1, 13):
        lm = lattice_map(n)
        assert np.allclose(lm.matrix, np.tril(lm.matrix))
        assert abs(lm.determinant() - (2j * math.pi) ** (n * (n - 1) // 2)) <= 1e-9 * abs(lm.determinant())
        assert abs(np.linalg.det(lm.matrix)) > 0


def test_lattice_map_is_cup_after_scaling():
    n = 4
    v = np.array([1.0, 2.0, -1.0, 0.5])
    cup = series_mul(gamma_hat_cpn(n), TruncatedSeries("h", d_operator(n) @ v)).coeffs
    assert np.allclose(lattice_map(n)(v), cup)
    assert np.allclose(multiplication_matrix(gamma_hat_cpn(n)) @ d_operator(n), lattice_map(n).matrix)
