import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import erf

from app.levylib.basis import (
    TensorBasisOrdering,
    ThetaFunction,
    admissible_theta_indices,
    build_ortho_polys,
    composite_gauss_legendre,
    hermite_function,
    hermite_function_direct,
    hermite_function_integrals,
    hermite_functions,
    hermite_poly,
    kappa,
    kappa_inverse,
    tensor_basis_eval,
    theta_eval,
)
from app.levylib.exceptions import BasisRangeError
from app.levylib.levy_measure import LevyMeasure
from app.levylib.settings import HERMITE_MAX_ORDER


def test_two_point_polynomials(system):
    z = np.array([-1.0, 1.0, 0.5, 2.0])
    assert system.J_nu == 2
    np.testing.assert_allclose(system.p(1, z), z, atol=1e-12)
    np.testing.assert_allclose(system.p(2, z), z**2, atol=1e-12)
    np.testing.assert_allclose(system.nu_gram(), np.eye(2), atol=1e-10)


def test_polynomial_beyond_support_is_unavailable(system):
    with pytest.raises(BasisRangeError):
        system.p(3, 0.5)


@pytest.mark.parametrize('density, params', [
    ('uniform', {}),
    ('truncated_stable', {'index': 0.8}),
    ('tempered', {'rate': 1.0}),
])
def test_density_polynomials_are_orthonormal(density, params):
    measure = LevyMeasure.from_density(density, 0.5, 2.0, **params)
    system = build_ortho_polys(measure, 5)
    assert system.J_nu == 5
    np.testing.assert_allclose(system.nu_gram(), np.eye(5), atol=1e-10)


def test_p1_is_z_over_m2(asymmetric):
    system = build_ortho_polys(asymmetric)
    z = np.linspace(-2.0, 2.0, 9)
    np.testing.assert_allclose(system.p(1, z), z / asymmetric.m2)


def test_kappa_is_a_bijection():
    values = {kappa(i, j): (i, j) for i in range(1, 31) for j in range(1, 31)}
    assert len(values) == 900
    for (i, j) in values.values():
        assert kappa_inverse(kappa(i, j)) == (i, j)
    for k in range(1, 466):
        assert kappa(*kappa_inverse(k)) == k


def test_kappa_first_values():
    assert [kappa_inverse(k) for k in range(1, 7)] == [(1, 1), (2, 1), (1, 2), (3, 1), (2, 2), (1, 3)]


@given(st.integers(min_value=1, max_value=10**9))
def test_kappa_inverse_round_trip(k):
    assert kappa(*kappa_inverse(k)) == k


def test_kappa_rejects_nonpositive():
    with pytest.raises(ValueError):
        kappa(0, 1)
    with pytest.raises(ValueError):
        kappa_inverse(0)


@pytest.mark.parametrize('n', [1, 2, 5, 20, 60])
def test_recurrence_matches_direct_formula(n):
    x = np.linspace(-5.0, 5.0, 41)
    np.testing.assert_allclose(hermite_function(n, x), hermite_function_direct(n, x), atol=1e-10)


def test_hermite_functions_are_orthonormal():
    nodes, weights = composite_gauss_legendre(-14.0, 14.0)
    table = hermite_functions(25, nodes)
    np.testing.assert_allclose((table * weights) @ table.T, np.eye(25), atol=1e-10)


def test_high_order_hermite_stays_finite():
    values = hermite_functions(HERMITE_MAX_ORDER, np.linspace(-60.0, 60.0, 7))
    assert np.all(np.isfinite(values))
    assert np.max(np.abs(values)) < 1.0


def test_hermite_labels_and_limits():
    with pytest.raises(BasisRangeError):
        hermite_function(0, 0.0)
    with pytest.raises(BasisRangeError):
        hermite_functions(HERMITE_MAX_ORDER + 1, 0.0)
    with pytest.raises(BasisRangeError):
        hermite_function_direct(151, 0.0)


def test_first_hermite_integral():
    exact = math.pi**-0.25 * math.sqrt(math.pi / 2.0) * erf(1.0 / math.sqrt(2.0))
    assert hermite_function_integrals(3, 1.0)[0] == pytest.approx(exact, rel=1e-12)
    assert np.all(hermite_function_integrals(3, 0.0) == 0.0)


def test_odd_hermite_integrals_vanish_on_symmetric_intervals():
    values = hermite_function_integrals(8, 2.5, -2.5)
    np.testing.assert_allclose(values[1::2], 0.0, atol=1e-14)


def test_graded_order():
    assert TensorBasisOrdering(1, 4).labels == ((1,), (2,), (3,), (4,))
    assert TensorBasisOrdering(2, 6).labels == ((1, 1), (1, 2), (2, 1), (1, 3), (2, 2), (3, 1))
    assert TensorBasisOrdering.covering(2, 4).count == 6


def test_ordering_range():
    ordering = TensorBasisOrdering(2, 6)
    with pytest.raises(BasisRangeError):
        ordering.label(7)
    with pytest.raises(ValueError):
        TensorBasisOrdering(0, 3)


def test_tensor_basis_is_a_product():
    ordering = TensorBasisOrdering(2, 6)
    point = np.array([0.3, -1.2])
    expected = hermite_function(2, 0.3) * hermite_function(1, -1.2)
    assert ordering.evaluate(3, point) == pytest.approx(expected)
    all_values = ordering.evaluate_all(point[None, :])
    assert all_values[2, 0] == pytest.approx(expected)


def test_box_integrals_are_products():
    ordering = TensorBasisOrdering(2, 6)
    values = ordering.integrals([1.0, 0.5])
    first = hermite_function_integrals(3, 1.0)
    second = hermite_function_integrals(3, 0.5)
    assert values[4] == pytest.approx(first[1] * second[1])


def test_theta(system, ordering):
    x, z = np.array([0.2, -0.4]), np.array([1.0, -1.0])
    # kappa(2, 2) = 5
    np.testing.assert_allclose(theta_eval(system, ordering, 5, x, z), ordering.evaluate(2, x) * z**2)
    np.testing.assert_allclose(ThetaFunction(system, ordering, 5)(x[:, None], z), ordering.evaluate(2, x) * z**2)


def test_theta_needs_an_available_polynomial(system, ordering):
    with pytest.raises(BasisRangeError):
        theta_eval(system, ordering, 6, 0.0, 1.0)
    with pytest.raises(BasisRangeError):
        ThetaFunction(system, ordering, 6)


def test_admissible_theta_indices(system):
    assert admissible_theta_indices(system, 6) == [1, 2, 3, 4, 5, 7]


def test_hermite_polynomials():
    x = np.linspace(-3.0, 3.0, 13)
    np.testing.assert_allclose(hermite_poly(0, x), 1.0)
    np.testing.assert_allclose(hermite_poly(2, x), x**2 - 1.0)
    np.testing.assert_allclose(hermite_poly(3, x), x**3 - 3.0 * x, atol=1e-12)
    with pytest.raises(ValueError):
        hermite_poly(-1, x)


@pytest.mark.parametrize('n', [1, 2, 4, 7])
def test_hermite_function_from_polynomial(n):
    x = np.linspace(-4.0, 4.0, 17)
    expected = hermite_poly(n - 1, math.sqrt(2.0) * x) * np.exp(-x**2 / 2.0)
    expected /= math.pi**0.25 * math.sqrt(math.factorial(n - 1))
    np.testing.assert_allclose(hermite_function(n, x), expected, atol=1e-12)


def test_tensor_basis_eval(ordering):
    assert tensor_basis_eval(ordering, 4, 0.5) == pytest.approx(hermite_function(4, 0.5))
