import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from app.levylib.basis import TensorBasisOrdering, ThetaFunction, admissible_theta_indices
from app.levylib.chaos import (
    ChaosCoefficients,
    MultiIndex,
    SymmetricProduct,
    action,
    alpha_factorial,
    chaos_sample_vector,
    check_compatible,
    estimate_coefficient,
    generalized_expectation,
    hida_norm_k,
    hida_norm_neg_q,
    hida_partial_sums,
    iterated_integral,
    k_alpha_sample,
    multi_indices_up_to,
    orthogonality_check,
    sample_chaos,
    two_n_pow,
)
from app.levylib.exceptions import IncompatibleIndexError, UnsupportedOrderError
from app.levylib.sheet_sim import Domain, LevySheetPath, compensated_integral, compensator_rule

positions = st.lists(st.integers(min_value=1, max_value=40), max_size=6)


def _bump(points, marks):
    return np.exp(-points[:, 0] ** 2) * (marks + 0.3 * marks**2)


def _bump_squared(points, marks):
    return _bump(points, marks) ** 2


def _small_path(measure, rng, domain):
    count = int(rng.integers(0, 6))
    return LevySheetPath(measure, domain, 0.0, rng.uniform(domain.lower[0], domain.upper[0], (count, 1)),
                         rng.choice(measure.nodes, size=count), measure.drift_rate(), seed=None)


@given(positions)
def test_label_round_trip(ks):
    alpha = MultiIndex.from_positions(ks)
    assert MultiIndex.parse(str(alpha)) == alpha
    assert alpha.order == len(ks)
    assert sorted(ks) == alpha.positions


@given(positions, positions)
def test_addition_merges_positions(a, b):
    total = MultiIndex.from_positions(a) + MultiIndex.from_positions(b)
    assert total.positions == sorted(a + b)


def test_labels():
    alpha = MultiIndex.from_positions([4, 1, 1])
    assert str(alpha) == 'e1^2*e4'
    assert alpha.index == 4
    assert alpha_factorial(alpha) == 2
    assert str(MultiIndex.zero()) == '0'
    assert MultiIndex.zero().index == 0
    with pytest.raises(ValueError):
        MultiIndex(((2, 1), (1, 1)))
    with pytest.raises(ValueError):
        MultiIndex(((1, 0),))


def test_multi_indices_up_to():
    found = multi_indices_up_to([1, 2], 2)
    assert [str(a) for a in found] == ['0', 'e1', 'e2', 'e1^2', 'e1*e2', 'e2^2']
    assert len(multi_indices_up_to(range(1, 7), 2)) == 1 + 6 + 21


def test_compatibility(system):
    check_compatible(MultiIndex.unit(5), system)
    with pytest.raises(IncompatibleIndexError):
        check_compatible(MultiIndex.unit(6), system)
    with pytest.raises(IncompatibleIndexError):
        ChaosCoefficients({MultiIndex.unit(6): 1.0}, system)
    with pytest.raises(IncompatibleIndexError):
        check_compatible(MultiIndex.unit(4), system, TensorBasisOrdering(1, 2))


def test_coefficients_drop_zeros_and_sort():
    F = ChaosCoefficients({MultiIndex.unit(3): 1.0, MultiIndex.unit(1): 0.0, MultiIndex.zero(): 2.0})
    assert len(F) == 2
    assert [str(a) for a, _ in F.items()] == ['0', 'e3']
    assert F[MultiIndex.unit(1)] == 0.0
    assert generalized_expectation(F) == 2.0


def test_hida_norms():
    F = ChaosCoefficients({MultiIndex.unit(1): 1.0, MultiIndex.from_positions([2, 2]): 1.0})
    assert hida_norm_neg_q(F, 2) == pytest.approx(1.0 / 4.0 + 2.0 / 256.0)
    assert hida_norm_k(F, 1) == pytest.approx(2.0 + 2.0 * 16.0)
    assert hida_norm_neg_q(F, 0) == hida_norm_k(F, 0) == pytest.approx(3.0)
    with pytest.raises(ValueError):
        hida_norm_neg_q(F, -1)


def test_action_and_partial_sums():
    F = ChaosCoefficients({MultiIndex.unit(1): 2.0, MultiIndex.from_positions([3, 3]): 1.0})
    phi = ChaosCoefficients({MultiIndex.from_positions([3, 3]): 0.5, MultiIndex.unit(2): 7.0})
    assert action(F, phi) == pytest.approx(1.0)
    rows = hida_partial_sums(F, 1)
    assert [row.index for row in rows] == [1, 3]
    assert rows[-1].relative_tail == 0.0
    assert rows[0].partial_sum == pytest.approx(2.0)


def test_truncated(system):
    F = ChaosCoefficients({MultiIndex.unit(1): 1.0, MultiIndex.unit(5): 1.0}, system)
    assert list(F.truncated(3).terms) == [MultiIndex.unit(1)]
    assert F.allclose(ChaosCoefficients({MultiIndex.unit(5): 1.0, MultiIndex.unit(1): 1.0 + 1e-15}))


def test_pathwise_product_formula(two_point):
    domain = Domain((-2.0,), (2.0,))
    rng = np.random.default_rng(2718)
    norm = compensator_rule(domain, two_point).integrate(_bump_squared)
    for _ in range(100):
        path = _small_path(two_point, rng, domain)
        first = compensated_integral(path, _bump)
        second = iterated_integral(path, SymmetricProduct((_bump, _bump)), 2)
        diagonal = compensated_integral(path, _bump_squared)
        assert first**2 == pytest.approx(second + diagonal + norm, abs=1e-10)


@pytest.mark.parametrize('m', [2, 3])
def test_product_and_generic_integrals_agree(asymmetric, m):
    domain = Domain((0.0,), (1.0,))
    rng = np.random.default_rng(m)
    product = SymmetricProduct((_bump,) * m)

    def generic(*args):
        pairs = zip(args[0::2], args[1::2])
        return math.prod(_bump(np.asarray(x).reshape(-1, 1), z) for x, z in pairs)

    for _ in range(5):
        path = _small_path(asymmetric, rng, domain)
        assert iterated_integral(path, product, m) == pytest.approx(iterated_integral(path, generic, m), abs=1e-9)


def test_iterated_integral_limits(two_point, unit_domain):
    path = LevySheetPath(two_point, unit_domain, 0.0, np.empty((0, 1)), np.empty(0), 0.0, seed=None)
    with pytest.raises(UnsupportedOrderError):
        iterated_integral(path, SymmetricProduct((_bump,) * 4), 4)
    with pytest.raises(ValueError):
        iterated_integral(path, SymmetricProduct((_bump,) * 2), 3)


def test_k_alpha_matches_iterated_integral(system, ordering, two_point):
    domain = Domain((-3.0,), (3.0,))
    path = _small_path(two_point, np.random.default_rng(5), domain)
    alpha = MultiIndex.from_positions([1, 2])
    theta1, theta2 = ThetaFunction(system, ordering, 1), ThetaFunction(system, ordering, 2)
    expected = iterated_integral(path, SymmetricProduct((theta1, theta2)), 2)
    assert k_alpha_sample(path, alpha, system, ordering) == pytest.approx(expected, abs=1e-12)
    assert k_alpha_sample(path, MultiIndex.zero(), system, ordering) == 1.0
    vector = chaos_sample_vector(path, [MultiIndex.zero(), MultiIndex.unit(1), alpha], system, ordering)
    assert vector[2] == pytest.approx(expected, abs=1e-12)


def test_k_alpha_order_limit(system, ordering, two_point, unit_domain):
    path = _small_path(two_point, np.random.default_rng(1), unit_domain)
    with pytest.raises(UnsupportedOrderError):
        k_alpha_sample(path, MultiIndex.from_positions([1, 1, 1, 1]), system, ordering)


@pytest.mark.slow
def test_chaos_orthogonality(two_point, system):
    thetas = admissible_theta_indices(system, 6)
    ordering = TensorBasisOrdering(1, 4)
    alphas = multi_indices_up_to(thetas, 2)
    samples = sample_chaos(two_point, Domain((-6.0,), (6.0,)), alphas, system, ordering, 100_000, base_seed=31)
    # 28 x 28 simultaneous comparisons
    report = orthogonality_check(samples, alphas, n_se=4.0)
    assert report.within, np.max(report.deviation - 4.0 * report.se)
    np.testing.assert_allclose(np.diag(report.target), [alpha_factorial(a) for a in alphas])


@pytest.mark.slow
def test_coefficient_recovery(two_point, system):
    ordering = TensorBasisOrdering(1, 2)
    alphas = [MultiIndex.unit(1), MultiIndex.from_positions([2, 2])]
    samples = sample_chaos(two_point, Domain((-6.0,), (6.0,)), alphas, system, ordering, 20_000, base_seed=8)
    F = 0.5 + 1.5 * samples[:, 0] - 0.25 * samples[:, 1]
    first = estimate_coefficient(F, samples[:, 0], alphas[0])
    second = estimate_coefficient(F, samples[:, 1], alphas[1])
    assert abs(first.value - 1.5) <= 4.0 * first.se
    assert abs(second.value + 0.25) <= 4.0 * second.se


def test_two_n_pow():
    alpha = MultiIndex.from_positions([1, 3, 3])
    assert two_n_pow(alpha, 1) == pytest.approx(2.0 * 36.0)
    assert two_n_pow(alpha, -2) == pytest.approx((2.0 * 36.0) ** -2)
    assert two_n_pow(MultiIndex.zero(), 5) == 1.0


sparse_coefficients = st.dictionaries(
    st.lists(st.integers(min_value=1, max_value=12), max_size=4).map(MultiIndex.from_positions),
    st.floats(min_value=-10.0, max_value=10.0, allow_nan=False),
    max_size=6,
)


@given(sparse_coefficients, st.integers(min_value=0, max_value=4))
def test_hida_norms_are_monotone(terms, level):
    F = ChaosCoefficients(terms)
    assert hida_norm_neg_q(F, level + 1) <= hida_norm_neg_q(F, level) * (1.0 + 1e-12)
    assert hida_norm_k(F, level) <= hida_norm_k(F, level + 1) * (1.0 + 1e-12)


@pytest.mark.parametrize('m', [1, 2, 3])
def test_iterated_integral_of_empty_path_is_the_compensator(two_point, unit_domain, m):
    path = LevySheetPath(two_point, unit_domain, 0.0, np.empty((0, 1)), np.empty(0), 0.0, seed=None)
    mass = compensator_rule(unit_domain, two_point).integrate(_bump)
    expected = (-mass) ** m
    assert iterated_integral(path, SymmetricProduct((_bump,) * m), m) == pytest.approx(expected, rel=1e-12)
    if m < 3:
        def generic(*args):
            pairs = zip(args[0::2], args[1::2])
            return math.prod(_bump(np.asarray(x).reshape(-1, 1), z) for x, z in pairs)

        assert iterated_integral(path, generic, m) == pytest.approx(expected, rel=1e-9)
