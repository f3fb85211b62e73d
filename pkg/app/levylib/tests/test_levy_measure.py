import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from app.levylib.exceptions import InvalidMeasureError
from app.levylib.levy_measure import LevyMeasure, MomentTable
from app.levylib.sheet_sim import MarkInterval

nonzero = st.floats(min_value=-5.0, max_value=5.0).filter(lambda z: abs(z) > 1e-3)
atoms = st.lists(st.tuples(nonzero, st.floats(min_value=0.01, max_value=10.0)), min_size=1, max_size=6,
                 unique_by=lambda atom: atom[0])


def test_atom_at_zero_is_rejected():
    with pytest.raises(InvalidMeasureError, match='atom at z=0 forbidden'):
        LevyMeasure.from_atoms([[0.0, 1.0], [1.0, 1.0]])


@pytest.mark.parametrize('pairs', [
    [[1.0, -0.5]],
    [[1.0, 0.0]],
    [[1.0, np.inf]],
    [1.0, 2.0],
])
def test_bad_atoms_are_rejected(pairs):
    with pytest.raises(InvalidMeasureError):
        LevyMeasure.from_atoms(pairs)


@pytest.mark.parametrize('kwargs', [
    {'lower': 0.0, 'upper': 1.0},
    {'lower': 2.0, 'upper': 1.0},
    {'lower': 0.5, 'upper': np.inf},
    {'lower': 0.5, 'upper': 1.0, 'sides': 'left'},
    {'lower': 0.5, 'upper': 1.0, 'scale': 0.0},
])
def test_bad_density_supports_are_rejected(kwargs):
    with pytest.raises(InvalidMeasureError):
        LevyMeasure.from_density('uniform', **kwargs)


def test_unknown_density_name():
    with pytest.raises(InvalidMeasureError, match='unknown density'):
        LevyMeasure.from_density('gaussian', 0.5, 1.0)


def test_two_point_moments(two_point):
    assert two_point.moment(1) == 0.0
    assert two_point.second_moment == 1.0
    assert two_point.m2 == 1.0
    assert two_point.moment(3) == 0.0
    assert two_point.moment(4) == 1.0
    table = MomentTable.from_measure(two_point, 4)
    assert table[2] == table.M == 1.0


def test_moment_order_must_be_positive_integer(two_point):
    with pytest.raises(ValueError):
        two_point.moment(0)
    with pytest.raises(ValueError):
        two_point.moment(1.5)


def test_uniform_density_integrals(uniform_density):
    assert math.isclose(uniform_density.mass(), 3.0, rel_tol=1e-12)
    assert math.isclose(uniform_density.second_moment, 2.0 * (8.0 - 0.125) / 3.0, rel_tol=1e-12)
    assert abs(uniform_density.moment(1)) < 1e-12
    assert math.isclose(uniform_density.mass(1.0), 2.0, rel_tol=1e-12)
    assert uniform_density.mass(3.0) == 0.0


def test_truncated_stable_mass():
    measure = LevyMeasure.from_density('truncated_stable', 0.5, 2.0, sides='positive', index=1.5)
    exact = (0.5**-1.5 - 2.0**-1.5) / 1.5
    assert math.isclose(measure.mass(), exact, rel_tol=1e-10)
    assert np.all(measure.nodes > 0.0)


def test_tempered_rate_changes_mass():
    slow = LevyMeasure.from_density('tempered', 0.5, 2.0, rate=0.5)
    fast = LevyMeasure.from_density('tempered', 0.5, 2.0, rate=2.0)
    assert fast.mass() < slow.mass()


def test_psi_of_two_point_measure(two_point):
    u = np.array([0.5, 1.0, 2.0, 4.0])
    np.testing.assert_allclose(two_point.psi(u), np.cos(u) - 1.0, atol=1e-15)
    assert two_point.psi(0.0) == 0.0


def test_psi_second_derivative_is_minus_second_moment(asymmetric):
    h = 1e-4
    second = (asymmetric.psi(h) - 2.0 * asymmetric.psi(0.0) + asymmetric.psi(-h)) / h**2
    assert math.isclose(second.real, -asymmetric.second_moment, rel_tol=1e-6)


def test_small_jump_variance(asymmetric):
    assert asymmetric.small_jump_variance(1.0) == pytest.approx(0.5)
    assert asymmetric.small_jump_variance(0.1) == 0.0
    assert asymmetric.drift_rate(1.0) == pytest.approx(1.5)


def test_exponential_moment(two_point):
    assert two_point.exponential_moment(0.5, 1.0) == pytest.approx(math.e)
    assert two_point.check_exponential_moment(0.5, 3.0)
    with pytest.raises(ValueError):
        two_point.exponential_moment(0.0, 1.0)


def test_inner_products(asymmetric):
    one = lambda z: np.ones_like(z)
    assert asymmetric.nu_inner(one, one) == pytest.approx(asymmetric.mass())
    assert asymmetric.rho_inner(one, one) == pytest.approx(asymmetric.second_moment)


def test_interval_rule_on_atoms(asymmetric):
    nodes, weights = asymmetric.interval_rule(MarkInterval.positive())
    assert nodes.tolist() == [1.5]
    assert weights.tolist() == [1.0]
    nodes, _ = asymmetric.interval_rule(MarkInterval(-1.0, -0.5, include_high=False))
    assert nodes.size == 0


def test_interval_rule_on_density(uniform_density):
    nodes, weights = uniform_density.interval_rule(MarkInterval(-1.0, 1.0, include_low=False))
    assert weights.sum() == pytest.approx(1.0)
    nodes, weights = uniform_density.interval_rule(MarkInterval(1.0, 5.0))
    assert np.all(nodes >= 1.0)
    assert weights.sum() == pytest.approx(1.0)


def test_sample_marks_on_atoms(asymmetric, rng):
    marks = asymmetric.sample_marks(rng, 30_000)
    assert set(np.unique(marks)) == {-0.5, 1.5}
    # P(z = -0.5) = 2/3
    assert abs(np.mean(marks == -0.5) - 2.0 / 3.0) < 4.0 * math.sqrt(2.0 / 9.0 / 30_000)


def test_sample_marks_on_density(uniform_density, rng):
    marks = uniform_density.sample_marks(rng, 20_000, epsilon=1.0)
    assert np.all((np.abs(marks) >= 1.0) & (np.abs(marks) <= 2.0))
    assert np.mean(marks > 0) == pytest.approx(0.5, abs=0.02)
    assert np.mean(np.abs(marks)) == pytest.approx(1.5, abs=0.01)


@given(atoms)
@settings(max_examples=50, deadline=None)
def test_atom_measure_sums(pairs):
    measure = LevyMeasure.from_atoms(pairs)
    z = np.array([p[0] for p in pairs])
    w = np.array([p[1] for p in pairs])
    assert measure.mass() == pytest.approx(w.sum())
    assert measure.drift_rate() == pytest.approx(float(np.sum(w * z)))
    assert measure.second_moment == pytest.approx(float(np.sum(w * z**2)))
    assert measure.small_jump_variance(0.0) == 0.0
