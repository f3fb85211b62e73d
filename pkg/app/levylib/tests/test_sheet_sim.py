import math

import numpy as np
import pytest

from app.levylib.exceptions import DomainError
from app.levylib.sheet_sim import (
    Box,
    Domain,
    LevySheetPath,
    MarkInterval,
    box_increment,
    compensated_integral,
    compensator_rule,
    empirical_cf_check,
    jump_count,
    pairing_variance_check,
    sheet_value,
    simulate_brownian_sheet,
    simulate_levy_ito_sheet,
    simulate_levy_sheet,
    uniform_grid,
)


def _constant(points):
    return np.ones(len(points))


def _linear(points):
    return points[:, 0]


def _sine(points):
    return np.sin(2.0 * np.pi * points[:, 0])


def test_box_is_half_open():
    box = Box((0.0, 0.0), (1.0, 2.0))
    inside = box.contains([[0.0, 1.0], [1.0, 2.0], [0.5, 0.5], [1.0, 2.1]])
    assert inside.tolist() == [False, True, True, False]
    assert box.volume == 2.0
    assert box.n == 2


def test_box_corners_alternate():
    corners = dict(Box((0.0, 0.0), (1.0, 2.0)).corners())
    assert corners == {(0.0, 0.0): 1, (0.0, 2.0): -1, (1.0, 0.0): -1, (1.0, 2.0): 1}


def test_box_split_and_inside():
    left, right = Box((0.0,), (2.0,)).split(0, 0.5)
    assert (left.upper, right.lower) == ((0.5,), (0.5,))
    assert left.inside(Box((0.0,), (2.0,)))
    with pytest.raises(DomainError):
        Box((1.0,), (0.0,))


def test_domain_needs_positive_extents():
    with pytest.raises(DomainError):
        Domain((0.0, 0.0), (1.0, 0.0))
    assert Domain.from_extents([2.0, 3.0]).extents == (2.0, 3.0)


def test_mark_interval_zero():
    assert MarkInterval(-1.0, 1.0).contains_zero
    assert MarkInterval(0.0, 1.0).contains_zero
    assert not MarkInterval(0.0, 1.0, include_low=False).contains_zero
    assert not MarkInterval.positive().contains_zero
    assert all(not interval.contains_zero for interval in MarkInterval.outside(0.5))


def test_simulation_is_reproducible(two_point, unit_domain):
    first = simulate_levy_sheet(two_point, unit_domain, seed=(3, 4))
    second = simulate_levy_sheet(two_point, unit_domain, seed=(3, 4))
    np.testing.assert_array_equal(first.locations, second.locations)
    np.testing.assert_array_equal(first.marks, second.marks)


def test_jumps_lie_in_domain(asymmetric):
    domain = Domain((-1.0, 0.0), (1.0, 2.0))
    path = simulate_levy_sheet(asymmetric, domain, seed=1)
    assert path.n_jumps > 0
    assert np.all(domain.covers(path.locations))
    assert set(np.unique(path.marks)) <= {-0.5, 1.5}
    assert path.drift_rate == pytest.approx(asymmetric.moment(1))


def test_mean_jump_count(asymmetric, unit_domain):
    counts = [simulate_levy_sheet(asymmetric, unit_domain, seed=(0, i)).n_jumps for i in range(4000)]
    # Poisson with mean ν(ℝ) = 3
    assert abs(np.mean(counts) - 3.0) <= 3.0 * math.sqrt(3.0 / 4000)


def test_epsilon_truncation(asymmetric, unit_domain):
    path = simulate_levy_sheet(asymmetric, unit_domain, epsilon=1.0, seed=2)
    assert np.all(np.abs(path.marks) >= 1.0)
    assert path.omitted_variance == pytest.approx(0.5)
    with pytest.raises(ValueError):
        simulate_levy_sheet(asymmetric, unit_domain, epsilon=-1.0)


def test_value_vanishes_on_axes(asymmetric):
    path = simulate_levy_sheet(asymmetric, Domain((0.0, 0.0), (1.0, 1.0)), seed=9)
    assert path.value([0.0, 0.7]) == 0.0
    assert path.value([0.4, 0.0]) == 0.0


def test_value_outside_domain(two_point, unit_domain):
    path = simulate_levy_sheet(two_point, unit_domain, seed=1)
    with pytest.raises(DomainError):
        path.value(1.5)
    with pytest.raises(DomainError):
        path.increment(Box((0.5,), (1.5,)))


def test_hand_built_path(two_point, unit_domain):
    path = LevySheetPath(two_point, unit_domain, 0.0, np.array([[0.2], [0.6]]), np.array([1.0, -1.0]),
                         drift_rate=0.0, seed=None)
    assert path.value(0.1) == 0.0
    assert path.value(0.2) == 1.0
    assert path.value(1.0) == 0.0
    assert path.increment(Box((0.2,), (0.6,))) == -1.0
    assert sheet_value(path, 0.6) == 0.0
    assert sheet_value(path, 0.4) == 1.0


@pytest.mark.parametrize('seed', range(5))
def test_corner_sum_matches_direct_increment(asymmetric, seed):
    domain = Domain((-1.0, -1.0), (1.0, 1.0))
    path = simulate_levy_sheet(asymmetric, domain, seed=seed)
    rng = np.random.default_rng(seed)
    for _ in range(10):
        a, b = np.sort(rng.uniform(-1.0, 1.0, (2, 2)), axis=0)
        box = Box(tuple(a), tuple(b))
        assert box_increment(path, box) == pytest.approx(path.increment(box), abs=1e-12)


def test_jump_count(asymmetric, unit_domain):
    path = simulate_levy_sheet(asymmetric, unit_domain, seed=4)
    box = Box((0.0,), (1.0,))
    positive = jump_count(path, box, MarkInterval.positive())
    negative = jump_count(path, box, MarkInterval.negative())
    assert positive + negative == path.n_jumps
    assert positive == int(np.count_nonzero(path.marks > 0))
    assert jump_count(path, box, [(1.0, 2.0), (-1.0, -0.1)]) == path.n_jumps
    with pytest.raises(DomainError):
        jump_count(path, box, MarkInterval(-1.0, 1.0))


def test_compensated_indicator_is_the_increment(asymmetric):
    domain = Domain((0.0, 0.0), (2.0, 1.0))
    path = simulate_levy_sheet(asymmetric, domain, seed=12)
    box = Box((0.5, 0.0), (1.5, 0.5))

    def indicator_mark(points, marks):
        return box.contains(points).astype(float) * marks

    value = compensated_integral(path, indicator_mark, support=box)
    assert value == pytest.approx(path.increment(box), abs=1e-12)


def test_compensator_rule_integrates_polynomials(uniform_density):
    rule = compensator_rule(Box((0.0,), (2.0,)), uniform_density)
    assert rule.integrate(lambda x, z: x[:, 0] * z**2) == pytest.approx(2.0 * uniform_density.second_moment)


def test_brownian_cell_variances():
    domain = Domain((0.0, 0.0), (1.0, 2.0))
    path = simulate_brownian_sheet(domain, (50, 40), seed=3)
    volume = (1.0 / 50) * (2.0 / 40)
    assert path.increments.shape == (50, 40)
    normalized = path.increments.ravel() / math.sqrt(volume)
    assert abs(np.mean(normalized**2) - 1.0) < 4.0 * math.sqrt(2.0 / normalized.size)
    assert np.all(path.values[0] == 0.0) and np.all(path.values[:, 0] == 0.0)
    assert path.value([1.0, 2.0]) == pytest.approx(path.increments.sum())


def test_brownian_grid_checks(unit_domain):
    path = simulate_brownian_sheet(unit_domain, 4, seed=1)
    with pytest.raises(DomainError):
        path.value(0.3)
    with pytest.raises(DomainError):
        simulate_brownian_sheet(unit_domain, (np.array([0.0, 0.5]),), seed=1)


def test_levy_ito_sheet(asymmetric, unit_domain):
    grid = uniform_grid(unit_domain, 8)
    path = simulate_levy_ito_sheet(asymmetric, unit_domain, grid, seed=6, drift=0.5, brownian_scale=2.0)
    x = 0.75
    expected = 0.5 * x + 2.0 * path.brownian.value(x) + path.jumps.value(x)
    assert path.value(x) == pytest.approx(expected)


@pytest.mark.slow
def test_characteristic_function(two_point, unit_domain):
    report = empirical_cf_check(two_point, unit_domain, Box((0.0,), (1.0,)), [0.5, 1.0, 2.0, 4.0], 100_000,
                                base_seed=2024)
    np.testing.assert_allclose(report.target, np.exp(np.cos(report.u) - 1.0))
    assert report.within, report.deviation / report.envelope


@pytest.mark.slow
@pytest.mark.parametrize('phi, integral', [(_constant, 1.0), (_linear, 1.0 / 3.0), (_sine, 0.5)])
def test_pairing_statistics(two_point, unit_domain, phi, integral):
    report = pairing_variance_check(two_point, unit_domain, phi, 100_000, base_seed=77)
    assert report.target_variance == pytest.approx(integral, rel=1e-4)
    assert report.mean_ok
    assert report.variance_ok


@pytest.mark.parametrize('seed', range(5))
def test_increment_is_additive_over_a_partition(asymmetric, seed):
    domain = Domain((-1.0, -1.0), (1.0, 1.0))
    path = simulate_levy_sheet(asymmetric, domain, seed=seed)
    rng = np.random.default_rng(100 + seed)
    a, b = np.sort(rng.uniform(-1.0, 1.0, (2, 2)), axis=0)
    box = Box(tuple(a), tuple(b))
    pieces = []
    for half in box.split(0, rng.uniform(a[0], b[0])):
        pieces.extend(half.split(1, rng.uniform(a[1], b[1])))
    assert sum(box_increment(path, piece) for piece in pieces) == pytest.approx(box_increment(path, box), abs=1e-12)


def test_value_is_right_continuous(asymmetric):
    path = simulate_levy_sheet(asymmetric, Domain((-1.0,), (1.0,)), seed=5)
    step = 1e-12
    interior = (np.abs(path.locations[:, 0]) > 1e-9) & (np.abs(path.locations[:, 0]) < 1.0 - 1e-9)
    assert np.any(interior)
    for (location,), mark in zip(path.locations[interior], path.marks[interior]):
        assert path.value(location + step) == pytest.approx(path.value(location), abs=1e-9)
        assert path.value(location) - path.value(location - step) == pytest.approx(mark, abs=1e-9)


CONGRUENT = [Box((-1.0,), (-0.5,)), Box((0.0,), (0.5,)), Box((0.5,), (1.0,))]


def test_jump_counts_are_stationary(asymmetric):
    domain = Domain((-1.0,), (1.0,))
    n = 4000
    counts = np.array([[jump_count(path, box, MarkInterval.positive()) for box in CONGRUENT]
                       for path in (simulate_levy_sheet(asymmetric, domain, seed=(1, i)) for i in range(n))])
    # positive jumps: ν((0, ∞))·|box| = 0.5 in every box
    se = math.sqrt(0.5 / n)
    for mean in counts.mean(axis=0):
        assert abs(mean - 0.5) <= 4.0 * se


def test_disjoint_increments_are_uncorrelated(asymmetric):
    domain = Domain((-1.0,), (1.0,))
    n = 4000
    increments = np.array([[box_increment(path, box) for box in CONGRUENT[:2]]
                           for path in (simulate_levy_sheet(asymmetric, domain, seed=(2, i)) for i in range(n))])
    centred = increments - increments.mean(axis=0)
    products = centred[:, 0] * centred[:, 1]
    assert abs(products.mean()) <= 4.0 * products.std() / math.sqrt(n)
    # compensated: mean zero, variance m₂·|box| = 1.375
    assert np.all(np.abs(increments.mean(axis=0)) <= 4.0 * math.sqrt(1.375 / n))
