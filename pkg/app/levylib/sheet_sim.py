"""Brownian and finite-activity pure-jump Lévy sheets.

A Lévy sheet path is stored exactly as its jump list plus the compensator
rate, so every evaluation is a finite sum. Values are anchored at the
origin: ``L(x) = Ñ([0, x] × {|z| >= ε})`` with ``[0, x]`` taken as an
oriented box when some coordinate of ``x`` is negative.
"""
import itertools
import logging
from dataclasses import dataclass
from functools import partial

import numpy as np

from .basis import composite_gauss_legendre
from .exceptions import DomainError
from .montecarlo import SampleStats, philox_streams, run_samples, seed_sequence
from .settings import COMPENSATOR_NODES_PER_UNIT, DEFAULT_WORKERS, N_STANDARD_ERRORS

logger = logging.getLogger(__name__)


def _as_points(x, n):
    x = np.asarray(x, dtype=float)
    single = x.ndim == 0 or (x.ndim == 1 and (n > 1 or x.size == 1))
    points = x.reshape(-1, n)
    return points, single


@dataclass(frozen=True)
class Box:
    """Closed hyperrectangle ``[lower, upper]``; may be degenerate."""

    lower: tuple
    upper: tuple

    def __post_init__(self):
        lower = tuple(float(v) for v in np.atleast_1d(self.lower))
        upper = tuple(float(v) for v in np.atleast_1d(self.upper))
        if len(lower) != len(upper):
            raise DomainError('box corners must have the same dimension')
        if any(lo > hi for lo, hi in zip(lower, upper)):
            raise DomainError('box needs lower <= upper componentwise')
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @property
    def n(self):
        return len(self.lower)

    @property
    def volume(self):
        return float(np.prod(np.subtract(self.upper, self.lower)))

    def contains(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.n)
        return np.all((points > np.array(self.lower)) & (points <= np.array(self.upper)), axis=1)

    def inside(self, other):
        return all(a <= b for a, b in zip(other.lower, self.lower)) and all(
            a <= b for a, b in zip(self.upper, other.upper))

    def corners(self):
        for choice in itertools.product((0, 1), repeat=self.n):
            corner = tuple(self.upper[l] if c else self.lower[l] for l, c in enumerate(choice))
            yield corner, (-1) ** (self.n - sum(choice))

    def split(self, axis, at):
        lower_upper = list(self.upper)
        lower_upper[axis] = at
        upper_lower = list(self.lower)
        upper_lower[axis] = at
        return Box(self.lower, tuple(lower_upper)), Box(tuple(upper_lower), self.upper)


@dataclass(frozen=True)
class Domain(Box):
    """The simulation window; a box with nonzero extent on every axis."""

    def __post_init__(self):
        super().__post_init__()
        if any(hi <= lo for lo, hi in zip(self.lower, self.upper)):
            raise DomainError('domain extents must be positive')

    @classmethod
    def from_extents(cls, extents):
        extents = tuple(float(t) for t in np.atleast_1d(extents))
        return cls(tuple(0.0 for _ in extents), extents)

    @property
    def extents(self):
        return tuple(hi - lo for lo, hi in zip(self.lower, self.upper))

    def covers(self, points):
        points = np.asarray(points, dtype=float).reshape(-1, self.n)
        return np.all((points >= np.array(self.lower)) & (points <= np.array(self.upper)), axis=1)


@dataclass(frozen=True)
class MarkInterval:
    """Interval of jump sizes; closed at each end unless told otherwise."""

    low: float
    high: float
    include_low: bool = True
    include_high: bool = True

    @property
    def contains_zero(self):
        if self.low < 0.0 < self.high:
            return True
        return (self.low == 0.0 and self.include_low) or (self.high == 0.0 and self.include_high)

    def contains(self, marks):
        above = marks >= self.low if self.include_low else marks > self.low
        below = marks <= self.high if self.include_high else marks < self.high
        return above & below

    @classmethod
    def positive(cls):
        return cls(0.0, np.inf, include_low=False)

    @classmethod
    def negative(cls):
        return cls(-np.inf, 0.0, include_high=False)

    @classmethod
    def outside(cls, epsilon):
        """``ℝ ∖ (-ε, ε)`` as two intervals."""
        return (cls(-np.inf, -epsilon), cls(epsilon, np.inf))


def _oriented_indicator(locations, x):
    """``Π_l s_l`` with ``s_l = 1`` on ``(0, x_l]``, ``-1`` on ``(x_l, 0]``, else 0."""
    positive = (locations > 0.0) & (locations <= x)
    negative = (locations > x) & (locations <= 0.0)
    return np.prod(positive.astype(float) - negative.astype(float), axis=-1)


@dataclass(frozen=True, eq=False)
class LevySheetPath:
    """One finite-activity realization: jumps ``(location, mark)`` and the compensator rate."""

    measure: object
    domain: Domain
    epsilon: float
    locations: np.ndarray
    marks: np.ndarray
    drift_rate: float
    seed: object
    omitted_variance: float = 0.0

    @property
    def n_jumps(self):
        return self.marks.size

    def value(self, x):
        points, single = _as_points(x, self.domain.n)
        if not np.all(self.domain.covers(points)):
            raise DomainError('evaluation point outside the simulation domain')
        jumps = _oriented_indicator(self.locations[None, :, :], points[:, None, :]) @ self.marks
        values = jumps - self.drift_rate * np.prod(points, axis=1)
        return float(values[0]) if single else values

    def increment(self, box):
        if not box.inside(self.domain):
            raise DomainError('box outside the simulation domain')
        inside = box.contains(self.locations)
        return float(self.marks[inside].sum() - self.drift_rate * box.volume)


def simulate_levy_sheet(measure, domain, epsilon=0.0, seed=0):
    """Simulate the jumps with ``|z| >= epsilon`` of a pure-jump sheet on ``domain``.

    Count, locations and marks come from three independent Philox streams of
    ``seed``: the count is Poisson with mean ``|domain|·ν(|z| >= ε)``, the
    locations uniform, the marks drawn from the normalized restriction of ν.
    """
    if epsilon < 0.0:
        raise ValueError('epsilon must be >= 0')
    count_rng, location_rng, mark_rng = philox_streams(seed, 3)
    intensity = domain.volume * measure.mass(epsilon)
    count = int(count_rng.poisson(intensity))
    lower, extents = np.array(domain.lower), np.array(domain.extents)
    locations = lower + extents * location_rng.random((count, domain.n))
    marks = measure.sample_marks(mark_rng, count, epsilon)
    omitted = measure.small_jump_variance(epsilon) if epsilon > 0.0 else 0.0
    if omitted > 0.0:
        logger.debug('jumps below %g omitted; variance %g per unit volume', epsilon, omitted)
    return LevySheetPath(
        measure=measure,
        domain=domain,
        epsilon=float(epsilon),
        locations=locations,
        marks=np.asarray(marks, dtype=float),
        drift_rate=measure.drift_rate(epsilon),
        seed=seed,
        omitted_variance=omitted,
    )


def sheet_value(path, x):
    return path.value(x)


def box_increment(sheet, box):
    """``Δ_R`` as the alternating sum of the sheet at the ``2ⁿ`` corners of ``box``."""
    corners = list(box.corners())
    points = np.array([corner for corner, _ in corners])
    signs = np.array([sign for _, sign in corners], dtype=float)
    return float(np.sum(signs * np.atleast_1d(sheet.value(points))))


def jump_count(path, box, mark_set):
    """``N(R, U)``: jumps located in ``box`` with mark in the union ``mark_set``."""
    intervals = [mark_set] if isinstance(mark_set, MarkInterval) else list(mark_set)
    intervals = [i if isinstance(i, MarkInterval) else MarkInterval(*i) for i in intervals]
    if any(interval.contains_zero for interval in intervals):
        raise DomainError('mark set must exclude 0')
    in_marks = np.zeros(path.n_jumps, dtype=bool)
    for interval in intervals:
        in_marks |= interval.contains(path.marks)
    return int(np.count_nonzero(box.contains(path.locations) & in_marks))


# -- compensator quadrature ----------------------------------------------


@dataclass(frozen=True)
class CompensatorRule:
    """Weighted points of ``dλ × ν`` on a box: ``∫∫ f dλ dν ≈ Σ w f(points, marks)``."""

    points: np.ndarray
    marks: np.ndarray
    weights: np.ndarray

    def integrate(self, f):
        if self.weights.size == 0:
            return 0.0
        return float(np.sum(self.weights * f(self.points, self.marks)))


def space_rule(box, nodes_per_unit=COMPENSATOR_NODES_PER_UNIT):
    axes = [composite_gauss_legendre(lo, hi, nodes_per_unit) for lo, hi in zip(box.lower, box.upper)]
    grids = np.meshgrid(*[nodes for nodes, _ in axes], indexing='ij')
    weights = np.ones_like(grids[0])
    for axis, (_, axis_weights) in enumerate(axes):
        shape = [1] * len(axes)
        shape[axis] = -1
        weights = weights * axis_weights.reshape(shape)
    return np.stack([g.ravel() for g in grids], axis=1), weights.ravel()


def compensator_rule(box, measure, epsilon=0.0, nodes_per_unit=COMPENSATOR_NODES_PER_UNIT):
    """``space_rule(box)`` times the nodes of the restricted measure."""
    space, volume_weights = space_rule(box, nodes_per_unit)
    marks, mark_weights = measure.restricted(epsilon)
    return CompensatorRule(
        points=np.repeat(space, marks.size, axis=0),
        marks=np.tile(marks, space.shape[0]),
        weights=np.outer(volume_weights, mark_weights).ravel(),
    )


def compensated_integral(path, f, support=None, nodes_per_unit=COMPENSATOR_NODES_PER_UNIT):
    """``∫∫ f(x, z) Ñ(dx, dz)`` on one realization.

    ``f(points, marks)`` is vectorized. The compensator is integrated over
    ``support`` (default: the whole domain), which must contain the support
    of ``f`` inside the domain; pass it for indicator-type integrands.
    """
    box = support or path.domain
    jumps = float(np.sum(f(path.locations, path.marks))) if path.n_jumps else 0.0
    rule = compensator_rule(box, path.measure, path.epsilon, nodes_per_unit)
    return jumps - rule.integrate(f)


# -- Brownian sheet ------------------------------------------------------


def uniform_grid(domain, cells):
    cells = np.broadcast_to(np.atleast_1d(cells), (domain.n,))
    return tuple(np.linspace(lo, hi, int(c) + 1) for lo, hi, c in zip(domain.lower, domain.upper, cells))


@dataclass(frozen=True, eq=False)
class BrownianSheetPath:
    """Gaussian cell increments on a grid and the sheet values at grid points.

    Values are cumulative sums from the domain's lower corner, so on a domain
    starting at the origin ``B`` vanishes wherever a coordinate is 0.
    """

    domain: Domain
    grid: tuple
    increments: np.ndarray
    seed: object

    @property
    def values(self):
        cumulative = self.increments
        for axis in range(cumulative.ndim):
            cumulative = np.cumsum(cumulative, axis=axis)
        return np.pad(cumulative, [(1, 0)] * cumulative.ndim)

    def _grid_index(self, points):
        indices = []
        for axis, nodes in enumerate(self.grid):
            idx = np.clip(np.searchsorted(nodes, points[:, axis]), 0, nodes.size - 1)
            below = np.clip(idx - 1, 0, nodes.size - 1)
            idx = np.where(np.abs(nodes[below] - points[:, axis]) < np.abs(nodes[idx] - points[:, axis]), below, idx)
            if not np.allclose(nodes[idx], points[:, axis], rtol=0.0, atol=1e-12 * max(1.0, abs(nodes[-1]))):
                raise DomainError('Brownian sheet is only evaluated at grid points')
            indices.append(idx)
        return tuple(indices)

    def value(self, x):
        points, single = _as_points(x, self.domain.n)
        values = self.values[self._grid_index(points)]
        return float(values[0]) if single else values


def simulate_brownian_sheet(domain, grid, seed=0):
    """Independent centered Gaussian cell increments with variance equal to cell volume."""
    if not isinstance(grid, tuple) or np.ndim(grid[0]) == 0:
        grid = uniform_grid(domain, grid)
    grid = tuple(np.asarray(nodes, dtype=float) for nodes in grid)
    for axis, nodes in enumerate(grid):
        if nodes.size < 2 or np.any(np.diff(nodes) <= 0.0):
            raise DomainError(f'grid on axis {axis} must be strictly increasing')
        if not (np.isclose(nodes[0], domain.lower[axis]) and np.isclose(nodes[-1], domain.upper[axis])):
            raise DomainError(f'grid on axis {axis} must span the domain')
    (rng,) = philox_streams(seed, 1)
    volumes = np.ones(())
    for nodes in grid:
        volumes = np.multiply.outer(volumes, np.diff(nodes))
    increments = rng.standard_normal(volumes.shape) * np.sqrt(volumes)
    return BrownianSheetPath(domain=domain, grid=grid, increments=increments, seed=seed)


@dataclass(frozen=True, eq=False)
class LevyItoSheetPath:
    """``a·Πx + s·B(x) + L(x)``: drift, Brownian and pure-jump parts on one grid."""

    drift: float
    brownian_scale: float
    brownian: BrownianSheetPath
    jumps: LevySheetPath

    @property
    def domain(self):
        return self.jumps.domain

    def value(self, x):
        points, single = _as_points(x, self.domain.n)
        values = (self.drift * np.prod(points, axis=1)
                  + self.brownian_scale * np.atleast_1d(self.brownian.value(points))
                  + np.atleast_1d(self.jumps.value(points)))
        return float(values[0]) if single else values


def simulate_levy_ito_sheet(measure, domain, grid, epsilon=0.0, seed=0, drift=0.0, brownian_scale=1.0):
    """General Lévy sheet in Lévy-Itô form, evaluable at grid points."""
    brownian_seed, jump_seed = seed_sequence(seed).spawn(2)
    return LevyItoSheetPath(
        drift=float(drift),
        brownian_scale=float(brownian_scale),
        brownian=simulate_brownian_sheet(domain, grid, brownian_seed),
        jumps=simulate_levy_sheet(measure, domain, epsilon, jump_seed),
    )


# -- statistical validators ----------------------------------------------


def _increment_sample(measure, domain, box, epsilon, seed):
    return simulate_levy_sheet(measure, domain, epsilon, seed).increment(box)


@dataclass(frozen=True)
class CharacteristicFunctionReport:
    u: np.ndarray
    empirical: np.ndarray
    target: np.ndarray
    deviation: np.ndarray
    envelope: np.ndarray
    n_seeds: int

    @property
    def max_deviation(self):
        return float(self.deviation.max())

    @property
    def within(self):
        return bool(np.all(self.deviation <= self.envelope))


def empirical_cf_check(measure, domain, box, u_grid, n_seeds, base_seed=0, epsilon=0.0,
                       workers=DEFAULT_WORKERS, n_se=N_STANDARD_ERRORS):
    """Compare ``mean exp(i u Δ_R L)`` with ``exp(|R| Ψ(u))`` on ``u_grid``."""
    u = np.atleast_1d(np.asarray(u_grid, dtype=float))
    sample = partial(_increment_sample, measure, domain, box, epsilon)
    increments = run_samples(sample, n_seeds, base_seed, workers)
    phases = np.multiply.outer(increments, u)
    cos, sin = np.cos(phases), np.sin(phases)
    empirical = cos.mean(axis=0) + 1j * sin.mean(axis=0)
    se = np.sqrt((cos.var(axis=0, ddof=1) + sin.var(axis=0, ddof=1)) / n_seeds)
    target = np.exp(box.volume * np.atleast_1d(measure.psi(u)))
    return CharacteristicFunctionReport(
        u=u, empirical=empirical, target=target, deviation=np.abs(empirical - target),
        envelope=n_se * se, n_seeds=n_seeds,
    )


@dataclass(frozen=True)
class MarkScaled:
    """Picklable integrand ``φ(x)·z``."""

    phi: object

    def __call__(self, points, marks):
        return np.asarray(self.phi(points), dtype=float) * marks


def _pairing_sample(measure, domain, phi, epsilon, seed):
    path = simulate_levy_sheet(measure, domain, epsilon, seed)
    return compensated_integral(path, MarkScaled(phi))


@dataclass(frozen=True)
class PairingReport:
    stats: SampleStats
    target_variance: float
    n_se: float

    @property
    def mean_ok(self):
        return bool(abs(self.stats.mean) <= self.n_se * self.stats.se)

    @property
    def variance_ok(self):
        return bool(abs(self.stats.variance - self.target_variance) <= self.n_se * self.stats.variance_se)


def pairing_variance_check(measure, domain, phi, n_seeds, base_seed=0, epsilon=0.0,
                         workers=DEFAULT_WORKERS, n_se=N_STANDARD_ERRORS):
    """Mean 0 and variance ``M ∫ φ²`` of ``⟨ω, φ⟩ = ∫∫ φ(x) z Ñ(dx, dz)``.

    ``φ = φ₁ - φ₂`` gives the mean-square distance ``M ‖φ₁ - φ₂‖²``.
    """
    points, weights = space_rule(domain)
    phi_squared = float(np.sum(weights * np.asarray(phi(points), dtype=float) ** 2))
    target = measure.integrate(lambda z: z**2, epsilon) * phi_squared
    values = run_samples(partial(_pairing_sample, measure, domain, phi, epsilon), n_seeds, base_seed, workers)
    return PairingReport(stats=SampleStats.from_samples(values), target_variance=target, n_se=n_se)
