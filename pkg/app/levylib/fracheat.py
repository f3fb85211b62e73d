"""Mittag-Leffler functions and a Monte-Carlo solver for the fractional
stochastic heat equation

    ∂^α_t Y = λ ΔY + σ Ẇ + γ L̇,    Y(0, ·) = δ,    0 < α < 2,

through its mild solution ``Y = I1 + I2 + I3``: the evolved Dirac datum, a
stochastic convolution against a time-space Brownian sheet and one against a
compensated pure-jump sheet.

Both Green's kernels are radial and self-similar, so they are evaluated
through one-variable profiles ``P_{α,β}(ρ)`` tabulated once per ``(α, β, d)``:

    I1(t, x)  = w_t^{-d} P_{α,1}(|x| / w_t)
    G(s, r)   = s^{α-1} w_s^{-d} P_{α,α}(|r| / w_s),    w_s = sqrt(λ s^α).
"""
import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache, partial

import mpmath
import numpy as np
from scipy.integrate import simpson
from scipy.interpolate import CubicSpline
from scipy.special import gammaln, it2j0y0, j0, rgamma, sici

from .basis import composite_gauss_legendre
from .exceptions import ConvergenceError, DomainError, UnsupportedOrderError
from .levy_measure import gauss_legendre
from .montecarlo import SampleStats, philox_streams, run_samples, seed_sequence
from .settings import (
    COMPENSATOR_TIME_NODES,
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    DEFAULT_WORKERS,
    KERNEL_FREQUENCY_CUTOFF,
    KERNEL_NODES_PER_PANEL,
    KERNEL_PANEL_WIDTH,
    KERNEL_PROFILE_POINTS,
    KERNEL_PROFILE_RHO_MAX,
    ML_ASYMPTOTIC_TERMS,
    ML_ASYMPTOTIC_THRESHOLD,
    ML_MAX_TERMS,
    ML_SMALL_ARGUMENT,
    ML_TOLERANCE,
    SPATIAL_WIDTHS,
)
from .sheet_sim import Domain, simulate_levy_sheet

logger = logging.getLogger(__name__)

SERIES = 'series'
MP_SERIES = 'mp_series'
ASYMPTOTIC = 'asymptotic'

# an asymptotic value is trusted when its first omitted term is below this
ASYMPTOTIC_ACCURACY = 1e-9
# exponentially small terms of the asymptotic expansion are dropped below e^-40
EXPONENTIAL_DECAY = 40.0
MAX_SERIES_DIGITS = 200


# -- Mittag-Leffler ------------------------------------------------------


def _check_ml_params(alpha, beta):
    if not 0.0 < alpha <= 2.0:
        raise ValueError(f'alpha must lie in (0, 2], got {alpha}')
    if not beta > 0.0:
        raise ValueError(f'beta must be positive, got {beta}')


def _series_peak(alpha, beta, r):
    k = np.arange(0, int(2.0 * r ** (1.0 / alpha) / alpha) + 20)
    logs = (k * math.log(r) - gammaln(alpha * k + beta)) / math.log(10.0)
    top = int(np.argmax(logs))
    return float(logs[top]), top


def _ml_float_series(alpha, beta, z, tol, max_terms):
    total, k = 0.0, 0
    chunk = 256
    while k < max_terms:
        ks = np.arange(k, min(k + chunk, max_terms))
        terms = z**ks * rgamma(alpha * ks + beta)
        total += math.fsum(terms)
        if abs(terms[-1]) < tol and abs(terms[-1]) <= abs(terms[0]):
            return total
        k += chunk
    raise ConvergenceError(f'E_{alpha},{beta}({z}) series did not converge in {max_terms} terms')


def _ml_mp_series(alpha, beta, z, tol, max_terms):
    log10_peak, k_peak = _series_peak(alpha, beta, abs(z))
    digits = 20 + max(int(math.ceil(log10_peak)), 0)
    with mpmath.workdps(digits):
        # Gamma arguments in mp: the terms cancel down from a large peak
        alpha_m, beta_m = mpmath.mpf(alpha), mpmath.mpf(beta)
        logz = mpmath.log(abs(mpmath.mpf(z)))
        sign = -1 if z < 0 else 1
        total = mpmath.mpf(0)
        for k in range(max_terms):
            term = sign**k * mpmath.exp(k * logz - mpmath.loggamma(alpha_m * k + beta_m))
            total += term
            if k > k_peak and abs(term) < tol * max(abs(total), mpmath.mpf(10) ** -300):
                return float(total)
    raise ConvergenceError(f'E_{alpha},{beta}({z}) series did not converge in {max_terms} terms')


def _ml_asymptotic(alpha, beta, z, terms=ML_ASYMPTOTIC_TERMS):
    """``-Σ_{m=1}^{M} z^{-m} / Γ(β - αm)``, the algebraic expansion on the negative axis."""
    m = np.arange(1, terms + 1)
    return float(-np.sum(z ** (-m.astype(float)) * rgamma(beta - alpha * m)))


def _asymptotic_error(alpha, beta, z, terms=ML_ASYMPTOTIC_TERMS):
    return abs(z) ** -(terms + 1.0) * abs(float(rgamma(beta - alpha * (terms + 1))))


def ml_regime(alpha, beta, z):
    """Which evaluation regime :func:`mittag_leffler` uses at ``z``."""
    if abs(z) <= ML_SMALL_ARGUMENT:
        return SERIES
    if z < -ML_ASYMPTOTIC_THRESHOLD:
        decay = abs(z) ** (1.0 / alpha) * abs(math.cos(math.pi / alpha))
        if alpha <= 1.0 or decay > EXPONENTIAL_DECAY:
            if _asymptotic_error(alpha, beta, z) <= ASYMPTOTIC_ACCURACY:
                return ASYMPTOTIC
            if _series_peak(alpha, beta, abs(z))[0] > MAX_SERIES_DIGITS:
                return ASYMPTOTIC
    return MP_SERIES


def mittag_leffler(alpha, beta, z, tol=ML_TOLERANCE, max_terms=ML_MAX_TERMS, method=None):
    """``E_{α,β}(z) = Σ z^k / Γ(αk + β)`` for real ``z`` (scalar or array).

    ``method`` forces ``'series'`` (arbitrary precision), or ``'asymptotic'``;
    by default the regime comes from :func:`ml_regime`. Raises
    :class:`ConvergenceError` when a series needs more than ``max_terms`` terms.
    """
    _check_ml_params(alpha, beta)
    z_arr = np.asarray(z, dtype=float)
    values = np.empty(z_arr.shape)
    for index, value in np.ndenumerate(z_arr):
        values[index] = _ml_scalar(alpha, beta, float(value), tol, max_terms, method)
    return float(values) if values.ndim == 0 else values


def _ml_scalar(alpha, beta, z, tol, max_terms, method):
    if z == 0.0:
        return float(rgamma(beta))
    if method == 'series':
        return _ml_mp_series(alpha, beta, z, tol, max_terms)
    if method == ASYMPTOTIC:
        if z >= 0.0:
            raise DomainError('the asymptotic form covers the negative axis only')
        return _ml_asymptotic(alpha, beta, z)
    regime = ml_regime(alpha, beta, z)
    if regime == SERIES:
        return _ml_float_series(alpha, beta, z, tol, max_terms)
    if regime == ASYMPTOTIC:
        return _ml_asymptotic(alpha, beta, z)
    return _ml_mp_series(alpha, beta, z, tol, max_terms)


def mittag_leffler_table(alpha, beta, zs):
    return [(float(z), mittag_leffler(alpha, beta, z), ml_regime(alpha, beta, float(z))) for z in zs]


# -- kernel profiles -----------------------------------------------------


def _cosine_tails(rho, cutoff, order):
    """``∫_U^∞ cos(ρu) u^{-order} du`` by integration by parts down to Si/Ci."""
    rho = np.asarray(rho, dtype=float)
    out = np.empty_like(rho)
    zero = rho == 0.0
    out[zero] = cutoff ** (1.0 - order) / (order - 1.0)
    r = rho[~zero]
    si, ci = sici(r * cutoff)
    c, s = -ci, 0.5 * np.pi - si
    for n in range(2, order + 1):
        c, s = (np.cos(r * cutoff) * cutoff ** (1.0 - n) / (n - 1) - r / (n - 1) * s,
                np.sin(r * cutoff) * cutoff ** (1.0 - n) / (n - 1) + r / (n - 1) * c)
    out[~zero] = c
    return out


def _bessel_tail(a):
    a = np.asarray(a, dtype=float)
    out = np.full(a.shape, np.inf)
    positive = a > 0.0
    out[positive] = it2j0y0(a[positive])[0] - np.log(0.5 * a[positive]) - np.euler_gamma
    return out


def _profile_values(alpha, beta, d, rho, cutoff=KERNEL_FREQUENCY_CUTOFF):
    """``P_{α,β}(ρ)`` by Gauss-Legendre on ``[0, U]`` plus the analytic tail; also the tail bias."""
    nodes, weights = composite_gauss_legendre(0.0, cutoff, KERNEL_NODES_PER_PANEL / KERNEL_PANEL_WIDTH,
                                              KERNEL_PANEL_WIDTH)
    e = mittag_leffler(alpha, beta, -nodes**2)
    c1 = float(rgamma(beta - alpha))
    c2 = -float(rgamma(beta - 2.0 * alpha))
    c3 = float(rgamma(beta - 3.0 * alpha))
    rho = np.asarray(rho, dtype=float)
    if d == 1:
        values = np.cos(np.multiply.outer(rho, nodes)) @ (weights * e)
        if c1:
            values += c1 * _cosine_tails(rho, cutoff, 2)
        if c2:
            values += c2 * _cosine_tails(rho, cutoff, 4)
        return values / np.pi, abs(c3) / (5.0 * cutoff**5) / np.pi
    values = j0(np.multiply.outer(rho, nodes)) @ (weights * e * nodes)
    if c1:
        values = values + c1 * _bessel_tail(rho * cutoff)
    return values / (2.0 * np.pi), abs(c2) / (2.0 * cutoff**2) / (2.0 * np.pi)


@dataclass(frozen=True, eq=False)
class KernelProfile:
    """Tabulated radial profile ``P_{α,β}`` in ``d`` dimensions with a cubic spline."""

    alpha: float
    beta: float
    d: int
    rho: np.ndarray
    values: np.ndarray
    spline: CubicSpline
    tail_bias: float
    singular_origin: bool
    squared_mass: float
    cutoff: float = KERNEL_FREQUENCY_CUTOFF
    antiderivative: object = field(default=None, repr=False)

    def __call__(self, rho):
        rho = np.abs(np.asarray(rho, dtype=float))
        out = np.zeros(rho.shape)
        inside = rho <= self.rho[-1]
        near = inside & (rho < self.rho[0])
        out[inside & ~near] = self.spline(rho[inside & ~near])
        if np.any(near):
            out[near] = _profile_values(self.alpha, self.beta, self.d, rho[near], self.cutoff)[0]
        return out

    def interval_mass(self, a, b):
        if self.d != 1:
            raise UnsupportedOrderError('interval masses are one-dimensional')
        return self._odd_antiderivative(b) - self._odd_antiderivative(a)

    def _odd_antiderivative(self, rho):
        rho = np.asarray(rho, dtype=float)
        return np.sign(rho) * self.antiderivative(np.minimum(np.abs(rho), self.rho[-1]))

    def radial_mass(self, radius):
        grid = np.linspace(self.rho[0], min(radius, self.rho[-1]), 513)
        return 2.0 * np.pi * float(simpson(grid * self(grid), x=grid))


@lru_cache(maxsize=16)
def kernel_profile(alpha, beta, d, cutoff=KERNEL_FREQUENCY_CUTOFF):
    if d not in (1, 2):
        raise UnsupportedOrderError(f'kernels are implemented for d = 1, 2; got d={d}')
    rho = np.linspace(0.0, KERNEL_PROFILE_RHO_MAX, KERNEL_PROFILE_POINTS)
    c1 = float(rgamma(beta - alpha))
    singular = d == 2 and c1 != 0.0
    if singular:
        rho = rho[1:]
    values, bias = _profile_values(alpha, beta, d, rho, cutoff)
    spline = CubicSpline(rho, values)
    if d == 1:
        squared = 2.0 * float(simpson(values**2, x=rho))
    else:
        squared = 2.0 * np.pi * float(simpson(rho * values**2, x=rho))
    logger.debug('kernel profile alpha=%g beta=%g d=%d cutoff=%g: tail bias %.2e', alpha, beta, d, cutoff, bias)
    return KernelProfile(
        alpha=alpha, beta=beta, d=d, rho=rho, values=values, spline=spline, tail_bias=bias,
        singular_origin=singular, squared_mass=squared, cutoff=cutoff,
        antiderivative=spline.antiderivative() if d == 1 else None,
    )


# -- configuration -------------------------------------------------------


@dataclass(frozen=True)
class HeatConfig:
    """Parameters of one solve; ``x`` holds evaluation points as ``d``-tuples."""

    alpha: float
    lambda_diff: float
    sigma: float
    gamma: float
    t: float
    x: tuple
    measure: object = None
    d: int = 1
    time_steps: int = 32
    space_step: float = 0.1
    x_max: float = None
    frequency_cutoff: float = KERNEL_FREQUENCY_CUTOFF
    n_samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    workers: int = DEFAULT_WORKERS

    def __post_init__(self):
        if not 0.0 < self.alpha < 2.0:
            raise ValueError(f'alpha must lie in (0, 2), got {self.alpha}')
        if not self.lambda_diff > 0.0:
            raise ValueError('lambda_diff must be positive')
        if self.d not in (1, 2):
            raise UnsupportedOrderError(f'd must be 1 or 2, got {self.d}')
        if not self.t > 0.0:
            raise DomainError('t must be positive: the initial datum is a Dirac mass')
        if self.time_steps < 1 or not self.space_step > 0.0 or self.n_samples < 2:
            raise ValueError('grids and sample counts must be positive')
        if self.gamma != 0.0 and self.measure is None:
            raise ValueError('a Lévy measure is required when gamma != 0')
        points = tuple(tuple(float(c) for c in np.atleast_1d(p)) for p in self.x)
        if not points or any(len(p) != self.d for p in points):
            raise ValueError(f'evaluation points must have {self.d} coordinates')
        object.__setattr__(self, 'x', points)

    @property
    def points(self):
        return np.array(self.x)

    def width(self, s):
        return np.sqrt(self.lambda_diff * np.asarray(s, dtype=float) ** self.alpha)

    @property
    def spatial_truncation(self):
        return self.x_max if self.x_max is not None else SPATIAL_WIDTHS * float(self.width(self.t))


def _radius(r, d):
    r = np.asarray(r, dtype=float)
    return np.abs(r) if d == 1 else np.linalg.norm(r, axis=-1)


def deterministic_term(config):
    """``I1(t, x)`` at every evaluation point."""
    profile = kernel_profile(config.alpha, 1.0, config.d, config.frequency_cutoff)
    w = float(config.width(config.t))
    return profile(_radius(config.points if config.d == 2 else config.points[:, 0], config.d) / w) / w**config.d


def deterministic_tail(config):
    profile = kernel_profile(config.alpha, 1.0, config.d, config.frequency_cutoff)
    return profile.tail_bias / float(config.width(config.t)) ** config.d


def greens_kernel(config, s, r):
    """``G(s, r) = s^{α-1} (2π)^{-d} ∫ e^{iry} E_{α,α}(-λ s^α |y|²) dy``."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise DomainError('the Green kernel needs elapsed time s > 0')
    profile = kernel_profile(config.alpha, config.alpha, config.d, config.frequency_cutoff)
    w = config.width(s)
    return s ** (config.alpha - 1.0) * w ** (-config.d) * profile(_radius(r, config.d) / w)


def integrate_singular(f, t, alpha, nodes=COMPENSATOR_TIME_NODES):
    """``∫_0^t s^{α-1} f(s) ds`` through ``s = v^{1/α}``, which removes the singularity."""
    v, weights = gauss_legendre(0.0, t**alpha, nodes)
    return float(np.sum(weights * np.asarray(f(v ** (1.0 / alpha)), dtype=float))) / alpha


@dataclass(frozen=True)
class TimeCells:
    """Cells of elapsed time ``s = t - r`` with the exact cell average of ``s^{α-1}``."""

    lower: np.ndarray
    upper: np.ndarray
    singular_average: np.ndarray

    @classmethod
    def build(cls, t, steps, alpha):
        edges = np.linspace(0.0, t, steps + 1)
        lower, upper = edges[:-1], edges[1:]
        average = (upper**alpha - lower**alpha) / (alpha * (upper - lower))
        return cls(lower, upper, average)

    @property
    def mid(self):
        return 0.5 * (self.lower + self.upper)

    @property
    def widths(self):
        return self.upper - self.lower


def _space_grid(config, step):
    points = config.points
    reach = config.spatial_truncation
    axes = []
    for axis in range(config.d):
        lo, hi = points[:, axis].min() - reach, points[:, axis].max() + reach
        cells = max(1, int(math.ceil((hi - lo) / step)))
        edges = np.linspace(lo, hi, cells + 1)
        axes.append((0.5 * (edges[:-1] + edges[1:]), (hi - lo) / cells))
    mids = np.stack([g.ravel() for g in np.meshgrid(*[a[0] for a in axes], indexing='ij')], axis=1)
    return mids, math.prod(a[1] for a in axes)


def _kernel_matrix(config, time_steps, space_step):
    """``G`` on every time-space cell: rows are points, columns cells; plus cell volumes."""
    cells = TimeCells.build(config.t, time_steps, config.alpha)
    mids, area = _space_grid(config, space_step)
    profile = kernel_profile(config.alpha, config.alpha, config.d, config.frequency_cutoff)
    w = config.width(cells.mid)
    offsets = config.points[:, None, :] - mids[None, :, :]
    radius = _radius(offsets if config.d == 2 else offsets[..., 0], config.d)
    blocks = [cells.singular_average[k] * w[k] ** (-config.d) * profile(radius / w[k]) for k in range(time_steps)]
    matrix = np.concatenate(blocks, axis=1)
    volumes = np.repeat(cells.widths, mids.shape[0]) * area
    return matrix, volumes


def scheme_variance(config, time_steps=None, space_step=None):
    """Exact variance of the discretized ``I2`` at every point: ``σ² Σ G² |cell|``."""
    matrix, volumes = _kernel_matrix(config, time_steps or config.time_steps, space_step or config.space_step)
    return config.sigma**2 * (matrix**2 @ volumes)


def isometry_exponent(config):
    return 2.0 * config.alpha - 2.0 - config.alpha * config.d / 2.0


def isometry_variance(config):
    """``σ² ∫_0^t ∫ G(s, r)² dr ds`` in closed form; infinite when the time integral diverges."""
    e = isometry_exponent(config)
    if e <= -1.0:
        return np.inf
    p2 = kernel_profile(config.alpha, config.alpha, config.d, config.frequency_cutoff).squared_mass
    return config.sigma**2 * p2 * config.lambda_diff ** (-config.d / 2.0) * config.t ** (e + 1.0) / (e + 1.0)


def grid_bias(config):
    if config.sigma == 0.0:
        return np.zeros(len(config.x))
    coarse = scheme_variance(config)
    fine = scheme_variance(config, 2 * config.time_steps, config.space_step / 2.0)
    return np.abs(coarse - fine) / (1.0 - 2.0**-0.5)


# -- Monte-Carlo plan ----------------------------------------------------


@dataclass(frozen=True, eq=False)
class HeatPlan:
    """Everything a sample needs, computed once and shared read-only by workers."""

    config: HeatConfig
    kernel: np.ndarray
    cell_std: np.ndarray
    domain: Domain
    compensator: np.ndarray
    compensator_bias: float

    def brownian(self, seed):
        if self.kernel is None:
            return np.zeros(len(self.config.x))
        (rng,) = philox_streams(seed, 1)
        increments = rng.standard_normal(self.cell_std.size) * self.cell_std
        return self.config.sigma * (self.kernel @ increments)

    def levy(self, path):
        config = self.config
        values = np.zeros(len(config.x))
        if config.gamma == 0.0:
            return values
        if path.n_jumps:
            r, z = path.locations[:, 0], path.locations[:, 1:]
            s = np.maximum(config.t - r, np.finfo(float).tiny)
            for p, point in enumerate(config.points):
                offsets = point[None, :] - z
                kernel = greens_kernel(config, s, offsets if config.d == 2 else offsets[:, 0])
                values[p] = float(kernel @ path.marks)
        return config.gamma * (values - path.drift_rate * self.compensator)


def _jump_domain(config):
    points, reach = config.points, config.spatial_truncation
    lower = (0.0,) + tuple(points.min(axis=0) - reach)
    upper = (config.t,) + tuple(points.max(axis=0) + reach)
    return Domain(lower, upper)


def kernel_mass(config, domain):
    """``∬ G(t - r, x - z) dz dr`` over the jump domain at every point, and a bound on what it misses."""
    profile = kernel_profile(config.alpha, config.alpha, config.d, config.frequency_cutoff)
    masses, missed = [], 0.0
    for point in config.points:
        if config.d == 1:
            a, b = domain.lower[1], domain.upper[1]

            def box_mass(s, x=point[0]):
                w = config.width(s)
                return profile.interval_mass((a - x) / w, (b - x) / w)

            masses.append(integrate_singular(box_mass, config.t, config.alpha))
        else:
            inscribed = min(min(p - lo, hi - p) for p, lo, hi in zip(point, domain.lower[1:], domain.upper[1:]))
            total = float(rgamma(config.alpha))
            outside = integrate_singular(
                lambda s: np.array([total - profile.radial_mass(inscribed / w) for w in config.width(s)]),
                config.t, config.alpha, nodes=16)
            masses.append(config.t**config.alpha * total / config.alpha)
            missed = max(missed, outside)
    return np.array(masses), missed


@lru_cache(maxsize=8)
def heat_plan(config):
    if config.alpha > 1.0:
        logger.warning('alpha=%g > 1: the Green kernel may change sign; only the isometry check applies',
                       config.alpha)
    if config.sigma != 0.0 and isometry_exponent(config) <= -1.0:
        logger.warning('d=%d, alpha=%g: the Brownian term has infinite variance and does not converge '
                       'under grid refinement', config.d, config.alpha)
    kernel = cell_std = None
    if config.sigma != 0.0:
        kernel, volumes = _kernel_matrix(config, config.time_steps, config.space_step)
        cell_std = np.sqrt(volumes)
        logger.debug('I2 kernel table %s', kernel.shape)
    domain = _jump_domain(config)
    compensator, missed = (kernel_mass(config, domain) if config.gamma != 0.0
                           else (np.zeros(len(config.x)), 0.0))
    return HeatPlan(config, kernel, cell_std, domain, compensator, missed)


def stochastic_term_brownian(config, seed):
    return heat_plan(config).brownian(seed)


def stochastic_term_levy(config, path=None, seed=0):
    """One sample of ``I3``; simulates the jump sheet from ``seed`` unless ``path`` is given."""
    plan = heat_plan(config)
    if config.gamma == 0.0:
        return np.zeros(len(config.x))
    if path is None:
        path = simulate_levy_sheet(config.measure, plan.domain, 0.0, seed)
    return plan.levy(path)


def _heat_sample(plan, seed):
    brownian_seed, jump_seed = seed_sequence(seed).spawn(2)
    i2 = plan.brownian(brownian_seed)
    i3 = (plan.levy(simulate_levy_sheet(plan.config.measure, plan.domain, 0.0, jump_seed))
          if plan.config.gamma != 0.0 else np.zeros_like(i2))
    return np.stack([i2, i3])


@dataclass(frozen=True)
class SolutionStats:
    points: np.ndarray
    i1: np.ndarray
    i2: SampleStats
    i3: SampleStats
    y: SampleStats
    bias_estimate: np.ndarray
    i1_tail: float
    isometry_variance: float

    @property
    def n_samples(self):
        return self.y.count

    def rows(self):
        for p, point in enumerate(self.points):
            yield {
                'x': tuple(point),
                'I1': self.i1[p],
                'mean_I2': self.i2.mean[p],
                'var_I2': self.i2.variance[p],
                'mean_I3': self.i3.mean[p],
                'var_I3': self.i3.variance[p],
                'mean_Y': self.y.mean[p],
                'var_Y': self.y.variance[p],
                'se_Y': self.y.se[p],
                'bias_estimate': self.bias_estimate[p],
                'i1_tail': self.i1_tail,
            }


def solve(config):
    """``I1`` once and ``n_samples`` draws of ``I2 + I3``, summarized per point."""
    plan = heat_plan(config)
    i1 = deterministic_term(config)
    logger.info('solving at %d points with %d samples on %d workers', len(config.x), config.n_samples,
                config.workers)
    samples = run_samples(partial(_heat_sample, plan), config.n_samples, config.seed, config.workers)
    i2, i3 = samples[:, 0, :], samples[:, 1, :]
    noise = SampleStats.from_samples(i2 + i3)
    bias = grid_bias(config) + abs(config.gamma) * plan.compensator_bias
    return SolutionStats(
        points=config.points,
        i1=i1,
        i2=SampleStats.from_samples(i2),
        i3=SampleStats.from_samples(i3),
        y=noise.shifted(i1),
        bias_estimate=bias,
        i1_tail=deterministic_tail(config),
        isometry_variance=isometry_variance(config),
    )
