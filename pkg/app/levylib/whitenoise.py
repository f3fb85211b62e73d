"""Truncated chaos expansions of the sheet and of its white noises.

* ``L(x) = m₂ Σ_i (∫_0^x e_i) K_{ε(κ(i,1))}``
* ``L̇(x) = m₂ Σ_i e_i(x) K_{ε(κ(i,1))}``
* ``Ñ̇(x, z) = Σ_{i,j} e_i(x) p_j(z) K_{ε(κ(i,j))}``

Every expansion is a :class:`chaos.ChaosCoefficients` of first-order terms.
"""
import logging
import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from .basis import TensorBasisOrdering, kappa
from .chaos import ChaosCoefficients, MultiIndex, chaos_sample_vector
from .exceptions import DomainError
from .montecarlo import SampleStats, run_samples
from .settings import ANTIDERIVATIVE_NODES_PER_UNIT, DEFAULT_TRUNCATION, DEFAULT_WORKERS, N_STANDARD_ERRORS
from .sheet_sim import Box, MarkInterval, simulate_levy_sheet, space_rule

logger = logging.getLogger(__name__)

SHEET = 'sheet'
LEVY_NOISE = 'levy_noise'
PNRM_NOISE = 'pnrm_noise'


def default_truncation(n):
    return DEFAULT_TRUNCATION.get(n, DEFAULT_TRUNCATION[max(DEFAULT_TRUNCATION)])


def _point(x):
    return np.atleast_1d(np.asarray(x, dtype=float))


def _first_order(values, js):
    terms = {}
    for i, row in enumerate(values, start=1):
        for j, value in zip(js, row):
            terms[MultiIndex.unit(kappa(i, j))] = value
    return terms


def effective_j_prime(system, j_prime):
    """``min(J', J_ν)``; a request above ``J_ν`` is capped and logged."""
    if j_prime < 1:
        raise ValueError("J' must be >= 1")
    if j_prime > system.J_nu:
        logger.info("J'=%d capped at J_nu=%d for measure %s", j_prime, system.J_nu, system.measure.name)
    return min(j_prime, system.J_nu)


def sheet_expansion(system, x, J):
    """Coefficients of ``L(x)``; ``∫_0^x e_i`` by per-axis Gauss-Legendre."""
    x = _point(x)
    ordering = TensorBasisOrdering(x.size, J)
    integrals = ordering.integrals(x)
    return ChaosCoefficients(_first_order(system.m2 * integrals[:, None], [1]), system, ordering)


def levy_noise_expansion(system, x, J):
    x = _point(x)
    ordering = TensorBasisOrdering(x.size, J)
    values = ordering.evaluate_all(x[None, :])[:, 0]
    return ChaosCoefficients(_first_order(system.m2 * values[:, None], [1]), system, ordering)


def pnrm_noise_expansion(system, x, z, J, j_prime):
    if z == 0.0:
        raise DomainError('the compensated-measure noise is defined for z != 0')
    x = _point(x)
    ordering = TensorBasisOrdering(x.size, J)
    js = list(range(1, effective_j_prime(system, j_prime) + 1))
    e = ordering.evaluate_all(x[None, :])[:, 0]
    p = np.array([float(system.p(j, z)) for j in js])
    return ChaosCoefficients(_first_order(np.outer(e, p), js), system, ordering)


def zeta_moments(system, count):
    measure = system.measure
    return system.p_matrix(measure.nodes, count) @ (measure.weights * measure.nodes)


def pnrm_to_levy_reduction(system, x, J, j_prime):
    """``∫ Ñ̇(x, ζ) ζ ν(dζ)`` coefficientwise; equals :func:`levy_noise_expansion`."""
    x = _point(x)
    ordering = TensorBasisOrdering(x.size, J)
    js = list(range(1, effective_j_prime(system, j_prime) + 1))
    e = ordering.evaluate_all(x[None, :])[:, 0]
    return ChaosCoefficients(_first_order(np.outer(e, zeta_moments(system, len(js))), js), system, ordering)


@dataclass(frozen=True)
class TruncatedExpansion:
    """One of the three expansions at fixed truncation, evaluated lazily at points."""

    kind: str
    system: object
    J: int
    j_prime: int = 1

    def __post_init__(self):
        if self.kind not in (SHEET, LEVY_NOISE, PNRM_NOISE):
            raise ValueError(f'unknown expansion kind {self.kind!r}')
        if self.J < 1:
            raise ValueError('J must be >= 1')

    def at(self, x, z=None):
        if self.kind == SHEET:
            return sheet_expansion(self.system, x, self.J)
        if self.kind == LEVY_NOISE:
            return levy_noise_expansion(self.system, x, self.J)
        if z is None:
            raise ValueError('pnrm_noise expansions need a mark z')
        return pnrm_noise_expansion(self.system, x, z, self.J, self.j_prime)


# -- covariance of the sheet expansion -----------------------------------


def _nonnegative(x):
    x = _point(x)
    if np.any(x < 0.0):
        raise DomainError('covariance points must lie in the nonnegative orthant')
    return x


def covariance_partial_sum(system, x, y, J):
    """``m₂² Σ_{i<=J} (∫_0^x e_i)(∫_0^y e_i)``."""
    x, y = _nonnegative(x), _nonnegative(y)
    ordering = TensorBasisOrdering(x.size, J)
    return system.m2**2 * float(ordering.integrals(x) @ ordering.integrals(y))


def covariance_target(system, x, y):
    """``M Π min(x_l, y_l)``, the limit of :func:`covariance_partial_sum`."""
    return system.measure.second_moment * float(np.prod(np.minimum(_nonnegative(x), _nonnegative(y))))


@dataclass(frozen=True)
class CovarianceCurve:
    Js: tuple
    partial_sums: tuple
    target: float
    extrapolated: float

    @property
    def errors(self):
        return tuple(self.target - s for s in self.partial_sums)


def covariance_curve(system, x, y, Js):
    """Partial sums at each ``J`` and a Richardson limit assuming a ``J^{-1/2}`` tail."""
    Js = tuple(sorted(int(J) for J in Js))
    x, y = _nonnegative(x), _nonnegative(y)
    ordering = TensorBasisOrdering(x.size, Js[-1])
    products = system.m2**2 * ordering.integrals(x) * ordering.integrals(y)
    cumulative = np.cumsum(products)
    sums = tuple(float(cumulative[J - 1]) for J in Js)
    if len(Js) > 1:
        ratio = math.sqrt(Js[-1] / Js[-2])
        extrapolated = (ratio * sums[-1] - sums[-2]) / (ratio - 1.0)
    else:
        extrapolated = sums[-1]
    return CovarianceCurve(Js, sums, covariance_target(system, x, y), extrapolated)


# -- compensated measure of a box ----------------------------------------


def _intervals(mark_set):
    intervals = [mark_set] if isinstance(mark_set, MarkInterval) else list(mark_set)
    intervals = [i if isinstance(i, MarkInterval) else MarkInterval(*i) for i in intervals]
    if any(interval.contains_zero for interval in intervals):
        raise DomainError('mark set must exclude 0')
    return intervals


def _mark_integrals(system, mark_set, count):
    total = np.zeros(count)
    for interval in _intervals(mark_set):
        nodes, weights = system.measure.interval_rule(interval)
        if nodes.size:
            total += system.p_matrix(nodes, count) @ weights
    return total


def compensated_measure_coefficients(system, x, mark_set, J, j_prime):
    """Coefficients of ``Ñ([0, x] × U)``: ``(∫_0^x e_i)(∫_U p_j dν)``."""
    x = _point(x)
    ordering = TensorBasisOrdering(x.size, J)
    count = effective_j_prime(system, j_prime)
    values = np.outer(ordering.integrals(x), _mark_integrals(system, mark_set, count))
    return ChaosCoefficients(_first_order(values, range(1, count + 1)), system, ordering)


def integrate_pnrm_expansion(system, x, mark_set, J, j_prime, nodes_per_unit=ANTIDERIVATIVE_NODES_PER_UNIT):
    """``∬_{[0,x]×U} Ñ̇(x', z) dx' ν(dz)`` by quadrature over the expansion's coefficients."""
    x = _point(x)
    ordering = TensorBasisOrdering(x.size, J)
    count = effective_j_prime(system, j_prime)
    points, weights = space_rule(Box(np.minimum(x, 0.0), np.maximum(x, 0.0)), nodes_per_unit)
    orientation = float(np.prod(np.sign(x))) if np.all(x != 0.0) else 0.0
    space = orientation * (ordering.evaluate_all(points) @ weights)
    values = np.outer(space, _mark_integrals(system, mark_set, count))
    return ChaosCoefficients(_first_order(values, range(1, count + 1)), system, ordering)


# -- Monte-Carlo consistency ---------------------------------------------


def expansion_sample(path, F, system, ordering):
    """``Σ c_α K_α`` on one realization for a first-order expansion ``F``."""
    alphas = list(F.terms)
    if any(alpha.order > 1 for alpha in alphas):
        raise ValueError('expansion_sample handles first-order expansions only')
    coefficients = np.array([F[alpha] for alpha in alphas])
    return float(coefficients @ chaos_sample_vector(path, alphas, system, ordering))


def _sheet_pair_sample(system, domain, x, F, ordering, seed):
    path = simulate_levy_sheet(system.measure, domain, 0.0, seed)
    return np.array([path.value(x), expansion_sample(path, F, system, ordering)])


@dataclass(frozen=True)
class ExpansionConsistencyReport:
    sheet: SampleStats
    expansion: SampleStats
    truncation_bias: float
    n_se: float

    @property
    def means_ok(self):
        return bool(abs(self.sheet.mean) <= self.n_se * self.sheet.se
                    and abs(self.expansion.mean) <= self.n_se * self.expansion.se)

    @property
    def variances_ok(self):
        gap = abs(self.sheet.variance - self.expansion.variance)
        envelope = self.n_se * math.hypot(self.sheet.variance_se, self.expansion.variance_se)
        return bool(gap <= envelope + self.truncation_bias)


def expansion_consistency_check(system, domain, x, J, n_seeds, base_seed=0, workers=DEFAULT_WORKERS,
                                n_se=N_STANDARD_ERRORS):
    """``L(x)`` against its truncated expansion sampled on the same paths."""
    x = _nonnegative(x)
    F = sheet_expansion(system, x, J)
    ordering = TensorBasisOrdering(x.size, J)
    samples = run_samples(partial(_sheet_pair_sample, system, domain, x, F, ordering), n_seeds, base_seed, workers)
    bias = covariance_target(system, x, x) - covariance_partial_sum(system, x, x, J)
    logger.debug('expansion check at %s with J=%d: truncation bias %g', x, J, bias)
    return ExpansionConsistencyReport(SampleStats.from_samples(samples[:, 0]),
                                      SampleStats.from_samples(samples[:, 1]), max(bias, 0.0), n_se)
