"""Lévy measures with finite activity and bounded support.

A measure is stored as a weighted point set ``(nodes, weights)``: the atoms
themselves for a discrete measure, or a composite Gauss-Legendre rule with
the density folded into the weights for a density on
``[-C, -eps0] ∪ [eps0, C]``. Every integral against ν is then a finite sum.
"""
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import cumulative_trapezoid

from .exceptions import InvalidMeasureError
from .settings import DEFAULT_MOMENT_ORDER, DEFAULT_NODES_PER_SIDE, SAMPLER_GRID_POINTS

logger = logging.getLogger(__name__)

ATOMS = 'atoms'
DENSITY = 'density'
SIDES = ('both', 'positive', 'negative')


def uniform_density(z):
    return np.ones_like(z, dtype=float)


def truncated_stable_density(z, index=1.5):
    return np.abs(z) ** (-1.0 - index)


def tempered_density(z, rate=1.0):
    return np.exp(-rate * np.abs(z)) / np.abs(z)


DENSITIES = {
    'uniform': uniform_density,
    'truncated_stable': truncated_stable_density,
    'tempered': tempered_density,
}


def gauss_legendre(a, b, n):
    """Gauss-Legendre nodes and weights on ``[a, b]``."""
    knots, weights = np.polynomial.legendre.leggauss(n)
    return 0.5 * (b - a) * knots + 0.5 * (b + a), 0.5 * (b - a) * weights


def _readonly(values):
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class LevyMeasure:
    """A jump-size measure ν on ℝ∖{0}.

    Use :meth:`from_atoms` or :meth:`from_density` rather than the raw
    constructor.
    """

    name: str
    kind: str
    nodes: np.ndarray
    weights: np.ndarray
    lower: float = 0.0
    upper: float = np.inf
    sides: str = 'both'
    density: object = None
    density_params: tuple = ()
    scale: float = 1.0
    nodes_per_side: int = DEFAULT_NODES_PER_SIDE
    _moments: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, 'nodes', _readonly(self.nodes))
        object.__setattr__(self, 'weights', _readonly(self.weights))
        if self.nodes.shape != self.weights.shape or self.nodes.ndim != 1 or self.nodes.size == 0:
            raise InvalidMeasureError('nodes and weights must be matching non-empty 1-d arrays')
        if np.any(self.nodes == 0.0):
            raise InvalidMeasureError('atom at z=0 forbidden')
        if not np.all(np.isfinite(self.nodes)) or not np.all(np.isfinite(self.weights)):
            raise InvalidMeasureError('measure support and weights must be finite')
        if np.any(self.weights <= 0.0):
            raise InvalidMeasureError('weights must be strictly positive')
        if not self.moment(2) > 0.0:
            raise InvalidMeasureError('second moment must be strictly positive')

    @classmethod
    def from_atoms(cls, atoms, name='atoms'):
        """Discrete measure ``Σ w_k δ_{z_k}`` from ``[(z_k, w_k), ...]``."""
        atoms = np.asarray(atoms, dtype=float)
        if atoms.ndim != 2 or atoms.shape[1] != 2:
            raise InvalidMeasureError('atoms must be a list of [z, w] pairs')
        if np.any(atoms[:, 0] == 0.0):
            raise InvalidMeasureError('atom at z=0 forbidden')
        return cls(name=name, kind=ATOMS, nodes=atoms[:, 0], weights=atoms[:, 1])

    @classmethod
    def from_density(cls, density, lower, upper, sides='both', scale=1.0,
                     nodes_per_side=DEFAULT_NODES_PER_SIDE, name=None, **params):
        """Density on ``[-upper, -lower] ∪ [lower, upper]`` (or one side of it).

        ``density`` is a name from :data:`DENSITIES` or a vectorized callable
        ``density(z, **params)``. Named densities keep the measure picklable.
        """
        if isinstance(density, str):
            if density not in DENSITIES:
                raise InvalidMeasureError(f'unknown density {density!r}; choose from {sorted(DENSITIES)}')
            name = name or density
            density = DENSITIES[density]
        if not 0.0 < lower < upper < np.inf:
            raise InvalidMeasureError('density support needs 0 < lower < upper < inf')
        if sides not in SIDES:
            raise InvalidMeasureError(f'sides must be one of {SIDES}')
        if scale <= 0.0:
            raise InvalidMeasureError('scale must be positive')
        params = tuple(sorted(params.items()))
        nodes, weights = _density_rule(density, params, scale, lower, upper, sides, nodes_per_side)
        return cls(
            name=name or 'density', kind=DENSITY, nodes=nodes, weights=weights,
            lower=float(lower), upper=float(upper), sides=sides, density=density,
            density_params=params, scale=float(scale), nodes_per_side=nodes_per_side,
        )

    # -- integrals -----------------------------------------------------

    def moment(self, p):
        """``∫ z^p ν(dz)`` for an integer ``p >= 1``."""
        if int(p) != p or p < 1:
            raise ValueError('moment order must be an integer >= 1')
        p = int(p)
        if p not in self._moments:
            self._moments[p] = float(np.sum(self.weights * self.nodes**p))
        return self._moments[p]

    @property
    def second_moment(self):
        return self.moment(2)

    @property
    def m2(self):
        return float(np.sqrt(self.moment(2)))

    def restricted(self, epsilon=0.0):
        if self.kind == DENSITY and epsilon > self.lower:
            if epsilon >= self.upper:
                return np.empty(0), np.empty(0)
            return _density_rule(self.density, self.density_params, self.scale, epsilon,
                                 self.upper, self.sides, self.nodes_per_side)
        keep = np.abs(self.nodes) >= epsilon
        return self.nodes[keep], self.weights[keep]

    def interval_rule(self, interval):
        """Nodes and weights of ν on a mark interval (``low``, ``high``, ``contains``)."""
        if self.kind == ATOMS:
            keep = interval.contains(self.nodes)
            return self.nodes[keep], self.weights[keep]
        pieces = []
        if self.sides in ('both', 'positive'):
            a, b = max(interval.low, self.lower), min(interval.high, self.upper)
            if a < b:
                pieces.append(_density_rule(self.density, self.density_params, self.scale, a, b,
                                            'positive', self.nodes_per_side))
        if self.sides in ('both', 'negative'):
            a, b = max(-interval.high, self.lower), min(-interval.low, self.upper)
            if a < b:
                pieces.append(_density_rule(self.density, self.density_params, self.scale, a, b,
                                            'negative', self.nodes_per_side))
        if not pieces:
            return np.empty(0), np.empty(0)
        return np.concatenate([p[0] for p in pieces]), np.concatenate([p[1] for p in pieces])

    def integrate(self, f, epsilon=0.0):
        """``∫_{|z|>=epsilon} f(z) ν(dz)`` for a vectorized ``f``."""
        nodes, weights = self.restricted(epsilon)
        if nodes.size == 0:
            return 0.0
        return float(np.sum(weights * np.asarray(f(nodes), dtype=float)))

    def mass(self, epsilon=0.0):
        return float(np.sum(self.restricted(epsilon)[1]))

    def drift_rate(self, epsilon=0.0):
        nodes, weights = self.restricted(epsilon)
        return float(np.sum(weights * nodes))

    def small_jump_variance(self, epsilon):
        nodes, weights = self.restricted(epsilon)
        return max(self.moment(2) - float(np.sum(weights * nodes**2)), 0.0)

    def psi(self, w):
        """Characteristic exponent ``Ψ(w) = ∫ (e^{iwz} - 1 - iwz) ν(dz)``."""
        w = np.asarray(w, dtype=float)
        wz = np.multiply.outer(w, self.nodes)
        values = (np.exp(1j * wz) - 1.0 - 1j * wz) @ self.weights
        return complex(values) if values.ndim == 0 else values

    def exponential_moment(self, epsilon, lam):
        """``∫_{|z|>=epsilon} exp(lam |z|) ν(dz)``."""
        if epsilon <= 0.0 or lam <= 0.0:
            raise ValueError('epsilon and lambda must be positive')
        return self.integrate(lambda z: np.exp(lam * np.abs(z)), epsilon)

    def check_exponential_moment(self, epsilon, lam):
        return bool(np.isfinite(self.exponential_moment(epsilon, lam)))

    def rho_inner(self, f, g):
        return float(np.sum(self.weights * self.nodes**2 * f(self.nodes) * g(self.nodes)))

    def nu_inner(self, f, g):
        return float(np.sum(self.weights * f(self.nodes) * g(self.nodes)))

    # -- sampling ------------------------------------------------------

    def sample_marks(self, rng, size, epsilon=0.0):
        """Draw ``size`` marks from ν restricted to ``{|z| >= epsilon}``, normalized."""
        if size == 0:
            return np.empty(0)
        if self.kind == ATOMS:
            nodes, weights = self.restricted(epsilon)
            return rng.choice(nodes, size=size, p=weights / weights.sum())
        return self._sample_density(rng, size, max(epsilon, self.lower))

    def _sample_density(self, rng, size, start):
        density = lambda z: self.scale * self.density(z, **dict(self.density_params))
        grid = np.linspace(start, self.upper, SAMPLER_GRID_POINTS)
        pieces = []
        if self.sides in ('both', 'positive'):
            pieces.append((grid, density(grid)))
        if self.sides in ('both', 'negative'):
            pieces.append((-grid[::-1], density(-grid[::-1])))
        cdfs = [cumulative_trapezoid(values, points, initial=0.0) for points, values in pieces]
        side_mass = np.array([cdf[-1] for cdf in cdfs])
        side = rng.choice(len(pieces), size=size, p=side_mass / side_mass.sum())
        u = rng.random(size)
        marks = np.empty(size)
        for k, ((points, _), cdf) in enumerate(zip(pieces, cdfs)):
            chosen = side == k
            marks[chosen] = np.interp(u[chosen] * cdf[-1], cdf, points)
        return marks


def _density_rule(density, params, scale, lower, upper, sides, nodes_per_side):
    knots, gl_weights = gauss_legendre(lower, upper, nodes_per_side)
    nodes, weights = [], []
    if sides in ('both', 'negative'):
        nodes.append(-knots[::-1])
        weights.append(gl_weights[::-1] * scale * density(-knots[::-1], **dict(params)))
    if sides in ('both', 'positive'):
        nodes.append(knots)
        weights.append(gl_weights * scale * density(knots, **dict(params)))
    return np.concatenate(nodes), np.concatenate(weights)


@dataclass(frozen=True)
class MomentTable:
    measure: LevyMeasure
    moments: tuple
    M: float
    m2: float

    @classmethod
    def from_measure(cls, measure, p_max=DEFAULT_MOMENT_ORDER):
        moments = tuple(measure.moment(p) for p in range(1, p_max + 1))
        return cls(measure=measure, moments=moments, M=measure.moment(2), m2=measure.m2)

    def __getitem__(self, p):
        return self.moments[p - 1]
