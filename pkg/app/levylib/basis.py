"""Deterministic function systems.

* Hermite polynomials ``h_n`` (probabilists' convention) and Hermite
  functions ``ξ_n`` (``n >= 1``), orthonormal in ``L²(ℝ)``.
* The tensor basis ``e_j = ξ_{β_1} ⊗ ... ⊗ ξ_{β_n}`` of ``L²(ℝⁿ)`` in graded
  lexicographic order of the labels ``β``.
* The polynomials ``p_j`` orthonormal in ``L²(ν)``, built from the
  ``L²(ρ)``-orthogonalized monomials ``η_j`` with ``ρ(dz) = z² ν(dz)``.
* The pairing ``κ(i, j)`` and the functions ``θ_{κ(i,j)}(x, z) = e_i(x) p_j(z)``.

Two index conventions coexist: Hermite-function labels start at 1, chaos
multi-indices (in :mod:`chaos`) have nonnegative entries.
"""
import itertools
import logging
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial import polynomial as P

from .exceptions import BasisRangeError, InvalidMeasureError
from .levy_measure import gauss_legendre
from .settings import (
    ANTIDERIVATIVE_NODES_PER_UNIT,
    DEFAULT_POLY_DEGREE,
    DEGENERACY_TOLERANCE,
    HERMITE_DIRECT_MAX_ORDER,
    HERMITE_MAX_ORDER,
)

logger = logging.getLogger(__name__)

PI_QUARTER = np.pi ** -0.25


def hermite_poly(n, x):
    """``h_n(x)`` by ``h_{n+1} = x h_n - n h_{n-1}``."""
    if n < 0:
        raise ValueError('Hermite polynomial degree must be >= 0')
    x = np.asarray(x, dtype=float)
    previous, current = np.zeros_like(x), np.ones_like(x)
    for k in range(n):
        previous, current = current, x * current - k * previous
    return current


def hermite_functions(max_order, x):
    """Rows ``ξ_1(x), ..., ξ_max_order(x)`` stacked along a new first axis.

    Uses the normalized recurrence
    ``ξ_{m+2} = sqrt(2/(m+1)) x ξ_{m+1} - sqrt(m/(m+1)) ξ_m``,
    which never forms a factorial.
    """
    if max_order > HERMITE_MAX_ORDER:
        raise BasisRangeError(f'Hermite order {max_order} above supported {HERMITE_MAX_ORDER}')
    x = np.asarray(x, dtype=float)
    table = np.empty((max(max_order, 0),) + x.shape)
    if max_order == 0:
        return table
    table[0] = PI_QUARTER * np.exp(-0.5 * x**2)
    if max_order > 1:
        table[1] = np.sqrt(2.0) * x * table[0]
    for m in range(1, max_order - 1):
        table[m + 1] = np.sqrt(2.0 / (m + 1)) * x * table[m] - np.sqrt(m / (m + 1)) * table[m - 1]
    return table


def hermite_function(n, x):
    if n < 1:
        raise BasisRangeError('Hermite functions are labelled from 1')
    return hermite_functions(n, x)[n - 1]


def hermite_function_direct(n, x):
    """``ξ_n`` straight from the factorial formula; reference use only."""
    if not 1 <= n <= HERMITE_DIRECT_MAX_ORDER:
        raise BasisRangeError(f'direct Hermite formula supports 1 <= n <= {HERMITE_DIRECT_MAX_ORDER}')
    x = np.asarray(x, dtype=float)
    scale = PI_QUARTER / math.sqrt(math.factorial(n - 1))
    return scale * np.exp(-0.5 * x**2) * hermite_poly(n - 1, np.sqrt(2.0) * x)


def composite_gauss_legendre(a, b, nodes_per_unit=ANTIDERIVATIVE_NODES_PER_UNIT, panel_width=1.0):
    panels = max(1, int(math.ceil(abs(b - a) / panel_width)))
    per_panel = max(2, int(round(nodes_per_unit * panel_width)))
    edges = np.linspace(a, b, panels + 1)
    pieces = [gauss_legendre(lo, hi, per_panel) for lo, hi in zip(edges[:-1], edges[1:])]
    return np.concatenate([p[0] for p in pieces]), np.concatenate([p[1] for p in pieces])


def hermite_function_integrals(max_order, upper, lower=0.0):
    """``∫_lower^upper ξ_m(s) ds`` for ``m = 1..max_order``."""
    if upper == lower:
        return np.zeros(max_order)
    nodes, weights = composite_gauss_legendre(lower, upper)
    return hermite_functions(max_order, nodes) @ weights


# -- the pairing κ -------------------------------------------------------


def kappa(i, j):
    """``κ(i, j) = j + (i + j - 2)(i + j - 1) / 2``."""
    if i < 1 or j < 1:
        raise ValueError('kappa is defined on positive integers')
    return j + (i + j - 2) * (i + j - 1) // 2


def kappa_inverse(k):
    """The unique ``(i, j)`` with ``kappa(i, j) == k``."""
    if k < 1:
        raise ValueError('kappa values start at 1')
    diagonal = (math.isqrt(8 * k + 1) - 1) // 2
    if diagonal * (diagonal + 1) // 2 < k:
        diagonal += 1
    j = k - diagonal * (diagonal - 1) // 2
    return diagonal + 1 - j, j


# -- tensor basis --------------------------------------------------------


@lru_cache(maxsize=32)
def _graded_labels(n, count):
    labels = []
    degree = n
    while len(labels) < count:
        level = []
        for cuts in itertools.combinations(range(1, degree), n - 1):
            bounds = (0,) + cuts + (degree,)
            level.append(tuple(b - a for a, b in zip(bounds[:-1], bounds[1:])))
        labels.extend(sorted(level))
        degree += 1
    return tuple(labels[:count])


@dataclass(frozen=True)
class TensorBasisOrdering:
    """The first ``count`` labels ``β⁽ʲ⁾ ∈ ℕⁿ`` in graded lexicographic order."""

    n: int
    count: int

    def __post_init__(self):
        if self.n < 1 or self.count < 1:
            raise ValueError('ordering needs n >= 1 and count >= 1')

    @classmethod
    def covering(cls, n, degree):
        """All labels with ``|β| <= degree``."""
        return cls(n, math.comb(degree, n))

    @property
    def labels(self):
        return _graded_labels(self.n, self.count)

    def label(self, j):
        if not 1 <= j <= self.count:
            raise BasisRangeError(f'basis index {j} outside 1..{self.count}')
        return self.labels[j - 1]

    def _points(self, x):
        x = np.asarray(x, dtype=float)
        if self.n == 1 and x.ndim <= 1:
            return x.reshape(-1, 1)
        points = np.atleast_2d(x)
        if points.shape[-1] != self.n:
            raise ValueError(f'points must have {self.n} coordinates')
        return points.reshape(-1, self.n)

    def evaluate(self, j, x):
        beta = self.label(j)
        x = np.asarray(x, dtype=float)
        points = self._points(x)
        value = np.ones(points.shape[0])
        for axis, order in enumerate(beta):
            value = value * hermite_function(order, points[:, axis])
        single = x.ndim == 0 or (self.n > 1 and x.ndim == 1)
        return float(value[0]) if single else value

    def evaluate_all(self, x, count=None):
        count = count or self.count
        labels = np.array([self.label(j) for j in range(1, count + 1)])
        points = self._points(x)
        top = int(labels.max())
        values = np.ones((count, points.shape[0]))
        for axis in range(self.n):
            table = hermite_functions(top, points[:, axis])
            values *= table[labels[:, axis] - 1]
        return values

    def box_integrals(self, lower, upper, count=None):
        """``∫_{[lower, upper]} e_j`` for ``j <= count`` (product of 1-d integrals)."""
        count = count or self.count
        labels = np.array([self.label(j) for j in range(1, count + 1)])
        lower = np.broadcast_to(np.asarray(lower, dtype=float), (self.n,))
        upper = np.broadcast_to(np.asarray(upper, dtype=float), (self.n,))
        top = int(labels.max())
        values = np.ones(count)
        for axis in range(self.n):
            table = hermite_function_integrals(top, upper[axis], lower[axis])
            values *= table[labels[:, axis] - 1]
        return values

    def integrals(self, x, count=None):
        return self.box_integrals(np.zeros(self.n), x, count)


def tensor_basis_eval(ordering, j, x):
    return ordering.evaluate(j, x)


# -- orthonormal polynomials in L²(ν) ------------------------------------


@dataclass(frozen=True, eq=False)
class OrthoPolySystem:
    """``η_0..η_{J-1}`` orthogonal in ``L²(ρ)`` and ``p_1..p_J`` orthonormal in ``L²(ν)``.

    Coefficients are in the monomial basis, lowest degree first.
    """

    measure: object
    eta_coeffs: tuple
    eta_norms: tuple
    p_coeffs: tuple
    m2: float
    requested_degree: int

    @property
    def J_nu(self):
        return len(self.p_coeffs)

    def p(self, j, z):
        if not 1 <= j <= self.J_nu:
            raise BasisRangeError(f'p_{j} unavailable: the measure supports {self.J_nu} polynomials')
        return P.polyval(np.asarray(z, dtype=float), self.p_coeffs[j - 1])

    def p_matrix(self, z, count=None):
        count = self.J_nu if count is None else count
        return np.array([self.p(j, z) for j in range(1, count + 1)])

    def eta(self, j, z):
        return P.polyval(np.asarray(z, dtype=float), self.eta_coeffs[j])

    def nu_gram(self):
        values = self.p_matrix(self.measure.nodes)
        return (values * self.measure.weights) @ values.T


def build_ortho_polys(measure, max_degree=DEFAULT_POLY_DEGREE):
    """Gram-Schmidt of ``1, z, z², ...`` in ``L²(ρ)`` followed by ``p_j = z η_{j-1} / ‖η_{j-1}‖``.

    Stops early when ``‖η_j‖ <= 1e-10 ‖z^j‖``, i.e. when ``L²(ρ)`` is finite
    dimensional (a measure with k atoms carries exactly k polynomials).
    Modified Gram-Schmidt with one reorthogonalization pass.
    """
    if max_degree < 1:
        raise ValueError('max_degree must be >= 1')
    if not measure.second_moment > 0.0:
        raise InvalidMeasureError('degenerate measure: zero second moment')
    z, w = measure.nodes, measure.weights
    rho = w * z**2

    def inner(u, v):
        return float(np.sum(rho * P.polyval(z, u) * P.polyval(z, v)))

    size = max_degree + 1
    etas, norms = [], []
    for degree in range(max_degree):
        v = np.zeros(size)
        v[degree] = 1.0
        monomial_norm = math.sqrt(inner(v, v))
        for _ in range(2):
            for eta, norm in zip(etas, norms):
                v = v - inner(v, eta) / norm**2 * eta
        norm = math.sqrt(max(inner(v, v), 0.0))
        if degree == 0:
            norm = measure.m2
        if norm <= DEGENERACY_TOLERANCE * monomial_norm:
            logger.debug('L2(rho) exhausted at degree %d for measure %s', degree, measure.name)
            break
        etas.append(v)
        norms.append(norm)
    p_coeffs = []
    for eta, norm in zip(etas, norms):
        p_coeffs.append(np.concatenate(([0.0], eta[:-1])) / norm)
    p_coeffs[0] = np.zeros(size)
    p_coeffs[0][1] = 1.0 / measure.m2
    if len(etas) < max_degree:
        logger.info('measure %s supports %d of %d requested polynomials', measure.name, len(etas), max_degree)
    return OrthoPolySystem(
        measure=measure,
        eta_coeffs=tuple(etas),
        eta_norms=tuple(norms),
        p_coeffs=tuple(p_coeffs),
        m2=measure.m2,
        requested_degree=max_degree,
    )


# -- θ functions ---------------------------------------------------------


def theta_eval(system, ordering, k, x, z):
    """``θ_k(x, z) = e_i(x) p_j(z)`` with ``(i, j) = κ⁻¹(k)``."""
    i, j = kappa_inverse(k)
    if j > system.J_nu:
        raise BasisRangeError(f'theta_{k} needs p_{j} but the measure supports only {system.J_nu} polynomials')
    return ordering.evaluate(i, x) * system.p(j, z)


@dataclass(frozen=True, eq=False)
class ThetaFunction:
    """Picklable callable ``θ_k`` on ``(points (m, n), marks (m,))``."""

    system: OrthoPolySystem
    ordering: TensorBasisOrdering
    k: int

    def __post_init__(self):
        i, j = kappa_inverse(self.k)
        if j > self.system.J_nu:
            raise BasisRangeError(f'theta_{self.k} needs p_{j}; the measure supports {self.system.J_nu}')
        self.ordering.label(i)

    def __call__(self, x, z):
        i, j = kappa_inverse(self.k)
        points = np.asarray(x, dtype=float).reshape(-1, self.ordering.n)
        return self.ordering.evaluate(i, points) * self.system.p(j, z)


def admissible_theta_indices(system, count):
    """The first ``count`` θ indices whose polynomial factor exists."""
    found, k = [], 1
    while len(found) < count:
        if kappa_inverse(k)[1] <= system.J_nu:
            found.append(k)
        k += 1
    return found
