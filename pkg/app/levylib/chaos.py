"""Chaos expansions over the θ basis.

A multi-index ``α`` has finitely many nonzero entries ``α_k`` at positions
``k >= 1``; position ``k`` stands for ``θ_k = e_i ⊗ p_j`` with
``(i, j) = κ⁻¹(k)``. ``K_α`` is the iterated compensated integral of the
symmetrized tensor ``θ^{⊗α}``; ``E[K_α K_β] = δ_{αβ} α!``.
"""
import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import partial

import numpy as np

from .basis import ThetaFunction, kappa_inverse
from .exceptions import IncompatibleIndexError, UnsupportedOrderError
from .montecarlo import SampleStats, run_samples
from .settings import COMPENSATOR_NODES_PER_UNIT, DEFAULT_WORKERS, MAX_ITERATED_ORDER, N_STANDARD_ERRORS
from .sheet_sim import compensator_rule, simulate_levy_sheet

logger = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class MultiIndex:
    """Sparse multi-index: strictly increasing ``(position, value)`` pairs, values >= 1."""

    entries: tuple = ()

    def __post_init__(self):
        entries = tuple((int(k), int(v)) for k, v in self.entries)
        positions = [k for k, _ in entries]
        if any(k < 1 for k in positions) or any(v < 1 for _, v in entries):
            raise ValueError('multi-index entries need position >= 1 and value >= 1')
        if positions != sorted(set(positions)):
            raise ValueError('multi-index positions must be strictly increasing')
        object.__setattr__(self, 'entries', entries)

    @classmethod
    def zero(cls):
        return cls()

    @classmethod
    def unit(cls, k):
        return cls(((k, 1),))

    @classmethod
    def from_positions(cls, positions):
        """Build from a multiset of positions, e.g. ``[1, 1, 4]`` → ``2ε⁽¹⁾ + ε⁽⁴⁾``."""
        counts = {}
        for k in positions:
            counts[k] = counts.get(k, 0) + 1
        return cls(tuple(sorted(counts.items())))

    @classmethod
    def parse(cls, label):
        """Inverse of :meth:`__str__`."""
        label = label.strip()
        if label == '0':
            return cls()
        entries = []
        for part in label.split('*'):
            position, _, power = part.strip().lstrip('e').partition('^')
            entries.append((int(position), int(power or 1)))
        return cls(tuple(sorted(entries)))

    def __str__(self):
        if not self.entries:
            return '0'
        return '*'.join(f'e{k}' if v == 1 else f'e{k}^{v}' for k, v in self.entries)

    @property
    def order(self):
        return sum(v for _, v in self.entries)

    @property
    def index(self):
        return self.entries[-1][0] if self.entries else 0

    @property
    def positions(self):
        return [k for k, v in self.entries for _ in range(v)]

    def __add__(self, other):
        return MultiIndex.from_positions(self.positions + other.positions)


def alpha_factorial(alpha):
    return math.prod(math.factorial(v) for _, v in alpha.entries)


def two_n_pow(alpha, k):
    """``(2ℕ)^{kα} = Π (2j)^{k α_j}``."""
    return math.prod((2.0 * j) ** (k * v) for j, v in alpha.entries)


def multi_indices_up_to(positions, max_order):
    found = [MultiIndex.zero()]
    for order in range(1, max_order + 1):
        found.extend(MultiIndex.from_positions(c) for c in itertools.combinations_with_replacement(positions, order))
    return found


def check_compatible(alpha, system, ordering=None):
    for k in alpha.positions:
        i, j = kappa_inverse(k)
        if j > system.J_nu:
            raise IncompatibleIndexError(
                f'{alpha} uses position {k} = kappa({i}, {j}); the measure supports {system.J_nu} polynomials')
        if ordering is not None and i > ordering.count:
            raise IncompatibleIndexError(f'{alpha} uses e_{i}; the ordering stops at {ordering.count}')


@dataclass(eq=False)
class ChaosCoefficients:
    """Sparse map ``α → c_α`` of ``F = Σ c_α K_α``."""

    terms: dict = field(default_factory=dict)
    system: object = None
    ordering: object = None

    def __post_init__(self):
        self.terms = {alpha: float(c) for alpha, c in self.terms.items() if c != 0.0}
        if self.system is not None:
            for alpha in self.terms:
                check_compatible(alpha, self.system)

    @property
    def J_nu(self):
        return self.system.J_nu if self.system is not None else None

    def __getitem__(self, alpha):
        return self.terms.get(alpha, 0.0)

    def __len__(self):
        return len(self.terms)

    def items(self):
        return sorted(self.terms.items(), key=lambda item: (item[0].index, item[0]))

    def allclose(self, other, rtol=1e-12, atol=1e-14):
        keys = set(self.terms) | set(other.terms)
        return all(math.isclose(self[a], other[a], rel_tol=rtol, abs_tol=atol) for a in keys)

    def truncated(self, max_index):
        return ChaosCoefficients({a: c for a, c in self.terms.items() if a.index <= max_index},
                                 self.system, self.ordering)


def _ordered_sum(values):
    return math.fsum(sorted(values, key=abs, reverse=True))


def hida_norm_k(F, k):
    """``Σ c_α² α! (2ℕ)^{kα}``, the squared ``‖F‖_k`` of the test-function space."""
    if k < 0:
        raise ValueError('k must be >= 0')
    return _ordered_sum(c * c * alpha_factorial(a) * two_n_pow(a, k) for a, c in F.terms.items())


def hida_norm_neg_q(F, q):
    """``Σ c_α² α! (2ℕ)^{-qα}``, the squared ``‖F‖_{-q}`` of the distribution space."""
    if q < 0:
        raise ValueError('q must be >= 0')
    return _ordered_sum(c * c * alpha_factorial(a) * two_n_pow(a, -q) for a, c in F.terms.items())


def action(F, phi):
    """``⟨F, φ⟩ = Σ F_α φ_α α!``."""
    common = set(F.terms) & set(phi.terms)
    return _ordered_sum(F[a] * phi[a] * alpha_factorial(a) for a in common)


def generalized_expectation(F):
    return F[MultiIndex.zero()]


@dataclass(frozen=True)
class HidaTail:
    index: int
    partial_sum: float
    relative_tail: float


def hida_partial_sums(F, q):
    """Cumulative ``‖·‖²_{-q}`` over ``Index(α) <= J``, one row per distinct ``J``."""
    total = hida_norm_neg_q(F, q)
    rows, running = [], []
    items = F.items()
    for position, group in itertools.groupby(items, key=lambda item: item[0].index):
        running.extend(c * c * alpha_factorial(a) * two_n_pow(a, -q) for a, c in group)
        partial_sum = _ordered_sum(running)
        tail = (total - partial_sum) / total if total > 0.0 else 0.0
        rows.append(HidaTail(position, partial_sum, max(tail, 0.0)))
    return rows


# -- iterated integrals --------------------------------------------------


@dataclass(frozen=True, eq=False)
class SymmetricProduct:
    """``f_1 ⊗̂ ... ⊗̂ f_m``: the average over slot permutations of the tensor product."""

    factors: tuple

    @property
    def order(self):
        return len(self.factors)

    def __call__(self, *args):
        pairs = list(zip(args[0::2], args[1::2]))
        perms = list(itertools.permutations(range(self.order)))
        total = 0.0
        for perm in perms:
            term = 1.0
            for slot, k in enumerate(perm):
                term = term * self.factors[k](*pairs[slot])
            total = total + term
        return total / len(perms)


def _distinct_sum(values):
    m = len(values)
    if m == 0:
        return 1.0
    s = lambda *ks: float(np.sum(np.prod([values[k] for k in ks], axis=0)))
    if m == 1:
        return s(0)
    if m == 2:
        return s(0) * s(1) - s(0, 1)
    return (s(0) * s(1) * s(2) - s(0, 1) * s(2) - s(0, 2) * s(1) - s(1, 2) * s(0)
            + 2.0 * s(0, 1, 2))


def _product_integral(jump_values, compensators):
    """``I_m(f_1 ⊗ ... ⊗ f_m)`` from per-factor jump values and compensator integrals."""
    m = len(jump_values)
    total = 0.0
    for size in range(m + 1):
        for compensated in itertools.combinations(range(m), size):
            kept = [jump_values[k] for k in range(m) if k not in compensated]
            total += (-1) ** size * math.prod(compensators[k] for k in compensated) * _distinct_sum(kept)
    return total


def _generic_integral(path, g, m, rule):
    jumps = (path.locations, path.marks)
    comp = (rule.points, rule.marks)
    total = 0.0
    for size in range(m + 1):
        if size < m and path.n_jumps < m - size:
            continue
        if size > 0 and rule.weights.size == 0:
            continue
        sizes = [path.n_jumps] * (m - size) + [rule.weights.size] * size
        term = 0.0
        for first in range(sizes[0]):
            rest = np.indices(sizes[1:]).reshape(m - 1, -1) if m > 1 else np.empty((0, 1), dtype=int)
            idx = np.vstack([np.full(rest.shape[1], first), rest])
            keep = np.ones(idx.shape[1], dtype=bool)
            for a, b in itertools.combinations(range(m - size), 2):
                keep &= idx[a] != idx[b]
            idx = idx[:, keep]
            if idx.shape[1] == 0:
                continue
            args, weights = [], np.ones(idx.shape[1])
            for slot in range(m):
                source = jumps if slot < m - size else comp
                args.extend((source[0][idx[slot]], source[1][idx[slot]]))
                if slot >= m - size:
                    weights = weights * rule.weights[idx[slot]]
            term += float(np.sum(weights * g(*args)))
        total += math.comb(m, size) * (-1) ** size * term
    return total


def iterated_integral(path, g, m, support=None, nodes_per_unit=COMPENSATOR_NODES_PER_UNIT):
    """``I_m(g)`` on one finite-activity realization, ``m <= 3``.

    ``g(x_1, z_1, ..., x_m, z_m)`` is symmetric and vectorized over rows.
    Sums run over ordered tuples of distinct jumps, and every subset of
    slots is also integrated against the compensator ``dλ × ν`` with sign
    ``(-1)^{|subset|}``. The compensator uses the same rule as
    :func:`compensated_integral`, so product formulas hold exactly per path.
    A :class:`SymmetricProduct` is expanded factor by factor instead.
    """
    if not 1 <= m <= MAX_ITERATED_ORDER:
        raise UnsupportedOrderError(f'iterated integrals are implemented for m <= {MAX_ITERATED_ORDER}, got {m}')
    rule = compensator_rule(support or path.domain, path.measure, path.epsilon, nodes_per_unit)
    if isinstance(g, SymmetricProduct):
        if g.order != m:
            raise ValueError(f'product of {g.order} factors passed with m={m}')
        jump_values = [np.asarray(f(path.locations, path.marks), dtype=float) for f in g.factors]
        compensators = [rule.integrate(f) for f in g.factors]
        return _product_integral(jump_values, compensators)
    return _generic_integral(path, g, m, rule)


def _theta_factors(alpha, system, ordering):
    check_compatible(alpha, system, ordering)
    if alpha.order > MAX_ITERATED_ORDER:
        raise UnsupportedOrderError(f'K_alpha needs |alpha| <= {MAX_ITERATED_ORDER}, got {alpha.order}')
    return tuple(ThetaFunction(system, ordering, k) for k in alpha.positions)


def k_alpha_sample(path, alpha, system, ordering):
    """``K_α = I_{|α|}(θ^{⊗̂α})`` on ``path``; 1 for the zero index."""
    factors = _theta_factors(alpha, system, ordering)
    if not factors:
        return 1.0
    return iterated_integral(path, SymmetricProduct(factors), alpha.order)


def chaos_sample_vector(path, alphas, system, ordering):
    """``[K_α for α in alphas]`` sharing one evaluation of each θ on the path."""
    for alpha in alphas:
        _theta_factors(alpha, system, ordering)
    rule = compensator_rule(path.domain, path.measure, path.epsilon)
    cache = {}
    for k in sorted({k for alpha in alphas for k in alpha.positions}):
        theta = ThetaFunction(system, ordering, k)
        cache[k] = (np.asarray(theta(path.locations, path.marks), dtype=float), rule.integrate(theta))
    values = []
    for alpha in alphas:
        positions = alpha.positions
        values.append(_product_integral([cache[k][0] for k in positions], [cache[k][1] for k in positions])
                      if positions else 1.0)
    return np.array(values)


# -- Monte-Carlo estimates -----------------------------------------------


@dataclass(frozen=True)
class CoefficientEstimate:
    value: float
    se: float


def estimate_coefficient(f_samples, k_samples, alpha):
    """``c_α ≈ mean(F K_α) / α!`` from samples drawn on shared seeds."""
    products = np.asarray(f_samples, dtype=float) * np.asarray(k_samples, dtype=float)
    scale = alpha_factorial(alpha)
    se = float(np.std(products, ddof=1) / math.sqrt(products.size)) if products.size > 1 else 0.0
    return CoefficientEstimate(float(products.mean()) / scale, se / scale)


def _chaos_sample(measure, domain, epsilon, alphas, system, ordering, seed):
    path = simulate_levy_sheet(measure, domain, epsilon, seed)
    return chaos_sample_vector(path, alphas, system, ordering)


def sample_chaos(measure, domain, alphas, system, ordering, n_seeds, base_seed=0, epsilon=0.0,
                 workers=DEFAULT_WORKERS):
    """Matrix of ``K_α`` samples, one row per seed."""
    sample = partial(_chaos_sample, measure, domain, epsilon, tuple(alphas), system, ordering)
    return run_samples(sample, n_seeds, base_seed, workers)


@dataclass(frozen=True)
class OrthogonalityReport:
    alphas: tuple
    gram: np.ndarray
    se: np.ndarray
    target: np.ndarray
    n_se: float

    @property
    def deviation(self):
        return np.abs(self.gram - self.target)

    @property
    def within(self):
        return bool(np.all(self.deviation <= self.n_se * self.se))


def orthogonality_check(samples, alphas, n_se=N_STANDARD_ERRORS):
    """``E[K_α K_β]`` estimates against ``δ_{αβ} α!``."""
    samples = np.asarray(samples, dtype=float)
    products = samples[:, :, None] * samples[:, None, :]
    stats = SampleStats.from_samples(products)
    target = np.diag([float(alpha_factorial(a)) for a in alphas])
    logger.debug('orthogonality over %d indices and %d seeds', len(alphas), samples.shape[0])
    return OrthogonalityReport(tuple(alphas), stats.mean, stats.se, target, n_se)
