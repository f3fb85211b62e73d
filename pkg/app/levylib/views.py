"""One handler per subcommand: a validated ``RunConfig`` in, CSV tables out."""
import itertools
import logging

import numpy as np

from .basis import TensorBasisOrdering, admissible_theta_indices, build_ortho_polys, kappa_inverse
from .chaos import (
    ChaosCoefficients,
    alpha_factorial,
    hida_norm_k,
    hida_norm_neg_q,
    hida_partial_sums,
    multi_indices_up_to,
    orthogonality_check,
    sample_chaos,
)
from .fracheat import HeatConfig, mittag_leffler, ml_regime, solve
from .levy_measure import LevyMeasure
from .montecarlo import sample_seed
from .serializers import Table, write_table
from .sheet_sim import Domain, simulate_brownian_sheet, simulate_levy_ito_sheet, simulate_levy_sheet, uniform_grid
from .whitenoise import (
    covariance_curve,
    levy_noise_expansion,
    pnrm_noise_expansion,
    pnrm_to_levy_reduction,
    sheet_expansion,
)

logger = logging.getLogger(__name__)

# orthogonality is a family of many comparisons
FAMILY_STANDARD_ERRORS = 4.0
BASIS_GRID = {1: np.linspace(-4.0, 4.0, 17), 2: np.linspace(-2.0, 2.0, 5)}


def build_measure(section):
    if 'atoms' in section:
        return LevyMeasure.from_atoms(section['atoms'], name=section.get('name', 'atoms'))
    params = {key: section[key] for key in ('index', 'rate') if key in section}
    return LevyMeasure.from_density(
        section['density'], section['lower'], section['upper'], sides=section['sides'],
        scale=section['scale'], nodes_per_side=section['nodes_per_side'], name=section.get('name'), **params,
    )


def build_system(config):
    section = config.section('measure')
    return build_ortho_polys(build_measure(section), section['max_degree'])


def build_domain(section):
    return Domain(tuple(section['lower']), tuple(section['upper']))


def _coords(prefix, n):
    return [f'{prefix}{axis}' for axis in range(1, n + 1)]


def _grid_points(grid):
    return np.array(list(itertools.product(*grid)))


# -- simulate-sheet ------------------------------------------------------


def _jump_table(path):
    table = Table('sheet_jumps', _coords('x', path.domain.n) + ['z'])
    for location, mark in zip(path.locations, path.marks):
        table.add(*location, mark)
    return table


def _value_table(path, points):
    table = Table('sheet_values', _coords('x', points.shape[1]) + ['value'])
    for point, value in zip(points, np.atleast_1d(path.value(points))):
        table.add(*point, value)
    return table


def _increment_table(brownian):
    table = Table('sheet_increments', _coords('lower', brownian.domain.n) + ['increment'])
    lowers = [nodes[:-1] for nodes in brownian.grid]
    for index in itertools.product(*(range(len(nodes)) for nodes in lowers)):
        table.add(*(nodes[i] for nodes, i in zip(lowers, index)), brownian.increments[index])
    return table


def simulate_sheet(config):
    sheet = config.section('sheet')
    domain = build_domain(config.section('domain'))
    grid = uniform_grid(domain, sheet['grid_cells'])
    points = _grid_points(grid)
    seed = sample_seed(config.seed, 0)
    if sheet['kind'] == 'brownian':
        path = simulate_brownian_sheet(domain, grid, seed)
        return [_value_table(path, points), _increment_table(path)]
    measure = build_measure(config.section('measure'))
    if sheet['kind'] == 'levy':
        path = simulate_levy_sheet(measure, domain, sheet['epsilon'], seed)
        logger.info('simulated %d jumps on %s', path.n_jumps, domain)
        return [_jump_table(path), _value_table(path, points)]
    path = simulate_levy_ito_sheet(measure, domain, grid, sheet['epsilon'], seed, sheet['drift'],
                                   sheet['brownian_scale'])
    return [_jump_table(path.jumps), _value_table(path, points), _increment_table(path.brownian)]


# -- basis ---------------------------------------------------------------


def basis(config):
    section = config.section('basis')
    system = build_system(config)
    n = section['n']
    ordering = TensorBasisOrdering(n, section['count'])

    theta = Table('basis_theta', ['k', 'i', 'j', 'beta', 'admissible'])
    for k in range(1, section['theta_count'] + 1):
        i, j = kappa_inverse(k)
        beta = '-'.join(str(b) for b in ordering.label(i)) if i <= ordering.count else ''
        theta.add(k, i, j, beta, j <= system.J_nu)

    points = _grid_points([BASIS_GRID[n]] * n)
    hermite = Table('basis_hermite', ['j', 'beta'] + _coords('x', n) + ['value'])
    values = ordering.evaluate_all(points)
    for j, row in enumerate(values, start=1):
        label = '-'.join(str(b) for b in ordering.label(j))
        for point, value in zip(points, row):
            hermite.add(j, label, *point, value)

    measure = system.measure
    zs = measure.nodes if measure.kind == 'atoms' else np.linspace(-measure.upper, measure.upper, 21)
    polys = Table('basis_polys', ['j', 'z', 'value'])
    for j, row in enumerate(system.p_matrix(zs), start=1):
        for z, value in zip(zs, row):
            polys.add(j, z, value)

    gram = Table('basis_gram', ['a', 'b', 'value'])
    for (a, b), value in np.ndenumerate(system.nu_gram()):
        gram.add(a + 1, b + 1, value)
    return [theta, hermite, polys, gram]


# -- chaos-check ---------------------------------------------------------


def chaos_check(config):
    section = config.section('chaos')
    system = build_system(config)
    n = section['n']
    thetas = admissible_theta_indices(system, section['n_theta'])
    ordering = TensorBasisOrdering(n, max(kappa_inverse(k)[0] for k in thetas))
    domain = Domain((-section['half_width'],) * n, (section['half_width'],) * n)
    alphas = multi_indices_up_to(thetas, section['max_order'])
    logger.info('orthogonality over %d multi-indices and %d seeds', len(alphas), config.n_samples)
    samples = sample_chaos(system.measure, domain, alphas, system, ordering, config.n_samples, config.seed,
                           section['epsilon'], config.workers)
    report = orthogonality_check(samples, alphas, FAMILY_STANDARD_ERRORS)

    matrix = Table('chaos_orthogonality', ['alpha', 'beta', 'estimate', 'se', 'target', 'within'])
    for (a, b), estimate in np.ndenumerate(report.gram):
        deviation = report.deviation[a, b]
        matrix.add(alphas[a], alphas[b], estimate, report.se[a, b], report.target[a, b],
                   deviation <= FAMILY_STANDARD_ERRORS * report.se[a, b])

    norms = Table('chaos_norms', ['alpha', 'order', 'index', 'alpha_factorial', 'norm_k1', 'norm_neg_q2',
                                  'second_moment'])
    for position, alpha in enumerate(alphas):
        single = ChaosCoefficients({alpha: 1.0}, system, ordering)
        norms.add(alpha, alpha.order, alpha.index, alpha_factorial(alpha), hida_norm_k(single, 1),
                  hida_norm_neg_q(single, 2), report.gram[position, position])
    return [matrix, norms]


# -- whitenoise ----------------------------------------------------------


def _coefficient_rows(table, kind, F):
    for alpha, c in F.items():
        i, j = kappa_inverse(alpha.positions[0])
        table.add(kind, alpha, i, j, c)


def whitenoise(config):
    section = config.section('whitenoise')
    system = build_system(config)
    x, J, j_prime = section['x'], section['J'], section['j_prime']
    levy_noise = levy_noise_expansion(system, x, J)

    coefficients = Table('whitenoise_coefficients', ['kind', 'alpha', 'i', 'j', 'coefficient'])
    _coefficient_rows(coefficients, 'sheet', sheet_expansion(system, x, J))
    _coefficient_rows(coefficients, 'levy_noise', levy_noise)
    _coefficient_rows(coefficients, 'pnrm_noise', pnrm_noise_expansion(system, x, section['z'], J, j_prime))

    reduced = pnrm_to_levy_reduction(system, x, J, j_prime)
    reduction = Table('whitenoise_reduction', ['alpha', 'levy_noise', 'reduction', 'difference'])
    for alpha in sorted(set(levy_noise.terms) | set(reduced.terms), key=lambda a: (a.index, a)):
        reduction.add(alpha, levy_noise[alpha], reduced[alpha], reduced[alpha] - levy_noise[alpha])

    hida = Table('whitenoise_hida', ['index', 'partial_sum', 'relative_tail'])
    for row in hida_partial_sums(levy_noise, section['q']):
        hida.add(row.index, row.partial_sum, row.relative_tail)

    curve = covariance_curve(system, x, x, section['Js'])
    covariance = Table('whitenoise_covariance', ['J', 'partial_sum', 'target', 'error'])
    for J_, partial_sum, error in zip(curve.Js, curve.partial_sums, curve.errors):
        covariance.add(J_, partial_sum, curve.target, error)
    logger.info('covariance at J=%d: %g (target %g, extrapolated %g)', curve.Js[-1], curve.partial_sums[-1],
                curve.target, curve.extrapolated)
    return [coefficients, reduction, hida, covariance]


# -- ml-eval -------------------------------------------------------------


def ml_eval(config):
    section = config.section('mittag_leffler')
    alpha, beta = section['alpha'], section['beta']
    table = Table('ml_values', ['alpha', 'beta', 'z', 'value', 'regime'])
    for z in section['z']:
        value = mittag_leffler(alpha, beta, z, section['tolerance'], section['max_terms'])
        table.add(alpha, beta, z, value, ml_regime(alpha, beta, z))
    return [table]


# -- solve-heat ----------------------------------------------------------


def heat_config(config):
    section = config.section('heat')
    measure = build_measure(config.section('measure')) if 'measure' in config.sections else None
    return HeatConfig(
        alpha=section['alpha'], lambda_diff=section['lambda_diff'], sigma=section['sigma'],
        gamma=section['gamma'], t=section['t'], x=tuple(tuple(p) for p in section['x']), measure=measure,
        d=section['d'], time_steps=section['time_steps'], space_step=section['space_step'],
        x_max=section.get('x_max'), frequency_cutoff=section['frequency_cutoff'],
        n_samples=config.n_samples, seed=config.seed, workers=config.workers,
    )


def solve_heat(config):
    heat = heat_config(config)
    stats = solve(heat)
    columns = ['I1', 'mean_I2', 'var_I2', 'mean_I3', 'var_I3', 'mean_Y', 'var_Y', 'se_Y', 'bias_estimate',
               'i1_tail']
    table = Table('heat_stats', _coords('x', heat.d) + columns + ['isometry_variance'])
    for row in stats.rows():
        table.add(*row['x'], *(row[c] for c in columns), stats.isometry_variance)
    return [table]


HANDLERS = {
    'simulate-sheet': simulate_sheet,
    'basis': basis,
    'chaos-check': chaos_check,
    'whitenoise': whitenoise,
    'ml-eval': ml_eval,
    'solve-heat': solve_heat,
}


def run(config, out_dir):
    """Dispatch ``config.command`` and write its tables; return the written paths."""
    tables = HANDLERS[config.command](config)
    return [write_table(out_dir, table, config) for table in tables]
