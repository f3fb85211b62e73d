import logging
import sys
from pathlib import Path

import click

from app.levylib import settings
from app.levylib.exceptions import ConfigError, LevyLibError
from app.levylib.forms import parse_config
from app.levylib.views import run


def handle_run_error(e):
    """Report a failed run on stderr and exit: 2 for config problems, 1 otherwise."""
    if isinstance(e, ConfigError):
        where = f' (line {e.line})' if e.line is not None else ''
        click.echo(f'Error: invalid configuration{where}.', err=True)
        for key, message in e.errors:
            click.echo(f'- {key}: {message}', err=True)
        sys.exit(2)
    if isinstance(e, LevyLibError):
        click.echo(f'Error: {type(e).__name__}: {e}', err=True)
    elif isinstance(e, OSError):
        click.echo(f'Error: could not read or write {e.filename or "a file"}: {e.strerror or e}', err=True)
    else:
        click.echo(f'Unexpected error: {type(e).__name__}: {e}', err=True)
    sys.exit(1)


def execute(ctx, command):
    """Resolve the config for ``command`` and run it."""
    options = ctx.obj
    try:
        text = Path(options['config']).read_text(encoding='utf-8') if options['config'] else ''
        overrides = {'run': {'command': command}}
        for key in ('seed', 'workers', 'n_samples'):
            if options[key] is not None:
                overrides['run'][key] = options[key]
        if options['out'] is not None:
            overrides['run']['out'] = options['out']
        config = parse_config(text, overrides, options['preset'])
        out_dir = Path(config.out) if config.out else settings.OUTPUT_DIR
        for path in run(config, out_dir):
            click.echo(f'wrote {path}')
    except Exception as e:
        handle_run_error(e)


@click.group()
@click.option('--config', 'config', type=click.Path(exists=True, dir_okay=False), help='TOML config file.')
@click.option('--out', help=f'Output directory (default ${settings.OUTPUT_DIR_ENV} or ./output).')
@click.option('--seed', type=click.IntRange(0, 2**64 - 1), help='Base seed of every Monte-Carlo stream.')
@click.option('--workers', type=click.IntRange(min=1), help='Worker processes for Monte-Carlo sampling.')
@click.option('--n-samples', 'n_samples', type=click.IntRange(min=2), help='Monte-Carlo sample count.')
@click.option('--preset', type=click.Choice(sorted(settings.PRESETS)), help='Named scenario merged under the config.')
@click.option('-v', '--verbose', count=True, help='-v for INFO, -vv for DEBUG logging.')
@click.pass_context
def cli(ctx, config, out, seed, workers, n_samples, preset, verbose):
    """Lévy white noise toolkit: sheets, chaos expansions and fractional heat."""
    level = {0: logging.WARNING, 1: logging.INFO}.get(verbose, logging.DEBUG)
    logging.basicConfig(level=level, format='%(levelname)s %(name)s: %(message)s', stream=sys.stderr)
    ctx.obj = {'config': config, 'out': out, 'seed': seed, 'workers': workers, 'n_samples': n_samples,
               'preset': preset}


@cli.command(name='simulate-sheet', help='Simulate a Lévy, Brownian or Lévy-Itô sheet on [domain].')
@click.pass_context
def simulate_sheet(ctx):
    execute(ctx, 'simulate-sheet')


@cli.command(help='Tabulate the Hermite basis, the polynomials p_j and the pairing kappa.')
@click.pass_context
def basis(ctx):
    execute(ctx, 'basis')


@cli.command(name='chaos-check', help='Monte-Carlo orthogonality of K_alpha and their Hida norms.')
@click.pass_context
def chaos_check(ctx):
    execute(ctx, 'chaos-check')


@cli.command(help='White noise expansions, the reduction identity and covariance convergence.')
@click.pass_context
def whitenoise(ctx):
    execute(ctx, 'whitenoise')


@cli.command(name='ml-eval', help='Evaluate the Mittag-Leffler function on a list of arguments.')
@click.pass_context
def ml_eval(ctx):
    execute(ctx, 'ml-eval')


@cli.command(name='solve-heat', help='Monte-Carlo solution of the fractional stochastic heat equation.')
@click.pass_context
def solve_heat(ctx):
    execute(ctx, 'solve-heat')


if __name__ == '__main__':
    cli()
