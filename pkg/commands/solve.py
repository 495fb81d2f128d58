"""
Solver Commands
One click command per model problem; each writes the sampled field as CSV.
"""

import logging
from pathlib import Path
from typing import Iterable, Optional

import click

from utils.errors import ConfigError
from utils.run_config import RunConfig, default_config, parse_config, with_overrides

logger = logging.getLogger(__name__)


def run_options(func):
    """Options shared by every command that runs a configured problem"""
    options = [
        click.option('--config', 'config_path', type=click.Path(exists=True, dir_okay=False),
                     help="Run file of `key = value` lines overriding the defaults (see default-config)."),
        click.option('--out', type=click.Path(dir_okay=False), help="CSV output path; stdout when omitted."),
        click.option('--override', 'overrides', multiple=True, metavar='KEY=VALUE',
                     help="Set one configuration key; repeatable."),
        click.option('--tol', type=float, help="Solver tolerance."),
        click.option('--truncation', type=int, help="Retained residue terms (strip)."),
        click.option('--nodes', type=int, help="Starting quadrature node count."),
        click.option('--report', type=click.Path(dir_okay=False), help="Path for the JSON diagnostics report."),
    ]
    for option in reversed(options):
        func = option(func)
    return func


def load_run(problem: Optional[str], config_path: Optional[str] = None, overrides: Iterable[str] = (),
             target: Optional[str] = None, **controls) -> RunConfig:
    """Run file (or defaults) for a problem with command-line overrides applied last; problem None takes the file's"""
    if config_path:
        run = parse_config(Path(config_path).read_text())
        if problem is not None and run.problem != problem:
            raise ConfigError(f"run file {config_path} is for '{run.problem}', not '{problem}'")
    else:
        run = default_config(problem, target)
    changes = [f"target={target}"] if target else []
    changes += list(overrides)
    changes += [f"{key}={value}" for key, value in controls.items() if value is not None]
    return with_overrides(run, changes) if changes else run


def emit(runner, run: RunConfig, result):
    """Write the CSV table, the notes and, when asked, the diagnostics report"""
    table = result.to_csv()
    if run.out:
        Path(run.out).write_text(table)
        logger.info(f"Wrote {len(result.rows)} rows to {run.out}")
        for note in result.notes:
            click.echo(note)
    else:
        click.echo(table, nl=False)
        for note in result.notes:
            click.echo(note, err=True)
    if run.report:
        Path(run.report).write_text(runner.store.export_data(result.run_id))
        logger.info(f"Wrote diagnostics of {result.run_id} to {run.report}")


def execute(ctx: click.Context, problem: str, **options):
    runner = ctx.obj['runner']
    run = load_run(problem, **options)
    emit(runner, run, runner.run(run))


@click.command('heat-rod')
@run_options
@click.pass_context
def heat_rod(ctx, **options):
    """Two-part rod by the generalized Poisson formulas; CSV columns x,t,u."""
    execute(ctx, 'heat-rod', **options)


@click.command('heat-rod-n')
@run_options
@click.pass_context
def heat_rod_n(ctx, **options):
    """Rod with several breakpoints by Talbot inversion; CSV columns x,t,u."""
    execute(ctx, 'heat-rod-n', **options)


@click.command('aw-conv')
@run_options
@click.pass_context
def aw_conv(ctx, **options):
    """Convolution system on the half-line; CSV columns x,u1,u2."""
    execute(ctx, 'aw-conv', **options)


@click.command('wedge')
@run_options
@click.pass_context
def wedge(ctx, **options):
    """Mixed Laplace problem in a wedge; CSV columns r,theta,u and the T_inf line."""
    execute(ctx, 'wedge', **options)


@click.command('strip')
@run_options
@click.pass_context
def strip(ctx, **options):
    """Helmholtz strip with a loaded slit; CSV columns x,y,re_u,im_u."""
    execute(ctx, 'strip', **options)


COMMANDS = [heat_rod, heat_rod_n, aw_conv, wedge, strip]
