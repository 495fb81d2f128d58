"""
Check Commands
Oracle runs, the acceptance self-test, run-file dispatch and default run files.
"""

import logging
from pathlib import Path

import click

from commands.solve import emit, execute, load_run, run_options
from config import EXIT_CODES, PROBLEMS
from utils.run_config import SOLVER_PROBLEMS, default_config, format_config

logger = logging.getLogger(__name__)


def print_table(table):
    """Pass/fail table of the acceptance checks"""
    width = max(len(row['name']) for row in table) if table else 0
    for row in table:
        value = f"{row['value']:.3e}" if row['value'] is not None else row['error']
        status = 'PASS' if row['passed'] else 'FAIL'
        click.echo(f"{row['name']:<{width}}  {value:>12}  < {row['limit']:.0e}  {status}")
    failed = sum(not row['passed'] for row in table)
    click.echo(f"{len(table) - failed}/{len(table)} checks passed")
    return failed


def run_selftest(ctx: click.Context, slow: bool, report=None):
    runner = ctx.obj['runner']
    failed = print_table(runner.selftest(slow=slow))
    if report:
        Path(report).write_text(runner.store.export_data())
    if failed:
        ctx.exit(EXIT_CODES['internal'])


@click.command('oracle')
@click.option('--problem', 'target', type=click.Choice(SOLVER_PROBLEMS), default=None,
              help="Problem whose brute-force oracle runs; read from the run file when omitted.")
@run_options
@click.pass_context
def oracle(ctx, target, **options):
    """Brute-force oracle for a problem, in the same CSV schema as its solver."""
    execute(ctx, 'oracle', target=target, **options)


@click.command('selftest')
@click.option('--slow/--no-slow', default=False, help="Include the oracle comparisons.")
@click.option('--report', type=click.Path(dir_okay=False), help="Path for the JSON diagnostics report.")
@click.pass_context
def selftest(ctx, slow, report):
    """Run the acceptance suite and print a pass/fail table."""
    run_selftest(ctx, slow, report)


@click.command('run')
@run_options
@click.pass_context
def run(ctx, config_path, **options):
    """Run the problem named by the `problem` key of a run file."""
    if not config_path:
        raise click.UsageError("run needs --config")
    configured = load_run(None, config_path, **options)
    if configured.problem == 'selftest':
        run_selftest(ctx, configured['slow'], configured.report or None)
        return
    runner = ctx.obj['runner']
    emit(runner, configured, runner.run(configured))


@click.command('default-config')
@click.argument('problem', type=click.Choice(PROBLEMS))
@click.option('--target', type=click.Choice(SOLVER_PROBLEMS), default=None, help="Oracle target problem.")
def default_config_command(problem, target):
    """Print the default run file for a problem."""
    click.echo(format_config(default_config(problem, target)), nl=False)


COMMANDS = [oracle, selftest, run, default_config_command]
