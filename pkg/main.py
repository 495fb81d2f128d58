"""
Solver Command-Line Entry Point
Configures logging and runs the click command group.
"""

import logging
import sys

import click

import config
from commands.check import COMMANDS as CHECK_COMMANDS
from commands.solve import COMMANDS as SOLVE_COMMANDS
from runner import SolverRunner
from utils.errors import SolverError

logger = logging.getLogger(__name__)


def setup_logging(level: str = config.LOG_LEVEL):
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO),
        format=config.LOG_FORMAT,
        handlers=[
            logging.FileHandler(config.LOG_FILE),
            logging.StreamHandler()
        ]
    )


class SolverGroup(click.Group):
    """Command group mapping solver errors to `error: <category>: <message>` and their exit codes"""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except SolverError as e:
            logger.error(f"Command failed ({e.category}): {e}")
            click.echo(f"error: {e.category}: {e}", err=True)
            ctx.exit(e.exit_code)


@click.group(cls=SolverGroup)
@click.pass_context
def cli(ctx):
    """Semi-analytic Wiener-Hopf solvers with brute-force oracles."""
    ctx.ensure_object(dict)
    ctx.obj.setdefault('runner', SolverRunner())


for command in SOLVE_COMMANDS + CHECK_COMMANDS:
    cli.add_command(command)


def main():
    setup_logging()
    try:
        cli(obj={})
    except KeyboardInterrupt:
        logger.info("Run interrupted by user")
        sys.exit(130)


if __name__ == '__main__':
    main()
