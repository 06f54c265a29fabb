"""scripts/cli.py

Entry point for CLI.
"""

from typing import Any, Mapping, Tuple, Type
import logging
import sys

import click

from mutdet.scripts.click_types import TOMLFile
from mutdet import exceptions, get_settings, update_settings, logs, __version__

logger = logging.getLogger(__name__)

EXIT_CODES: Tuple[Tuple[Tuple[Type[Exception], ...], int], ...] = (
    ((exceptions.InvalidArgumentsError, exceptions.ConfigurationError), 2),
    ((exceptions.DatasetError, exceptions.LabelStoreError, exceptions.EmptyLabelError,
      exceptions.DegenerateInputError, exceptions.InsufficientDataError,
      exceptions.CheckpointError, exceptions.MetricsParseError), 3),
    ((exceptions.NumericalFailureError,), 4),
)
HANDLED_ERRORS = tuple(t for exc_types, _ in EXIT_CODES for t in exc_types)


def exit_code(exc: Exception) -> int:
    """Process exit code of a library error; 1 for anything unexpected"""
    for exc_types, code in EXIT_CODES:
        if isinstance(exc, exc_types):
            return code
    return 1


class MutDetGroup(click.Group):
    """Command group that turns known library errors into exit codes"""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except HANDLED_ERRORS as exc:
            logger.error('%s: %s', type(exc).__name__, exc)
            ctx.exit(exit_code(exc))


@click.group('mutdet', cls=MutDetGroup, invoke_without_command=True)
@click.option('-c', '--config', type=TOMLFile(), default=None,
              help='Update global settings from this TOML file.')
@click.option('--loglevel', help='Set level for log messages', default=None,
              type=click.Choice(['debug', 'info', 'warning', 'error', 'critical']))
@click.version_option(version=__version__)
@click.pass_context
def cli(ctx: click.Context,
        config: Mapping[str, Any] = None,
        loglevel: str = None) -> None:
    """The command line interface of the MutDet pre-training harness.

    All flags must be passed before specifying a subcommand.

    Example:

        $ mutdet -c settings.toml --loglevel info gen-data --count 32 --out data/

    """
    if ctx.invoked_subcommand is None:
        click.echo(ctx.get_help())

    # update settings from config file
    if config is not None:
        update_settings(**config)

    # setup logging
    settings = get_settings()

    if loglevel is None:
        loglevel = settings.LOGLEVEL

    logs.set_logger(loglevel, catch_warnings=True)


def entrypoint() -> None:
    try:
        cli(obj={})
    except Exception:
        logger.exception('Uncaught exception!', exc_info=True)
        sys.exit(1)


from mutdet.scripts.gen_data import gen_data
cli.add_command(gen_data)

from mutdet.scripts.prepare_labels import prepare_labels
cli.add_command(prepare_labels)

from mutdet.scripts.pretrain import pretrain
cli.add_command(pretrain)

from mutdet.scripts.eval_alignment import eval_alignment
cli.add_command(eval_alignment)

from mutdet.scripts.plot_losses import plot_losses
cli.add_command(plot_losses)


if __name__ == '__main__':
    entrypoint()
