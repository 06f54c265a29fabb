"""scripts/plot_losses.py

Turn a metrics file into loss curves.
"""

from pathlib import Path
import logging

import click

from mutdet.scripts.click_types import PathlibPath

logger = logging.getLogger(__name__)


@click.command('plot-losses', short_help='Export per-iteration loss curves as CSV.')
@click.option('--metrics', required=True, help='Metrics file written by pretrain',
              type=PathlibPath(dir_okay=False, exists=True))
@click.option('-o', '--out', required=True, help='Path of the CSV file',
              type=PathlibPath(dir_okay=False, writable=True))
@click.option('--epoch-means', is_flag=True, default=False,
              help='Also print the mean of every component per epoch')
def plot_losses(metrics: Path, out: Path, epoch_means: bool = False) -> None:
    """Export the loss components of every iteration as CSV.

    Example:

        $ mutdet plot-losses --metrics run.metrics.jsonl --out run.losses.csv

    """
    from mutdet import curves

    records = curves.read_metrics(metrics)
    curves.write_loss_curves(records, out)
    logger.info('Wrote %d rows to %s', len(records), out)

    if epoch_means:
        columns = curves.loss_columns(records)
        click.echo('\t'.join(('epoch',) + columns))
        for epoch, means in curves.epoch_means(records).items():
            click.echo('\t'.join([str(epoch)] + [f'{means[key]:.6f}' for key in columns]))
