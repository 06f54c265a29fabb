"""scripts/pretrain.py

Run MutDet pre-training on a prepared dataset.
"""

from typing import Any, Mapping
from pathlib import Path
import logging

import click

from mutdet.config import CALIBRATION_MODES
from mutdet.scripts.click_types import OnOff, PathlibPath, TOMLFile

logger = logging.getLogger(__name__)


@click.command('pretrain', short_help='Pre-train the detector with mutual enhancement.')
@click.option('--data', required=True, help='Dataset directory',
              type=PathlibPath(file_okay=False, exists=True))
@click.option('--labels', 'labels_path', required=True, help='Label store of the dataset',
              type=PathlibPath(dir_okay=False))
@click.option('--config', 'run_config', type=TOMLFile(), default=None,
              help='Flat TOML file with detector and training settings')
@click.option('--calibration', type=click.Choice(CALIBRATION_MODES), default=None,
              help='Calibration mechanism [default: from config, else siamese]')
@click.option('--enhance', type=OnOff(), default=None,
              help='Switch the mutual enhancement module [default: from config, else on]')
@click.option('-o', '--out', required=True, help='Path of the final checkpoint',
              type=PathlibPath(dir_okay=False, writable=True))
@click.option('--metrics', required=True, help='Path of the per-iteration metrics file',
              type=PathlibPath(dir_okay=False, writable=True))
@click.option('-q', '--quiet', is_flag=True, default=False, show_default=True,
              help='Suppress all output to stdout')
def pretrain(data: Path, labels_path: Path, out: Path, metrics: Path,
             run_config: Mapping[str, Any] = None, calibration: str = None,
             enhance: bool = None, quiet: bool = False) -> None:
    """Pre-train the detector on pseudo-labels and object embeddings.

    Command line switches take precedence over the configuration file.

    Example:

        $ mutdet pretrain --data data/ --labels data.plabels.jsonl --config run.toml \\
            --calibration siamese --enhance on --out run.ckpt --metrics run.metrics.jsonl

    """
    from mutdet.config import parse_run_config
    from mutdet.dataset import load_dataset
    from mutdet.exceptions import DatasetError
    from mutdet.labels import read_label_store
    from mutdet.train import pretrain as run_pretraining

    config = dict(run_config or {})
    if calibration is not None:
        config['calibration_mode'] = calibration
    if enhance is not None:
        config['enhance'] = enhance
    detector_config, train_config = parse_run_config(config)

    scenes = load_dataset(data)
    wrong_size = [s.image_id for s in scenes if s.size != detector_config.image_size]
    if wrong_size:
        raise DatasetError(
            f'{len(wrong_size)} image(s) do not match the configured image size '
            f'{detector_config.image_size}, e.g. {wrong_size[0]}'
        )

    label_sets = read_label_store(labels_path)
    result = run_pretraining(scenes, label_sets, detector_config, train_config,
                             metrics_path=metrics, checkpoint_path=out, quiet=quiet)

    if not quiet:
        final = result.records[-1]['total'] if result.records else float('nan')
        click.echo(f'Finished {result.iterations} iterations, final loss {final:.4f}')
        click.echo(f'Checkpoint written to {out!s}, metrics to {metrics!s}')
