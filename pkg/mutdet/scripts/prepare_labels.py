"""scripts/prepare_labels.py

Offline pseudo-label generation for a synthetic dataset.
"""

from typing import Any, Mapping
from pathlib import Path
import logging

import click
import click_spinner

from mutdet.scripts.click_types import PathlibPath, TOMLFile

logger = logging.getLogger(__name__)


@click.command('prepare-labels',
               short_help='Convert instance masks into pseudo-labels with object embeddings.')
@click.option('--data', required=True, help='Dataset directory',
              type=PathlibPath(file_okay=False, exists=True))
@click.option('--clusters', type=click.IntRange(min=1), default=16, show_default=True,
              help='Number of pseudo-classes (k-means clusters)')
@click.option('--dim', type=click.IntRange(min=1), default=32, show_default=True,
              help='Width of the object embeddings')
@click.option('--seed', type=click.INT, default=0, show_default=True,
              help='Seed of the k-means initialization')
@click.option('--config', 'run_config', type=TOMLFile(), default=None,
              help='Run configuration whose detector settings define the frozen extractor')
@click.option('-o', '--out', required=True, help='Path of the label store',
              type=PathlibPath(dir_okay=False, writable=True))
@click.option('-q', '--quiet', is_flag=True, default=False, show_default=True,
              help='Suppress all output to stdout')
def prepare_labels(data: Path, out: Path, clusters: int = 16, dim: int = 32, seed: int = 0,
                   run_config: Mapping[str, Any] = None, quiet: bool = False) -> None:
    """Convert the masks of a dataset into oriented boxes, object embeddings and pseudo-classes.

    Example:

        $ mutdet prepare-labels --data data/ --clusters 16 --dim 32 --out data.plabels.jsonl

    """
    from mutdet.config import parse_run_config
    from mutdet.dataset import load_dataset
    from mutdet.detector.backbone import FrozenBackbone
    from mutdet.labels import write_label_store
    from mutdet.labels.pipeline import prepare_labels as run_preparation

    scenes = load_dataset(data)

    config = dict(run_config or {})
    config.setdefault('image_size', scenes[0].size)
    detector_config, _ = parse_run_config(config)
    backbone = FrozenBackbone(detector_config)

    with click_spinner.spinner(beep=False, disable=quiet):
        result = run_preparation(scenes, backbone, clusters=clusters, dim=dim, seed=seed,
                                 quiet=True)

    write_label_store(out, result.label_sets)

    if not quiet:
        num_labels = sum(len(labels) for labels in result.label_sets)
        click.echo(
            f'Wrote {num_labels} pseudo-labels of {len(result.label_sets)} images to {out!s} '
            f'({result.dropped} instances dropped)'
        )
