"""scripts/eval_alignment.py

Measure how well detector predictions match the offline object embeddings.
"""

from pathlib import Path
import json
import logging

import click

from mutdet.scripts.click_types import PathlibPath

logger = logging.getLogger(__name__)


@click.command('eval-alignment',
               short_help='Cosine similarity between predicted and object embeddings.')
@click.option('--ckpt', required=True, help='Checkpoint to evaluate',
              type=PathlibPath(dir_okay=False, exists=True))
@click.option('--data', required=True, help='Dataset directory',
              type=PathlibPath(file_okay=False, exists=True))
@click.option('--labels', 'labels_path', required=True, help='Label store of the dataset',
              type=PathlibPath(dir_okay=False))
@click.option('-o', '--out', default=None, help='Also write the report to this JSON file',
              type=PathlibPath(dir_okay=False, writable=True))
def eval_alignment(ckpt: Path, data: Path, labels_path: Path, out: Path = None) -> None:
    """Evaluate the feature discrepancy of a checkpoint.

    Prints a JSON report with the matched cosine similarity of every image
    and their mean.

    Example:

        $ mutdet eval-alignment --ckpt run.ckpt --data data/ --labels data.plabels.jsonl

    """
    from mutdet.dataset import load_dataset
    from mutdet.detector.checkpoint import load_checkpoint
    from mutdet.evaluation import eval_alignment as run_evaluation
    from mutdet.labels import read_label_store

    checkpoint = load_checkpoint(ckpt)
    scenes = load_dataset(data)
    label_sets = read_label_store(labels_path)

    report = run_evaluation(checkpoint.model, scenes, label_sets, checkpoint.train_config)
    serialized = json.dumps(report.to_dict(), indent=2, sort_keys=True)

    if out is not None:
        with open(out, 'w', encoding='utf-8') as f:
            f.write(serialized + '\n')

    click.echo(serialized)
