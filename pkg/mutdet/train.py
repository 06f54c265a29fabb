"""train.py

The pre-training loop: batches of scenes through the MutDet graph, optimizer
steps, per-iteration metrics and checkpoints.
"""

from typing import Dict, List, NamedTuple, Optional, Sequence, Union
import json
import logging
import math
import pathlib

import numpy as np
import tqdm

from mutdet import get_settings
from mutdet.config import DetectorConfig, TrainConfig, check_detector_config, check_train_config
from mutdet.dataset import SyntheticScene
from mutdet.detector.checkpoint import save_checkpoint
from mutdet.detector.model import MutDet
from mutdet.exceptions import LabelStoreError, NumericalFailureError
from mutdet.labels.store import PseudoLabelSet
from mutdet.losses.compose import COMPONENTS, compose_losses, logged_components
from mutdet.optim import AdamW, learning_rate
from mutdet.profile import trace

logger = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]

NAN_DUMP_SUFFIX = '.nan.json'


class TrainResult(NamedTuple):
    model: MutDet
    iterations: int
    records: List[Dict[str, float]]


def match_labels(scenes: Sequence[SyntheticScene],
                 label_sets: Sequence[PseudoLabelSet]) -> Dict[str, PseudoLabelSet]:
    """Pseudo-labels of every scene by image id; scenes without labels are an error"""
    by_id = {labels.image_id: labels for labels in label_sets}
    missing = [scene.image_id for scene in scenes if scene.image_id not in by_id]
    if missing:
        shown = ', '.join(missing[:5]) + (' ...' if len(missing) > 5 else '')
        raise LabelStoreError(f'No pseudo-labels for {len(missing)} image(s): {shown}')
    return by_id


def batches(order: np.ndarray, batch_size: int) -> List[np.ndarray]:
    return [order[start:start + batch_size] for start in range(0, len(order), batch_size)]


def checkpoint_name(path: pathlib.Path, epoch: int) -> pathlib.Path:
    """``run.ckpt`` -> ``run.epoch3.ckpt``"""
    return path.with_name(f'{path.stem}.epoch{epoch}{path.suffix}')


def _dump_failure(metrics_path: pathlib.Path, batch_id: str, image_id: str,
                  components: Dict[str, float]) -> pathlib.Path:
    dump_path = metrics_path.with_name(metrics_path.name + NAN_DUMP_SUFFIX)
    with open(dump_path, 'w', encoding='utf-8') as f:
        # NaN is not valid JSON; offending values are written as strings
        json.dump({
            'batch_id': batch_id,
            'image_id': image_id,
            'components': {
                key: value if math.isfinite(value) else repr(value)
                for key, value in components.items()
            },
        }, f, indent=2, sort_keys=True)
    return dump_path


def pretrain(scenes: Sequence[SyntheticScene], label_sets: Sequence[PseudoLabelSet],
             detector_config: DetectorConfig, train_config: TrainConfig,
             metrics_path: PathLike, checkpoint_path: Optional[PathLike] = None,
             model: Optional[MutDet] = None, quiet: bool = True) -> TrainResult:
    """Optimize the MutDet objective over ``scenes``.

    Every iteration processes one batch of images sequentially, accumulates the
    gradient of the batch-mean total loss and takes one optimizer step. One JSON
    record per iteration is written to ``metrics_path``. Identical inputs give
    identical metrics and checkpoints.

    Arguments:

        scenes: Training images.
        label_sets: Pseudo-labels; one set is required for every scene.
        metrics_path: JSON lines file, overwritten.
        checkpoint_path: Final checkpoint. Intermediate checkpoints (every
            ``checkpoint_every`` epochs) are written next to it.
        model: Start from this model instead of a freshly initialized one.

    """
    check_detector_config(detector_config)
    check_train_config(train_config)
    labels_by_id = match_labels(scenes, label_sets)

    if model is None:
        model = MutDet(detector_config, seed=train_config.seed)
    optimizer = AdamW.from_config(model.store, train_config)
    rng = np.random.default_rng(train_config.seed)

    metrics_path = pathlib.Path(metrics_path)
    log_every = get_settings().LOG_EVERY
    steps_per_epoch = math.ceil(len(scenes) / train_config.batch_size)
    logged = logged_components(detector_config.calibration_mode)

    logger.info(
        'Pre-training %d trainable parameters on %d images for %d epochs (%s calibration)',
        model.store.size, len(scenes), train_config.epochs, detector_config.calibration_mode
    )

    records: List[Dict[str, float]] = []
    iteration = 0

    with open(metrics_path, 'w', encoding='utf-8') as metrics_file, \
            tqdm.tqdm(total=train_config.epochs * steps_per_epoch, desc='Pre-training',
                      disable=quiet) as pbar:
        for epoch in range(train_config.epochs):
            order = rng.permutation(len(scenes))

            for batch in batches(order, train_config.batch_size):
                lr = learning_rate(train_config, iteration, epoch)
                model.store.zero_grad()
                sums = dict.fromkeys(COMPONENTS, 0.0)

                for index in batch:
                    scene = scenes[int(index)]
                    batch_id = f'epoch {epoch} iteration {iteration} image {scene.image_id}'

                    output = model.pretrain_forward(scene.image, labels_by_id[scene.image_id],
                                                    scene.image_id)
                    losses = compose_losses(output, labels_by_id[scene.image_id],
                                            detector_config, train_config)
                    values = losses.as_dict()

                    if not all(math.isfinite(value) for value in values.values()):
                        dump_path = _dump_failure(metrics_path, batch_id, scene.image_id, values)
                        logger.error('Non-finite loss, wrote diagnostics to %s', dump_path)
                        raise NumericalFailureError('Loss is not finite', batch_id)

                    with trace('backward'):
                        (losses.total * (1. / len(batch))).backward()

                    for key in COMPONENTS:
                        sums[key] += values[key]

                optimizer.step(lr)

                means = {key: sums[key] / len(batch) for key in COMPONENTS}
                record: Dict[str, float] = {'iteration': iteration, 'epoch': epoch, 'lr': lr}
                record.update((key, means[key]) for key in logged)
                record['total'] = sum(means[key] for key in COMPONENTS)
                records.append(record)

                metrics_file.write(json.dumps(record, sort_keys=True) + '\n')
                metrics_file.flush()

                if iteration % log_every == 0:
                    logger.info('iteration %d (epoch %d, lr %.2e): total %.4f', iteration, epoch,
                                lr, record['total'])
                    logger.debug('components: %s', ', '.join(
                        f'{key}={means[key]:.4f}' for key in logged
                    ))

                pbar.set_postfix(loss=f'{record["total"]:.4f}', refresh=False)
                pbar.update(1)
                iteration += 1

            last_epoch = epoch == train_config.epochs - 1
            if (checkpoint_path is not None and train_config.checkpoint_every
                    and (epoch + 1) % train_config.checkpoint_every == 0 and not last_epoch):
                save_checkpoint(checkpoint_name(pathlib.Path(checkpoint_path), epoch + 1),
                                model, train_config)

    if checkpoint_path is not None:
        save_checkpoint(checkpoint_path, model, train_config)

    logger.info('Finished %d iterations', iteration)
    return TrainResult(model, iteration, records)
