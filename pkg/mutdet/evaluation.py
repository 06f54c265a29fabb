"""evaluation.py

Feature-discrepancy evaluation of a (pre-)trained detector.
"""

from typing import Dict, NamedTuple, Optional, Sequence

import logging

import numpy as np
import tqdm

from mutdet.config import TrainConfig
from mutdet.dataset import SyntheticScene
from mutdet.detector.model import MutDet, feature_discrepancy
from mutdet.exceptions import DatasetError
from mutdet.labels.store import PseudoLabelSet
from mutdet.losses.compose import make_targets, match
from mutdet.profile import trace
from mutdet.train import match_labels

logger = logging.getLogger(__name__)


class AlignmentReport(NamedTuple):
    #: Matched cosine similarity per image id; None for images without objects
    per_image: Dict[str, Optional[float]]
    mean: Optional[float]

    def to_dict(self) -> Dict:
        return {'per_image': self.per_image, 'mean': self.mean}


def image_alignment(model: MutDet, scene: SyntheticScene, labels: PseudoLabelSet,
                    train_config: TrainConfig) -> Optional[float]:
    """Cosine similarity between matched final-layer embeddings and the raw object embeddings.

    The fine-tuning graph is used, so the enhancement module plays no part.
    """
    if not len(labels):
        return None

    output = model.finetune_forward(scene.image, scene.image_id)[-1]
    targets = make_targets(labels, model.config, train_config)
    assignment = match(output, targets, train_config)
    return feature_discrepancy(output.embeddings, labels.embeddings(model.config.dim), assignment)


@trace('eval_alignment')
def eval_alignment(model: MutDet, scenes: Sequence[SyntheticScene],
                   label_sets: Sequence[PseudoLabelSet],
                   train_config: Optional[TrainConfig] = None,
                   quiet: bool = True) -> AlignmentReport:
    """Per-image and mean feature discrepancy over a dataset.

    The mean is taken over images with at least one matched object.
    """
    if not scenes:
        raise DatasetError('Cannot evaluate on an empty dataset')

    train_config = train_config or TrainConfig()
    labels_by_id = match_labels(scenes, label_sets)

    per_image: Dict[str, Optional[float]] = {}
    for scene in tqdm.tqdm(scenes, desc='Evaluating', disable=quiet):
        per_image[scene.image_id] = image_alignment(
            model, scene, labels_by_id[scene.image_id], train_config
        )

    values = [value for value in per_image.values() if value is not None]
    if not values:
        logger.warning('No image has matched objects, mean similarity is undefined')
        return AlignmentReport(per_image, None)

    mean = float(np.mean(values))
    logger.info('Mean matched cosine similarity over %d images: %.4f', len(values), mean)
    return AlignmentReport(per_image, mean)
