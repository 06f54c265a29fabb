"""labels/pipeline.py

Offline conversion of instance masks into pseudo-labels.

Every mask becomes an oriented box (minimum-area rectangle), a raw crop
feature from the frozen extractor, a PCA-reduced and L2-normalized object
embedding, and the k-means cluster of that embedding. Labels are computed
once and never change during pre-training.
"""

from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple
import logging

import numpy as np
import tqdm
from cachetools import cached

from mutdet import image as image_utils
from mutdet.dataset import SyntheticScene
from mutdet.detector.backbone import FrozenBackbone
from mutdet.exceptions import DegenerateInputError, EmptyLabelError, InsufficientDataError
from mutdet.geometry import OrientedBox, box_corners, min_area_rect
from mutdet.labels.kmeans import KMeansModel, assign_cluster, kmeans_fit
from mutdet.labels.pca import PcaModel, l2_normalize, pca_fit, pca_project
from mutdet.labels.store import PseudoLabel, PseudoLabelSet
from mutdet.profile import trace

logger = logging.getLogger(__name__)

#: IoU threshold of the mask NMS run by the upstream mask generator; masks arrive
#: already filtered, nothing here applies it
UPSTREAM_MASK_NMS_THRESHOLD = 0.8

EmbedFn = Callable[[OrientedBox], np.ndarray]


class LabelResult(NamedTuple):
    labels: PseudoLabelSet
    #: Number of instances dropped as degenerate
    dropped: int


class LabelPreparation(NamedTuple):
    label_sets: List[PseudoLabelSet]
    pca: PcaModel
    kmeans: KMeansModel
    dropped: int


def crop_embedder(scene_image: np.ndarray, backbone: FrozenBackbone) -> EmbedFn:
    """Raw feature of a box: crop its axis-aligned enclosure, resize, pool the extractor"""
    height, width = scene_image.shape[:2]

    def embed(box: OrientedBox) -> np.ndarray:
        bounds = image_utils.enclosing_bounds(box_corners(box), width, height)
        crop = image_utils.crop_and_resize(scene_image, bounds, backbone.image_size)
        return backbone.pooled(crop)

    return embed


def _mask_boxes(masks: Sequence[np.ndarray], image_id: str) -> Tuple[List[OrientedBox], int]:
    boxes = []
    dropped = 0
    for index, points in enumerate(masks):
        try:
            boxes.append(min_area_rect(points))
        except DegenerateInputError as exc:
            dropped += 1
            logger.warning('Dropping instance %d of image %s: %s', index, image_id, exc)
    return boxes, dropped


def masks_to_pseudolabels(masks: Sequence[np.ndarray], embed_fn: EmbedFn, pca: PcaModel,
                          km: KMeansModel, image_id: str = '') -> LabelResult:
    """Build the pseudo-label set of one image.

    Degenerate masks are dropped with a warning. Raises
    :class:`~mutdet.exceptions.EmptyLabelError` if masks were given but none
    survived.
    """
    boxes, dropped = _mask_boxes(masks, image_id)

    entries = []
    for box in boxes:
        try:
            embedding = l2_normalize(pca_project(pca, embed_fn(box)))
        except DegenerateInputError as exc:
            dropped += 1
            logger.warning('Dropping instance of image %s: %s', image_id, exc)
            continue
        cls = assign_cluster(km, embedding)
        entries.append(PseudoLabel(box, cls, box.angle, tuple(embedding.tolist())))

    if len(masks) and not entries:
        raise EmptyLabelError(f'All {len(masks)} instances of image {image_id} are degenerate')

    return LabelResult(PseudoLabelSet(image_id, tuple(entries)), dropped)


def _memoized(embed: EmbedFn) -> EmbedFn:
    # keyed by box
    return cached(cache={})(embed)


@trace('prepare_labels')
def prepare_labels(scenes: Sequence[SyntheticScene], backbone: FrozenBackbone, clusters: int,
                   dim: int, seed: int = 0, quiet: bool = True) -> LabelPreparation:
    """Fit PCA and k-means over all instances of a dataset, then label every image.

    Label sets come back in image-id order.
    """
    scenes = sorted(scenes, key=lambda s: s.image_id)
    embedders: Dict[str, EmbedFn] = {}

    raw_features = []
    for scene in tqdm.tqdm(scenes, desc='Extracting crop features', disable=quiet):
        embed = _memoized(crop_embedder(scene.image, backbone))
        embedders[scene.image_id] = embed
        boxes, _ = _mask_boxes([inst.points for inst in scene.instances], scene.image_id)
        raw_features.extend(embed(box) for box in boxes)

    if not raw_features:
        raise InsufficientDataError('Dataset contains no usable instances')

    features = np.stack(raw_features)
    logger.info('Fitting PCA on %d instances of width %d', *features.shape)
    pca = pca_fit(features, dim)

    try:
        embeddings = l2_normalize(pca_project(pca, features))
    except DegenerateInputError as exc:
        raise InsufficientDataError('Instance features do not vary') from exc

    logger.info('Clustering %d embeddings into %d classes', len(embeddings), clusters)
    kmeans = kmeans_fit(embeddings, clusters, seed=seed)

    label_sets = []
    dropped = 0
    for scene in scenes:
        masks = [inst.points for inst in scene.instances]
        try:
            result = masks_to_pseudolabels(
                masks, embedders[scene.image_id], pca, kmeans, scene.image_id
            )
        except EmptyLabelError as exc:
            logger.warning('%s; the image keeps an empty label set', exc)
            label_sets.append(PseudoLabelSet(scene.image_id))
            dropped += len(masks)
            continue
        label_sets.append(result.labels)
        dropped += result.dropped

    if dropped:
        logger.warning('Dropped %d degenerate instances in total', dropped)

    return LabelPreparation(label_sets, pca, kmeans, dropped)
