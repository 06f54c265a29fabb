"""losses/compose.py

Composition of the full pre-training objective from one image's forward pass.

The detector branch (decoding the enhanced features) carries the alignment
loss of the encoder proposals and the final decoder layer plus the detection
losses. The auxiliary branch (the same decoder on the raw features) is
supervised with the same pseudo-labels and aligned to the enhanced object
embeddings. The total is the sum of all components.
"""

from typing import Dict, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np

from mutdet.config import DetectorConfig, TrainConfig
from mutdet.detector.heads import BranchOutput
from mutdet.detector.model import PretrainOutput
from mutdet.exceptions import ConfigurationError
from mutdet.labels.store import PseudoLabelSet
from mutdet.losses.calibration import decoder_cross_distill, encoder_feature_distill
from mutdet.losses.contrastive import (
    contrastive_alignment_loss, detector_alignment_loss, l1_embedding_loss
)
from mutdet.losses.detection import (
    LossTerm, angle_csl_loss, class_targets, csl_targets, focal_loss, reg_loss, zero_loss
)
from mutdet.losses.matching import MatchAssignment, hungarian, match_cost
from mutdet.nn.functional import l2_normalize_rows
from mutdet.nn.tensor import Tensor

#: Components of the detector and auxiliary branches
BRANCH_COMPONENTS = ('ca_det', 'cls', 'reg', 'ang', 'ca_aux', 'cls_aux', 'reg_aux', 'ang_aux')
COMPONENTS = BRANCH_COMPONENTS + ('distill',)

DISTILL_MODES = ('encoder-distill', 'decoder-distill')


def logged_components(calibration_mode: str) -> Tuple[str, ...]:
    """Components recorded per iteration; ``distill`` only where the mode computes it"""
    if calibration_mode in DISTILL_MODES:
        return COMPONENTS
    return BRANCH_COMPONENTS


class LossBreakdown(NamedTuple):
    ca_det: Tensor
    cls: Tensor
    reg: Tensor
    ang: Tensor
    ca_aux: Tensor
    cls_aux: Tensor
    reg_aux: Tensor
    ang_aux: Tensor
    #: Calibration distillation, zero unless an encoder-distill or decoder-distill run
    distill: Tensor
    total: Tensor

    def as_dict(self) -> Dict[str, float]:
        return {key: value.item() for key, value in self._asdict().items()}


def breakdown(**components: Tensor) -> LossBreakdown:
    """Fill missing components with zero and sum everything into ``total``"""
    values = {key: components.get(key, zero_loss()) for key in COMPONENTS}
    total = zero_loss()
    for key in COMPONENTS:
        total = total + values[key]
    return LossBreakdown(total=total, **values)


class Targets(NamedTuple):
    #: M x 4 normalized (cx, cy, w, h)
    boxes: np.ndarray
    classes: np.ndarray
    angles: np.ndarray
    #: M x A_bins smoothed angle labels
    angle_labels: np.ndarray

    @property
    def count(self) -> int:
        return len(self.classes)


def make_targets(labels: PseudoLabelSet, detector_config: DetectorConfig,
                 train_config: TrainConfig) -> Targets:
    classes = labels.classes
    if len(classes) and classes.max() >= detector_config.num_classes:
        raise ConfigurationError(
            f'Pseudo-label class {classes.max()} exceeds the {detector_config.num_classes} '
            'classes of the detector'
        )
    if len(labels) > detector_config.num_queries:
        raise ConfigurationError(
            f'Image {labels.image_id} has {len(labels)} objects but the detector only '
            f'has {detector_config.num_queries} queries'
        )

    boxes = labels.boxes
    angles = boxes[:, 4].copy()
    return Targets(
        boxes=boxes[:, :4] / detector_config.image_size,
        classes=classes,
        angles=angles,
        angle_labels=csl_targets(angles, detector_config.angle_bins,
                                 train_config.csl_sigma, train_config.csl_radius),
    )


def match(output: BranchOutput, targets: Targets, config: TrainConfig) -> MatchAssignment:
    cost = match_cost(
        output.boxes.data, output.class_logits.data, output.angle_logits.data,
        targets.boxes, targets.classes, targets.angle_labels,
        weight_class=config.weight_class, weight_l1=config.weight_l1,
        weight_giou=config.weight_giou, weight_angle=config.weight_angle,
        alpha=config.focal_alpha, gamma=config.focal_gamma,
    )
    return hungarian(cost)


class StageLosses(NamedTuple):
    cls: Tensor
    reg: Tensor
    ang: Tensor
    assignment: MatchAssignment


def detection_losses(output: BranchOutput, targets: Targets, config: TrainConfig,
                     assignment: Optional[MatchAssignment] = None) -> StageLosses:
    """Classification, regression and angle loss of one prediction stage"""
    if assignment is None:
        assignment = match(output, targets, config)

    cls_targets = class_targets(
        output.num_predictions, output.class_logits.shape[1], assignment, targets.classes
    )
    cls = focal_loss(output.class_logits, cls_targets, assignment.num_matched,
                     config.focal_alpha, config.focal_gamma)
    reg = reg_loss(output.boxes, targets.boxes, assignment, config.weight_l1, config.weight_giou)
    ang = angle_csl_loss(output.angle_logits, targets.angles, assignment,
                         config.csl_sigma, config.csl_radius, targets=targets.angle_labels)
    return StageLosses(cls, reg.value, ang.value, assignment)


def positive_embeddings(output: BranchOutput, assignment: MatchAssignment) -> Tensor:
    """Normalized predicted embeddings of the matched predictions, in annotation order"""
    return l2_normalize_rows(output.embeddings[assignment.prediction_indices])


def embedding_loss(z: Tensor, objects: Tensor, config: DetectorConfig,
                   train_config: TrainConfig) -> LossTerm:
    if config.embedding_loss == 'l1':
        return l1_embedding_loss(z, objects)
    return contrastive_alignment_loss(z, objects, train_config.temperature)


def _alignment(z_encoder: Optional[Tensor], z_decoder: Tensor, objects: Tensor,
               config: DetectorConfig, train_config: TrainConfig) -> Tensor:
    if config.embedding_loss == 'contrastive':
        return detector_alignment_loss(z_encoder, z_decoder, objects,
                                       train_config.temperature).value
    total = l1_embedding_loss(z_decoder, objects).value
    if z_encoder is not None:
        total = total + l1_embedding_loss(z_encoder, objects).value
    return total


def _stage_losses(stages: Sequence[BranchOutput], targets: Targets,
                  config: TrainConfig) -> List[StageLosses]:
    return [detection_losses(stage, targets, config) for stage in stages]


def _total(losses: Sequence[StageLosses], field: str) -> Tensor:
    total = zero_loss()
    for stage in losses:
        total = total + getattr(stage, field)
    return total


def compose_losses(output: PretrainOutput, labels: PseudoLabelSet,
                   detector_config: DetectorConfig, train_config: TrainConfig) -> LossBreakdown:
    """All loss components of one image and their total"""
    mode = detector_config.calibration_mode
    components: Dict[str, Tensor] = {}

    if mode == 'encoder-distill':
        components['distill'] = encoder_feature_distill(output.features, output.enhanced_features)
    elif mode == 'decoder-distill' and output.aux is not None:
        student, teacher = output.aux[-1], output.main[-1]
        components['distill'] = decoder_cross_distill(
            student.class_logits, teacher.class_logits, student.embeddings, teacher.embeddings
        )

    if not len(labels):
        return breakdown(**components)

    targets = make_targets(labels, detector_config, train_config)
    objects = output.objects

    decoder_stages = output.main if detector_config.deep_supervision else output.main[-1:]
    encoder_losses = detection_losses(output.encoder.output, targets, train_config)
    decoder_losses = _stage_losses(decoder_stages, targets, train_config)
    main_losses = [encoder_losses] + decoder_losses

    components['cls'] = _total(main_losses, 'cls')
    components['reg'] = _total(main_losses, 'reg')
    components['ang'] = _total(main_losses, 'ang')

    z_decoder = positive_embeddings(output.main[-1], decoder_losses[-1].assignment)
    z_encoder = None
    if detector_config.encoder_alignment:
        z_encoder = positive_embeddings(output.encoder.output, encoder_losses.assignment)
    components['ca_det'] = _alignment(z_encoder, z_decoder, objects, detector_config,
                                       train_config)

    if mode == 'siamese' and output.aux is not None:
        aux_stages = output.aux if detector_config.deep_supervision else output.aux[-1:]
        aux_losses = _stage_losses(aux_stages, targets, train_config)
        components['cls_aux'] = _total(aux_losses, 'cls')
        components['reg_aux'] = _total(aux_losses, 'reg')
        components['ang_aux'] = _total(aux_losses, 'ang')
        components['ca_aux'] = embedding_loss(
            positive_embeddings(output.aux[-1], aux_losses[-1].assignment), objects,
            detector_config, train_config
        ).value

    return breakdown(**components)
