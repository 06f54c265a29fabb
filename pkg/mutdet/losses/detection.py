"""losses/detection.py

Detection losses over matched predictions: focal classification, L1 + GIoU
box regression (angle excluded) and circular-smooth-label angle classification.
"""

from typing import NamedTuple, Optional

import numpy as np

from mutdet.geometry import normalize_angle
from mutdet.losses.matching import MatchAssignment
from mutdet.nn.tensor import Tensor, as_tensor, maximum, minimum


class LossTerm(NamedTuple):
    value: Tensor
    #: False if the term had nothing to supervise and contributes zero
    active: bool


def zero_loss() -> Tensor:
    return Tensor(0.0)


def angle_to_bin(angle: float, bins: int) -> int:
    """Index of the one-degree (for 180 bins) bin holding a canonical angle"""
    position = (normalize_angle(angle) + np.pi / 2) / np.pi * bins
    return int(np.clip(np.floor(position), 0, bins - 1))


def csl_target(angle: float, bins: int = 180, sigma: float = 4.0, radius: int = 12) -> np.ndarray:
    """Circularly smoothed angle label.

    A Gaussian window of standard deviation ``sigma`` bins around the true
    bin, wrapped around the angular period, exactly 1 at the peak and 0 beyond
    ``radius`` bins.
    """
    center = angle_to_bin(angle, bins)
    offset = np.abs(np.arange(bins) - center)
    distance = np.minimum(offset, bins - offset)
    window = np.exp(-distance.astype(np.float64) ** 2 / (2 * sigma ** 2))
    return np.where(distance <= radius, window, 0.0)


def csl_targets(angles: np.ndarray, bins: int = 180, sigma: float = 4.0,
                radius: int = 12) -> np.ndarray:
    targets = [csl_target(a, bins, sigma, radius) for a in np.asarray(angles).ravel()]
    return np.array(targets).reshape(-1, bins)


def class_targets(num_predictions: int, num_classes: int, assignment: MatchAssignment,
                  classes: np.ndarray) -> np.ndarray:
    """One-hot rows for matched predictions, all-zero rows (background) otherwise"""
    targets = np.zeros((num_predictions, num_classes))
    if assignment.num_matched:
        targets[assignment.prediction_indices, classes[assignment.annotation_indices]] = 1.0
    return targets


def focal_loss(logits: Tensor, targets: np.ndarray, num_matched: int,
               alpha: float = 0.25, gamma: float = 2.0) -> Tensor:
    """Binary focal loss summed over all elements and divided by ``max(num_matched, 1)``"""
    logits = as_tensor(logits)
    targets = np.asarray(targets, dtype=np.float64)

    prob = logits.sigmoid()
    # binary cross-entropy on logits, −log p_t
    ce = logits.softplus() - logits * targets
    p_t = prob * targets + (1.0 - prob) * (1.0 - targets)
    alpha_t = alpha * targets + (1.0 - alpha) * (1.0 - targets)

    loss = ce * (1.0 - p_t) ** gamma * alpha_t
    return loss.sum() * (1.0 / max(num_matched, 1))


def generalized_iou(pred: Tensor, target: np.ndarray) -> Tensor:
    """Row-wise axis-aligned GIoU of (cx, cy, w, h) tensors; differentiable in ``pred``"""
    cx, cy, w, h = (pred[:, i] for i in range(4))
    tcx, tcy, tw, th = (target[:, i] for i in range(4))

    px0, px1, py0, py1 = cx - w * 0.5, cx + w * 0.5, cy - h * 0.5, cy + h * 0.5
    tx0, tx1, ty0, ty1 = tcx - tw / 2, tcx + tw / 2, tcy - th / 2, tcy + th / 2

    inter_w = maximum(minimum(px1, tx1) - maximum(px0, tx0), 0.0)
    inter_h = maximum(minimum(py1, ty1) - maximum(py0, ty0), 0.0)
    inter = inter_w * inter_h
    union = w * h + tw * th - inter

    enclosure = (maximum(px1, tx1) - minimum(px0, tx0)) * (maximum(py1, ty1) - minimum(py0, ty0))
    return inter / union - (enclosure - union) / enclosure


def reg_loss(pred_boxes: Tensor, gt_boxes: np.ndarray, assignment: MatchAssignment,
             weight_l1: float = 5.0, weight_giou: float = 2.0) -> LossTerm:
    """Weighted L1 + (1 − GIoU) over matched pairs, divided by the number of pairs.

    Only the (cx, cy, w, h) columns are read; an angle column is ignored.
    """
    if not assignment.num_matched:
        return LossTerm(zero_loss(), False)

    pred = as_tensor(pred_boxes)[assignment.prediction_indices]
    target = np.asarray(gt_boxes, dtype=np.float64)[assignment.annotation_indices, :4]

    l1 = (pred - target).abs().sum()
    giou = generalized_iou(pred, target)
    total = l1 * weight_l1 + (1.0 - giou).sum() * weight_giou
    return LossTerm(total * (1.0 / assignment.num_matched), True)


def angle_csl_loss(angle_logits: Tensor, gt_angles: np.ndarray, assignment: MatchAssignment,
                   sigma: float = 4.0, radius: int = 12,
                   targets: Optional[np.ndarray] = None) -> LossTerm:
    """Per-bin binary cross-entropy against smoothed angle labels.

    Averaged over bins, then over matched predictions. ``targets`` may carry
    precomputed labels for all annotations.
    """
    if not assignment.num_matched:
        return LossTerm(zero_loss(), False)

    angle_logits = as_tensor(angle_logits)
    bins = angle_logits.shape[1]
    if targets is None:
        targets = csl_targets(gt_angles, bins, sigma, radius)

    scores = angle_logits[assignment.prediction_indices]
    labels = targets[assignment.annotation_indices]
    bce = scores.softplus() - scores * labels
    return LossTerm(bce.mean(axis=1).sum() * (1.0 / assignment.num_matched), True)
