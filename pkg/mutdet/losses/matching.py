"""losses/matching.py

Hungarian bipartite matching of annotations to predictions.
"""

from typing import List, NamedTuple, Tuple

import numpy as np
from scipy.optimize import linear_sum_assignment
from scipy.special import expit

from mutdet.exceptions import InvalidArgumentsError
from mutdet.geometry import pairwise_iou_giou

#: Relative slack under which two assignment totals count as tied
TIE_TOLERANCE = 1e-10

# predicted extents are clipped here before GIoU so saturated sigmoids stay valid
MIN_BOX_EXTENT = 1e-9


class MatchAssignment(NamedTuple):
    #: (annotation_index, prediction_index), sorted by annotation index
    pairs: Tuple[Tuple[int, int], ...]
    #: Prediction indices without an annotation, ascending
    unmatched: Tuple[int, ...]

    @property
    def num_matched(self) -> int:
        return len(self.pairs)

    @property
    def annotation_indices(self) -> np.ndarray:
        return np.array([a for a, _ in self.pairs], dtype=np.int64)

    @property
    def prediction_indices(self) -> np.ndarray:
        return np.array([p for _, p in self.pairs], dtype=np.int64)


def empty_assignment(num_predictions: int) -> MatchAssignment:
    return MatchAssignment((), tuple(range(num_predictions)))


def assignment_cost(cost: np.ndarray, assignment: MatchAssignment) -> float:
    cost = np.asarray(cost, dtype=np.float64)
    return float(cost[assignment.annotation_indices, assignment.prediction_indices].sum())


def _optimal_total(cost: np.ndarray) -> float:
    if cost.shape[0] == 0:
        return 0.0
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def hungarian(cost: np.ndarray) -> MatchAssignment:
    """Minimum-cost injective assignment of every row (annotation) to a column (prediction).

    Among optimal assignments the lexicographically smallest one (by the
    column of row 0, then row 1, ...) is returned, so ties resolve
    deterministically.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise InvalidArgumentsError(f'Cost matrix must be 2D, got shape {cost.shape}')

    num_rows, num_cols = cost.shape
    if num_rows > num_cols:
        raise InvalidArgumentsError(
            f'Cannot match {num_rows} annotations to {num_cols} predictions'
        )
    if not np.all(np.isfinite(cost)):
        raise InvalidArgumentsError('Cost matrix contains non-finite entries')

    if num_rows == 0:
        return empty_assignment(num_cols)

    best = _optimal_total(cost)
    slack = TIE_TOLERANCE * (1.0 + abs(best))

    chosen: List[int] = []
    fixed = 0.0
    available = list(range(num_cols))

    for row in range(num_rows):
        for col in available:
            rest_cols = [c for c in available if c != col]
            rest = cost[row + 1:][:, rest_cols]
            total = fixed + cost[row, col] + _optimal_total(rest)
            if total <= best + slack:
                chosen.append(col)
                fixed += cost[row, col]
                available.remove(col)
                break
        else:  # pragma: no cover
            raise RuntimeError('Lexicographic tie-breaking lost the optimum')

    pairs = tuple((row, col) for row, col in enumerate(chosen))
    unmatched = tuple(c for c in range(num_cols) if c not in set(chosen))
    return MatchAssignment(pairs, unmatched)


def match_cost(pred_boxes: np.ndarray, class_logits: np.ndarray, angle_logits: np.ndarray,
               gt_boxes: np.ndarray, gt_classes: np.ndarray, gt_angle_targets: np.ndarray,
               weight_class: float = 2.0, weight_l1: float = 5.0, weight_giou: float = 2.0,
               weight_angle: float = 0.5, alpha: float = 0.25,
               gamma: float = 2.0) -> np.ndarray:
    """M x N matching cost between annotations (rows) and predictions (columns).

    Boxes are normalized (cx, cy, w, h); any angle column is ignored. The angle
    cost is the mean absolute difference between the smoothed angle labels
    ``gt_angle_targets`` (M x bins) and the predicted per-bin probabilities.
    """
    pred_boxes = np.asarray(pred_boxes, dtype=np.float64)[:, :4]
    gt_boxes = np.asarray(gt_boxes, dtype=np.float64)[:, :4]
    class_logits = np.asarray(class_logits, dtype=np.float64)
    gt_classes = np.asarray(gt_classes, dtype=np.int64)

    # focal-style class cost on each annotation's class
    logits = class_logits[:, gt_classes].T
    prob = expit(logits)
    positive = alpha * (1 - prob) ** gamma * np.logaddexp(0, -logits)
    negative = (1 - alpha) * prob ** gamma * np.logaddexp(0, logits)
    cost_class = positive - negative

    cost_l1 = np.abs(gt_boxes[:, np.newaxis, :] - pred_boxes[np.newaxis, :, :]).sum(axis=-1)

    safe_boxes = pred_boxes.copy()
    safe_boxes[:, 2:] = np.maximum(safe_boxes[:, 2:], MIN_BOX_EXTENT)
    _, giou = pairwise_iou_giou(gt_boxes[:, np.newaxis, :], safe_boxes[np.newaxis, :, :])

    angle_prob = expit(np.asarray(angle_logits, dtype=np.float64))
    cost_angle = np.abs(
        np.asarray(gt_angle_targets)[:, np.newaxis, :] - angle_prob[np.newaxis, :, :]
    ).mean(axis=-1)

    return (
        weight_class * cost_class
        + weight_l1 * cost_l1
        + weight_giou * (1 - giou)
        + weight_angle * cost_angle
    )
