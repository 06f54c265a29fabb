"""losses/calibration.py

Distillation losses of the two alternative calibration mechanisms. The teacher
side of each loss is detached, so no gradient reaches it.
"""

from scipy.special import expit

from mutdet.exceptions import InvalidArgumentsError
from mutdet.nn.tensor import ArrayLike, Tensor, as_tensor


def _check_shapes(student: Tensor, teacher: Tensor, what: str) -> None:
    if student.shape != teacher.shape:
        raise InvalidArgumentsError(
            f'{what} shapes differ: {student.shape} (student) vs. {teacher.shape} (teacher)'
        )


def encoder_feature_distill(features: ArrayLike, enhanced_features: ArrayLike) -> Tensor:
    """Mean squared error pulling ``F`` towards the detached ``F_enh``"""
    features, enhanced_features = as_tensor(features), as_tensor(enhanced_features)
    _check_shapes(features, enhanced_features, 'Feature')
    diff = features - enhanced_features.detach()
    return (diff * diff).mean()


def decoder_cross_distill(student_logits: ArrayLike, teacher_logits: ArrayLike,
                          student_embeddings: ArrayLike, teacher_embeddings: ArrayLike) -> Tensor:
    """Quality-focal soft-target classification loss plus embedding L2.

    The student is the branch decoding ``F``, the teacher the branch decoding
    ``F_enh``. The classification term weights the per-element binary
    cross-entropy against the teacher probabilities by the squared probability
    gap and is divided by the number of predictions; the embedding term is the
    mean over predictions of the squared Euclidean distance.
    """
    student_logits, teacher_logits = as_tensor(student_logits), as_tensor(teacher_logits)
    student_embeddings = as_tensor(student_embeddings)
    teacher_embeddings = as_tensor(teacher_embeddings)
    _check_shapes(student_logits, teacher_logits, 'Logit')
    _check_shapes(student_embeddings, teacher_embeddings, 'Embedding')

    num_predictions = max(student_logits.shape[0], 1)
    soft_targets = expit(teacher_logits.data)

    bce = student_logits.softplus() - student_logits * soft_targets
    gap = student_logits.sigmoid() - soft_targets
    classification = (bce * gap * gap).sum() * (1.0 / num_predictions)

    diff = student_embeddings - teacher_embeddings.detach()
    embedding = (diff * diff).sum(axis=1).mean()
    return classification + embedding
