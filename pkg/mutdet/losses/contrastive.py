"""losses/contrastive.py

Symmetric temperature-scaled alignment between matched predicted embeddings
and object embeddings, with the in-image objects as negatives.
"""

from typing import Optional

import numpy as np

from mutdet.exceptions import InvalidArgumentsError
from mutdet.losses.detection import LossTerm, zero_loss
from mutdet.nn.tensor import ArrayLike, Tensor, as_tensor

DEFAULT_TEMPERATURE = 0.2
NORM_TOLERANCE = 1e-6


def _check_pair(z: Tensor, o: Tensor) -> None:
    if z.ndim != 2 or z.shape != o.shape:
        raise InvalidArgumentsError(f'Embedding sets must share shape, got {z.shape} and {o.shape}')
    for name, t in (('Z', z), ('O', o)):
        norms = np.linalg.norm(t.data, axis=1)
        if np.any(np.abs(norms - 1) > NORM_TOLERANCE):
            raise InvalidArgumentsError(f'Rows of {name} must have unit norm')


def _similarity(a: Tensor, b: Tensor) -> Tensor:
    """M x M matrix of a_i · b_k"""
    rows, dim = a.shape
    return (a.reshape(rows, 1, dim) * b.reshape(1, rows, dim)).sum(axis=2)


def _diagonal_log_softmax(scores: Tensor) -> Tensor:
    diag = np.arange(scores.shape[0])
    return scores[diag, diag] - scores.logsumexp(axis=1)


def contrastive_alignment_loss(z: ArrayLike, o: ArrayLike,
                               temperature: float = DEFAULT_TEMPERATURE) -> LossTerm:
    """−(2τ/M) Σ_i [log softmax_k(z_i·o_k/τ)_i + log softmax_k(o_i·z_k/τ)_i]

    ``z`` and ``o`` are index-aligned unit rows. Swapping the arguments gives
    the bit-identical value.

    Example:

        >>> import numpy as np
        >>> round(contrastive_alignment_loss(np.eye(2), np.eye(2)).value.item(), 6)
        0.005372

    """
    z, o = as_tensor(z), as_tensor(o)
    if z.ndim == 2 and z.shape[0] == 0 and o.shape[0] == 0:
        return LossTerm(zero_loss(), False)
    _check_pair(z, o)

    num_rows = z.shape[0]
    inv_temperature = 1.0 / temperature
    forward = _diagonal_log_softmax(_similarity(z, o) * inv_temperature).sum()
    backward = _diagonal_log_softmax(_similarity(o, z) * inv_temperature).sum()
    return LossTerm((forward + backward) * (-2.0 * temperature / num_rows), True)


def l1_embedding_loss(z: ArrayLike, o: ArrayLike) -> LossTerm:
    """Mean over rows of the L1 distance between index-aligned embeddings"""
    z, o = as_tensor(z), as_tensor(o)
    if z.shape[0] == 0:
        return LossTerm(zero_loss(), False)
    if z.shape != o.shape:
        raise InvalidArgumentsError(f'Embedding sets must share shape, got {z.shape} and {o.shape}')
    return LossTerm((z - o).abs().sum() * (1.0 / z.shape[0]), True)


def detector_alignment_loss(z_encoder: Optional[ArrayLike], z_decoder: ArrayLike,
                            objects: ArrayLike,
                            temperature: float = DEFAULT_TEMPERATURE) -> LossTerm:
    """Alignment of both the encoder proposals and the final decoder layer to ``objects``.

    ``z_encoder`` may be None to drop the encoder term.
    """
    decoder_term = contrastive_alignment_loss(z_decoder, objects, temperature)
    if z_encoder is None:
        return decoder_term
    encoder_term = contrastive_alignment_loss(z_encoder, objects, temperature)
    return LossTerm(
        encoder_term.value + decoder_term.value, encoder_term.active or decoder_term.active
    )
