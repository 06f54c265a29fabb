"""nn/functional.py

Stateless building blocks of the transformer layers.
"""

from typing import NamedTuple

import numpy as np

from mutdet.exceptions import InvalidArgumentsError, ConfigurationError
from mutdet.nn.tensor import ArrayLike, Tensor, as_tensor

LAYER_NORM_EPS = 1e-5


def linear(x: ArrayLike, weight: ArrayLike, bias: ArrayLike) -> Tensor:
    """Row-wise affine map ``x @ weight.T + bias``"""
    x, weight, bias = as_tensor(x), as_tensor(weight), as_tensor(bias)
    if weight.ndim != 2 or bias.shape != (weight.shape[0],):
        raise InvalidArgumentsError(
            f'Incompatible linear parameters: weight {weight.shape}, bias {bias.shape}'
        )
    if x.shape[-1] != weight.shape[1]:
        raise InvalidArgumentsError(
            f'Input width {x.shape[-1]} does not match weight {weight.shape}'
        )
    return x @ weight.T + bias


def layer_norm(x: ArrayLike, gain: ArrayLike, bias: ArrayLike,
               eps: float = LAYER_NORM_EPS) -> Tensor:
    """Normalize every row to zero mean and (population) unit variance, then scale and shift"""
    x = as_tensor(x)
    centered = x - x.mean(axis=-1, keepdims=True)
    variance = (centered * centered).mean(axis=-1, keepdims=True)
    return centered / (variance + eps).sqrt() * gain + bias


def softmax(x: ArrayLike, axis: int = -1) -> Tensor:
    return as_tensor(x).softmax(axis=axis)


def logit(p: np.ndarray, eps: float = 1e-6) -> np.ndarray:
    """Inverse of the sigmoid, with ``p`` clipped into (eps, 1 - eps)"""
    p = np.clip(np.asarray(p, dtype=np.float64), eps, 1 - eps)
    return np.log(p / (1 - p))


def l2_normalize_rows(x: ArrayLike, eps: float = 1e-12) -> Tensor:
    x = as_tensor(x)
    return x / ((x * x).sum(axis=-1, keepdims=True) + eps).sqrt()


class AttentionParams(NamedTuple):
    q_weight: Tensor
    q_bias: Tensor
    k_weight: Tensor
    k_bias: Tensor
    v_weight: Tensor
    v_bias: Tensor
    out_weight: Tensor
    out_bias: Tensor


def multi_head_attention(queries: ArrayLike, keys_values: ArrayLike,
                         params: AttentionParams, n_heads: int) -> Tensor:
    """Scaled dot-product attention of every query row over all key/value rows.

    Self-attention is the case ``queries is keys_values``. No masking and no
    positional terms are applied.
    """
    queries, keys_values = as_tensor(queries), as_tensor(keys_values)
    num_queries, dim = queries.shape
    num_keys = keys_values.shape[0]

    if n_heads < 1 or dim % n_heads:
        raise ConfigurationError(f'Cannot split width {dim} into {n_heads} heads')
    head_dim = dim // n_heads

    q = linear(queries, params.q_weight, params.q_bias)
    k = linear(keys_values, params.k_weight, params.k_bias)
    v = linear(keys_values, params.v_weight, params.v_bias)

    # heads x rows x head_dim
    q = q.reshape(num_queries, n_heads, head_dim).transpose(1, 0, 2)
    k = k.reshape(num_keys, n_heads, head_dim).transpose(1, 2, 0)
    v = v.reshape(num_keys, n_heads, head_dim).transpose(1, 0, 2)

    scores = (q @ k) * (1.0 / np.sqrt(head_dim))
    attended = scores.softmax(axis=-1) @ v

    merged = attended.transpose(1, 0, 2).reshape(num_queries, dim)
    return linear(merged, params.out_weight, params.out_bias)


class MLPParams(NamedTuple):
    hidden_weight: Tensor
    hidden_bias: Tensor
    out_weight: Tensor
    out_bias: Tensor


def mlp(x: ArrayLike, params: MLPParams) -> Tensor:
    """Two linear maps with a ReLU in between"""
    hidden = linear(x, params.hidden_weight, params.hidden_bias).relu()
    return linear(hidden, params.out_weight, params.out_bias)
