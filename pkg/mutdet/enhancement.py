"""enhancement.py

Mutual enhancement of object embeddings and encoder features.

Each layer lets the object embeddings ``O`` attend to themselves and to the
encoder features ``F``, then lets ``F`` attend to the updated objects:

    O'      = LN(MHSA(O) + O)
    O''     = LN(MHCA(O', F) + O')
    O_next  = LN(MLP(O'') + O'')
    F_next  = LN(MHCA(F, O_next) + F)

No positional encodings are used on either side.
"""

from typing import List, Sequence, Tuple

import numpy as np

from mutdet.nn.layers import MLP, LayerNorm, Module, MultiHeadAttention
from mutdet.nn.params import ParamStore
from mutdet.nn.tensor import ArrayLike, Tensor, as_tensor

DEFAULT_PREFIX = 'enhance'


class EnhancementLayer(Module):
    """One bidirectional fusion layer.

    Owns one self-attention block, two cross-attention blocks with separate
    weights (object side ``ca_obj`` and feature side ``ca_feat``), one MLP and
    four independent layer norms ``ln0`` to ``ln3``.
    """

    def __init__(self, store: ParamStore, name: str, dim: int, n_heads: int,
                 rng: np.random.Generator) -> None:
        super().__init__(store, name)
        self.self_attention = MultiHeadAttention(store, f'{name}.sa', dim, n_heads, rng)
        self.object_attention = MultiHeadAttention(store, f'{name}.ca_obj', dim, n_heads, rng)
        self.feature_attention = MultiHeadAttention(store, f'{name}.ca_feat', dim, n_heads, rng)
        self.mlp = MLP(store, f'{name}.mlp', dim, rng)
        self.norms = [LayerNorm(store, f'{name}.ln{i}', dim) for i in range(4)]

    def __call__(self, objects: ArrayLike, features: ArrayLike) -> Tuple[Tensor, Tensor]:
        objects, features = as_tensor(objects), as_tensor(features)

        if objects.shape[0] == 0:
            # nothing to fuse; the feature side still passes its final norm
            return objects, self.norms[3](features)

        o = self.norms[0](self.self_attention(objects, objects) + objects)
        o = self.norms[1](self.object_attention(o, features) + o)
        o = self.norms[2](self.mlp(o) + o)
        f = self.norms[3](self.feature_attention(features, o) + features)
        return o, f


def enhancement_layer(objects: ArrayLike, features: ArrayLike,
                      layer: EnhancementLayer) -> Tuple[Tensor, Tensor]:
    return layer(objects, features)


def mutual_enhance(objects: ArrayLike, features: ArrayLike,
                   layers: Sequence[EnhancementLayer]) -> Tuple[Tensor, Tensor]:
    """Apply the layers in order; returns ``(O_enh, F_enh)``"""
    o, f = as_tensor(objects), as_tensor(features)
    for layer in layers:
        o, f = layer(o, f)
    return o, f


class MutualEnhancement:
    """Stack of enhancement layers registered under ``enhance.<i>``"""

    def __init__(self, store: ParamStore, dim: int, n_heads: int, num_layers: int,
                 rng: np.random.Generator, prefix: str = DEFAULT_PREFIX) -> None:
        self.layers: List[EnhancementLayer] = [
            EnhancementLayer(store, f'{prefix}.{i}', dim, n_heads, rng) for i in range(num_layers)
        ]

    def __call__(self, objects: ArrayLike, features: ArrayLike) -> Tuple[Tensor, Tensor]:
        return mutual_enhance(objects, features, self.layers)
