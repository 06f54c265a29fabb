"""detector/transformer.py

Dense-attention transformer encoder and the shared decoder.
"""

from typing import List, Optional, Sequence

import numpy as np

from mutdet.config import DetectorConfig
from mutdet.detector.heads import BranchOutput, PredictionHeads
from mutdet.nn.layers import MLP, LayerNorm, Module, MultiHeadAttention
from mutdet.nn.params import ParamStore
from mutdet.nn.tensor import ArrayLike, Tensor, as_tensor

POSITION_TEMPERATURE = 10000.


def sinusoidal_positions(positions: np.ndarray, dim: int) -> np.ndarray:
    """Fixed 2D sine/cosine encoding of normalized (x, y) positions.

    A quarter of the channels each holds sin(x), cos(x), sin(y) and cos(y) at
    geometrically spaced frequencies.
    """
    positions = np.asarray(positions, dtype=np.float64)
    quarter = dim // 4
    frequencies = 2 * np.pi / POSITION_TEMPERATURE ** (np.arange(quarter) / quarter)

    x = positions[:, 0:1] * frequencies
    y = positions[:, 1:2] * frequencies
    return np.concatenate([np.sin(x), np.cos(x), np.sin(y), np.cos(y)], axis=1)


def multiscale_positions(positions_per_scale: Sequence[np.ndarray], dim: int) -> np.ndarray:
    """Positional encodings of all scales, stacked in token order"""
    return np.concatenate([sinusoidal_positions(p, dim) for p in positions_per_scale], axis=0)


class EncoderLayer(Module):
    """Post-norm self-attention and feed-forward block"""

    def __init__(self, store: ParamStore, name: str, dim: int, n_heads: int,
                 rng: np.random.Generator) -> None:
        super().__init__(store, name)
        self.self_attention = MultiHeadAttention(store, f'{name}.sa', dim, n_heads, rng)
        self.mlp = MLP(store, f'{name}.mlp', dim, rng)
        self.norms = [LayerNorm(store, f'{name}.ln{i}', dim) for i in range(2)]

    def __call__(self, x: Tensor) -> Tensor:
        x = self.norms[0](self.self_attention(x, x) + x)
        return self.norms[1](self.mlp(x) + x)


class Encoder:
    def __init__(self, store: ParamStore, name: str, config: DetectorConfig,
                 rng: np.random.Generator) -> None:
        self.layers = [
            EncoderLayer(store, f'{name}.{i}', config.dim, config.heads, rng)
            for i in range(config.encoder_layers)
        ]

    def __call__(self, tokens: ArrayLike, positions: np.ndarray) -> Tensor:
        """``F`` from tokens; positions are added once at the input"""
        x = as_tensor(tokens) + positions
        for layer in self.layers:
            x = layer(x)
        return x


class DecoderLayer(Module):
    def __init__(self, store: ParamStore, name: str, dim: int, n_heads: int,
                 rng: np.random.Generator) -> None:
        super().__init__(store, name)
        self.self_attention = MultiHeadAttention(store, f'{name}.sa', dim, n_heads, rng)
        self.cross_attention = MultiHeadAttention(store, f'{name}.ca', dim, n_heads, rng)
        self.mlp = MLP(store, f'{name}.mlp', dim, rng)
        self.norms = [LayerNorm(store, f'{name}.ln{i}', dim) for i in range(3)]

    def __call__(self, queries: Tensor, memory: Tensor) -> Tensor:
        x = self.norms[0](self.self_attention(queries, queries) + queries)
        x = self.norms[1](self.cross_attention(x, memory) + x)
        return self.norms[2](self.mlp(x) + x)


class Decoder:
    """Decoder layers with one set of prediction heads shared by every layer.

    Everything lives under the ``decoder.`` prefix, so both the enhanced and
    the auxiliary branch run on the identical parameters.
    """

    def __init__(self, store: ParamStore, name: str, config: DetectorConfig,
                 rng: np.random.Generator) -> None:
        self.layers = [
            DecoderLayer(store, f'{name}.{i}', config.dim, config.heads, rng)
            for i in range(config.decoder_layers)
        ]
        self.heads = PredictionHeads(store, f'{name}.heads', config, rng)

    def __call__(self, memory: ArrayLike, queries: ArrayLike,
                 reference: Optional[ArrayLike] = None) -> List[BranchOutput]:
        """Predictions after every layer, first to last.

        Given ``reference`` box logits, every layer refines the boxes of the
        layer before it.
        """
        memory, x = as_tensor(memory), as_tensor(queries)
        outputs = []
        for layer in self.layers:
            x = layer(x, memory)
            output = self.heads(x, reference)
            if reference is not None:
                reference = output.box_logits
            outputs.append(output)
        return outputs
