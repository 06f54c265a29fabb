"""nn/layers.py

Parameterized layers that register their weights in a ParamStore.
"""

from typing import Optional

import numpy as np

from mutdet.nn import functional as F
from mutdet.nn.params import ParamStore
from mutdet.nn.tensor import ArrayLike, Tensor


def uniform_init(rng: np.random.Generator, fan_in: int, shape: tuple) -> np.ndarray:
    bound = np.sqrt(1.0 / fan_in)
    return rng.uniform(-bound, bound, size=shape)


class Module:
    """Base class for layers living under a name prefix in a ParamStore"""

    def __init__(self, store: ParamStore, name: str) -> None:
        self.store = store
        self.name = name

    def param(self, suffix: str) -> Tensor:
        return self.store[f'{self.name}.{suffix}']

    def register(self, suffix: str, value: np.ndarray) -> Tensor:
        return self.store.add(f'{self.name}.{suffix}', value)


class Linear(Module):
    def __init__(self, store: ParamStore, name: str, dim_in: int, dim_out: int,
                 rng: np.random.Generator) -> None:
        super().__init__(store, name)
        self.dim_in, self.dim_out = dim_in, dim_out
        self.register('weight', uniform_init(rng, dim_in, (dim_out, dim_in)))
        self.register('bias', np.zeros(dim_out))

    def __call__(self, x: ArrayLike) -> Tensor:
        return F.linear(x, self.param('weight'), self.param('bias'))


class LayerNorm(Module):
    def __init__(self, store: ParamStore, name: str, dim: int) -> None:
        super().__init__(store, name)
        self.register('gain', np.ones(dim))
        self.register('bias', np.zeros(dim))

    def __call__(self, x: ArrayLike) -> Tensor:
        return F.layer_norm(x, self.param('gain'), self.param('bias'))


class MultiHeadAttention(Module):
    def __init__(self, store: ParamStore, name: str, dim: int, n_heads: int,
                 rng: np.random.Generator) -> None:
        super().__init__(store, name)
        self.n_heads = n_heads
        self.projections = {
            key: Linear(store, f'{name}.{key}', dim, dim, rng) for key in ('q', 'k', 'v', 'out')
        }

    def params(self) -> F.AttentionParams:
        return F.AttentionParams(*(
            self.param(f'{key}.{kind}')
            for key in ('q', 'k', 'v', 'out') for kind in ('weight', 'bias')
        ))

    def __call__(self, queries: ArrayLike, keys_values: ArrayLike) -> Tensor:
        return F.multi_head_attention(queries, keys_values, self.params(), self.n_heads)


class MLP(Module):
    """Transformer feed-forward block with hidden width ``expansion * dim``"""

    def __init__(self, store: ParamStore, name: str, dim: int, rng: np.random.Generator,
                 expansion: int = 4, dim_out: Optional[int] = None) -> None:
        super().__init__(store, name)
        self.hidden = Linear(store, f'{name}.hidden', dim, expansion * dim, rng)
        self.out = Linear(store, f'{name}.out', expansion * dim, dim_out or dim, rng)

    def params(self) -> F.MLPParams:
        return F.MLPParams(
            self.param('hidden.weight'), self.param('hidden.bias'),
            self.param('out.weight'), self.param('out.bias')
        )

    def __call__(self, x: ArrayLike) -> Tensor:
        return F.mlp(x, self.params())
