"""detector/heads.py

Per-token prediction heads: class logits, sigmoid-bounded boxes, angle-bin
logits and object embeddings.
"""

from typing import NamedTuple, Optional, Sequence, Union

import numpy as np

from mutdet.config import DetectorConfig
from mutdet.nn.layers import MLP, Linear, Module
from mutdet.nn.params import ParamStore
from mutdet.nn.tensor import ArrayLike, Tensor, as_tensor

#: Initial foreground probability of every class logit
PRIOR_PROBABILITY = 0.01


class BranchOutput(NamedTuple):
    #: N x 4 normalized (cx, cy, w, h) in (0, 1)
    boxes: Tensor
    #: N x K_cls
    class_logits: Tensor
    #: N x A_bins
    angle_logits: Tensor
    #: N x C
    embeddings: Tensor
    #: N x 4 pre-sigmoid boxes, the reference of a following refinement step
    box_logits: Tensor

    @property
    def num_predictions(self) -> int:
        return self.boxes.shape[0]

    def take(self, indices: Union[np.ndarray, Sequence[int]]) -> 'BranchOutput':
        indices = np.asarray(indices, dtype=np.int64)
        return BranchOutput(*(t[indices] for t in self))


class PredictionHeads(Module):
    def __init__(self, store: ParamStore, name: str, config: DetectorConfig,
                 rng: np.random.Generator) -> None:
        super().__init__(store, name)
        dim = config.dim
        self.classifier = Linear(store, f'{name}.cls', dim, config.num_classes, rng)
        self.box = MLP(store, f'{name}.box', dim, rng, expansion=1, dim_out=4)
        self.angle = Linear(store, f'{name}.angle', dim, config.angle_bins, rng)
        self.embed = Linear(store, f'{name}.embed', dim, dim, rng)

        prior_bias = -np.log((1 - PRIOR_PROBABILITY) / PRIOR_PROBABILITY)
        store[f'{name}.cls.bias'].data[:] = prior_bias

    def __call__(self, x: ArrayLike, reference: Optional[ArrayLike] = None) -> BranchOutput:
        """Predictions for every row of ``x``.

        With a ``reference`` (N x 4 box logits) the box branch predicts an offset
        in logit space instead of an absolute box.
        """
        x = as_tensor(x)
        box_logits = self.box(x)
        if reference is not None:
            box_logits = box_logits + reference
        return BranchOutput(
            boxes=box_logits.sigmoid(),
            class_logits=self.classifier(x),
            angle_logits=self.angle(x),
            embeddings=self.embed(x),
            box_logits=box_logits,
        )
