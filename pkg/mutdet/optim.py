"""optim.py

Adaptive-moment optimizer with decoupled weight decay, and the learning-rate schedule.
"""

from typing import Dict, Optional, Tuple

import numpy as np

from mutdet.config import TrainConfig
from mutdet.nn.params import ParamStore


class AdamW:
    """Updates every parameter of a store in place from its accumulated gradient.

    Weight decay shrinks the parameter directly (``p -= lr * wd * p``) instead
    of being added to the gradient.
    """

    def __init__(self, store: ParamStore, lr: float = 1e-4,
                 betas: Tuple[float, float] = (0.9, 0.999), eps: float = 1e-8,
                 weight_decay: float = 1e-4) -> None:
        self.store = store
        self.lr = lr
        self.betas = betas
        self.eps = eps
        self.weight_decay = weight_decay
        self.steps = 0
        self.first_moments: Dict[str, np.ndarray] = {
            name: np.zeros_like(p.data) for name, p in store.items()
        }
        self.second_moments: Dict[str, np.ndarray] = {
            name: np.zeros_like(p.data) for name, p in store.items()
        }

    @classmethod
    def from_config(cls, store: ParamStore, config: TrainConfig) -> 'AdamW':
        return cls(store, lr=config.learning_rate, betas=(config.beta1, config.beta2),
                   eps=config.adam_eps, weight_decay=config.weight_decay)

    def step(self, lr: Optional[float] = None) -> None:
        lr = self.lr if lr is None else lr
        beta1, beta2 = self.betas
        self.steps += 1
        bias1 = 1 - beta1 ** self.steps
        bias2 = 1 - beta2 ** self.steps

        for name, param in self.store.items():
            grad = param.grad if param.grad is not None else np.zeros_like(param.data)
            m = self.first_moments[name] = beta1 * self.first_moments[name] + (1 - beta1) * grad
            v = self.second_moments[name] = (
                beta2 * self.second_moments[name] + (1 - beta2) * grad * grad
            )
            update = (m / bias1) / (np.sqrt(v / bias2) + self.eps)
            param.data = param.data * (1 - lr * self.weight_decay) - lr * update


def learning_rate(config: TrainConfig, iteration: int, epoch: int) -> float:
    """Linear warmup over the first ``warmup_iters`` iterations, then a step decay"""
    rate = config.learning_rate
    if config.warmup_iters > 0:
        rate *= min(1.0, (iteration + 1) / config.warmup_iters)
    if epoch >= config.lr_decay_epoch:
        rate *= config.lr_decay_factor
    return rate
