"""nn/gradcheck.py

Compare analytic gradients against central finite differences.
"""

from typing import Callable, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from mutdet.nn.tensor import Tensor


class GradCheckEntry(NamedTuple):
    name: str
    index: Tuple[int, ...]
    analytic: float
    numeric: float
    rel_error: float

    @property
    def abs_error(self) -> float:
        return abs(self.analytic - self.numeric)


class GradCheckReport(NamedTuple):
    entries: List[GradCheckEntry]
    tolerance: float
    #: Absolute differences below this pass regardless of the relative error
    atol: float = 0.0

    @property
    def max_rel_error(self) -> float:
        return max((e.rel_error for e in self.entries), default=0.0)

    @property
    def worst(self) -> Optional[GradCheckEntry]:
        return max(self.entries, key=lambda e: e.rel_error, default=None)

    @property
    def failures(self) -> List[GradCheckEntry]:
        return [e for e in self.entries
                if e.rel_error >= self.tolerance and e.abs_error > self.atol]

    @property
    def passed(self) -> bool:
        return not self.failures

    @property
    def max_abs_numeric(self) -> float:
        return max((abs(e.numeric) for e in self.entries), default=0.0)


def relative_error(analytic: float, numeric: float, floor: float = 1e-8) -> float:
    return abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)


def numeric_gradient(loss_fn: Callable[[], Tensor], tensor: Tensor,
                     index: Tuple[int, ...], h: float) -> float:
    """Central difference (f(θ+h) − f(θ−h)) / 2h of one coordinate; θ is restored"""
    original = tensor.data[index]
    try:
        tensor.data[index] = original + h
        f_plus = loss_fn().item()
        tensor.data[index] = original - h
        f_minus = loss_fn().item()
    finally:
        tensor.data[index] = original
    return (f_plus - f_minus) / (2 * h)


def grad_check(loss_fn: Callable[[], Tensor], params: Mapping[str, Tensor],
               h: float = 1e-6, tol: float = 1e-4, atol: float = 1e-7,
               max_coords_per_param: Optional[int] = None,
               seed: int = 0) -> GradCheckReport:
    """Check d(loss)/d(param) for every tensor in ``params``.

    ``loss_fn`` must rebuild the scalar loss from the current tensor values on
    every call. A coordinate passes if its relative error is below ``tol`` or
    its absolute error is at most ``atol``, the finite-difference round-off
    level. With ``max_coords_per_param`` set, a seeded random subset of
    coordinates is checked per tensor.
    """
    rng = np.random.default_rng(seed)

    for tensor in params.values():
        tensor.grad = None

    loss = loss_fn()
    loss.backward()

    entries = []
    for name, tensor in params.items():
        analytic = tensor.grad if tensor.grad is not None else np.zeros_like(tensor.data)
        indices = list(np.ndindex(*tensor.data.shape))
        if max_coords_per_param is not None and len(indices) > max_coords_per_param:
            picks = rng.choice(len(indices), size=max_coords_per_param, replace=False)
            indices = [indices[i] for i in sorted(picks)]

        for index in indices:
            numeric = numeric_gradient(loss_fn, tensor, index, h)
            a = float(analytic[index])
            entries.append(GradCheckEntry(name, index, a, numeric, relative_error(a, numeric)))

    return GradCheckReport(entries, tol, atol)
