"""nn/params.py

Named store of trainable parameters and their gradient accumulators.
"""

from typing import Dict, Iterator, Mapping, Optional, Set, Tuple
import contextlib

import numpy as np

from mutdet.exceptions import InvalidArgumentsError
from mutdet.nn.tensor import Tensor


class ParamStore:
    """Ordered mapping from parameter names to leaf tensors.

    Reading a parameter through ``store[name]`` can be recorded with
    :meth:`track_access`, which is how the fine-tuning graph proves it never
    touches the enhancement module.
    """

    def __init__(self) -> None:
        self._params: Dict[str, Tensor] = {}
        self._access_log: Optional[Set[str]] = None

    def add(self, name: str, value: np.ndarray) -> Tensor:
        if name in self._params:
            raise InvalidArgumentsError(f'Parameter {name} already exists')
        param = Tensor(np.array(value, dtype=np.float64), requires_grad=True)
        param.grad = np.zeros_like(param.data)
        self._params[name] = param
        return param

    def __getitem__(self, name: str) -> Tensor:
        if self._access_log is not None:
            self._access_log.add(name)
        return self._params[name]

    def __contains__(self, name: object) -> bool:
        return name in self._params

    def __iter__(self) -> Iterator[str]:
        return iter(self._params)

    def __len__(self) -> int:
        return len(self._params)

    def items(self) -> Iterator[Tuple[str, Tensor]]:
        # bypasses access tracking
        return iter(self._params.items())

    def subset(self, prefix: str) -> Dict[str, Tensor]:
        return {name: p for name, p in self._params.items() if name.startswith(prefix)}

    @property
    def size(self) -> int:
        """Total number of scalar parameters"""
        return sum(p.data.size for p in self._params.values())

    def zero_grad(self) -> None:
        for param in self._params.values():
            param.grad = np.zeros_like(param.data)

    def grads(self) -> Dict[str, np.ndarray]:
        return {
            name: (p.grad if p.grad is not None else np.zeros_like(p.data)).copy()
            for name, p in self._params.items()
        }

    def state(self) -> Dict[str, np.ndarray]:
        return {name: p.data.copy() for name, p in self._params.items()}

    def load_state(self, state: Mapping[str, np.ndarray]) -> None:
        missing = set(self._params) - set(state)
        unexpected = set(state) - set(self._params)
        if missing or unexpected:
            raise InvalidArgumentsError(
                f'State does not match parameters (missing: {sorted(missing)}, '
                f'unexpected: {sorted(unexpected)})'
            )
        for name, value in state.items():
            param = self._params[name]
            value = np.asarray(value, dtype=np.float64)
            if value.shape != param.data.shape:
                raise InvalidArgumentsError(
                    f'Shape mismatch for {name}: {value.shape} != {param.data.shape}'
                )
            param.data = value.copy()
        self.zero_grad()

    @contextlib.contextmanager
    def track_access(self) -> Iterator[Set[str]]:
        """Record the names of all parameters read inside the block"""
        previous = self._access_log
        accessed: Set[str] = set()
        self._access_log = accessed
        try:
            yield accessed
        finally:
            self._access_log = previous
            if previous is not None:
                previous |= accessed
