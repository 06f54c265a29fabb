"""nn/tensor.py

Reverse-mode automatic differentiation over float64 numpy arrays.

Every differentiable operation is a :class:`Function` that records its parents
when applied; :meth:`Tensor.backward` walks the recorded graph in reverse
topological order and accumulates gradients into leaf tensors.
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.special import expit

ArrayLike = Union['Tensor', np.ndarray, float, int]
Index = Union[int, slice, np.ndarray, Sequence[int], Tuple[Any, ...]]


class Tensor:
    """A float64 array that can take part in gradient computations"""

    __slots__ = ('data', 'grad', 'requires_grad', '_ctx')

    def __init__(self, data: Any, requires_grad: bool = False,
                 _ctx: Optional['Function'] = None) -> None:
        self.data: np.ndarray = np.asarray(data, dtype=np.float64)
        self.grad: Optional[np.ndarray] = None
        self.requires_grad = requires_grad
        self._ctx = _ctx

    def __repr__(self) -> str:
        return f'Tensor(shape={self.shape}, requires_grad={self.requires_grad})'

    @property
    def shape(self) -> Tuple[int, ...]:
        return self.data.shape

    @property
    def ndim(self) -> int:
        return self.data.ndim

    def __len__(self) -> int:
        return len(self.data)

    def numpy(self) -> np.ndarray:
        return self.data

    def item(self) -> float:
        return float(self.data)

    def detach(self) -> 'Tensor':
        """Stop-gradient: same values, no history"""
        return Tensor(self.data)

    # arithmetic

    def __add__(self, other: ArrayLike) -> 'Tensor':
        return Add.apply(self, other)

    def __radd__(self, other: ArrayLike) -> 'Tensor':
        return Add.apply(other, self)

    def __sub__(self, other: ArrayLike) -> 'Tensor':
        return Sub.apply(self, other)

    def __rsub__(self, other: ArrayLike) -> 'Tensor':
        return Sub.apply(other, self)

    def __mul__(self, other: ArrayLike) -> 'Tensor':
        return Mul.apply(self, other)

    def __rmul__(self, other: ArrayLike) -> 'Tensor':
        return Mul.apply(other, self)

    def __truediv__(self, other: ArrayLike) -> 'Tensor':
        return Div.apply(self, other)

    def __rtruediv__(self, other: ArrayLike) -> 'Tensor':
        return Div.apply(other, self)

    def __neg__(self) -> 'Tensor':
        return Neg.apply(self)

    def __matmul__(self, other: ArrayLike) -> 'Tensor':
        return MatMul.apply(self, other)

    def __pow__(self, exponent: float) -> 'Tensor':
        return Pow.apply(self, exponent=float(exponent))

    def __getitem__(self, index: Index) -> 'Tensor':
        return GetItem.apply(self, index=index)

    # reductions and elementwise maps

    def sum(self, axis: Optional[int] = None, keepdims: bool = False) -> 'Tensor':
        return Sum.apply(self, axis=axis, keepdims=keepdims)

    def mean(self, axis: Optional[int] = None, keepdims: bool = False) -> 'Tensor':
        count = self.data.size if axis is None else self.data.shape[axis]
        return self.sum(axis=axis, keepdims=keepdims) * (1.0 / count)

    def exp(self) -> 'Tensor':
        return Exp.apply(self)

    def log(self) -> 'Tensor':
        return Log.apply(self)

    def sqrt(self) -> 'Tensor':
        return Sqrt.apply(self)

    def abs(self) -> 'Tensor':
        return Abs.apply(self)

    def relu(self) -> 'Tensor':
        return ReLU.apply(self)

    def sigmoid(self) -> 'Tensor':
        return Sigmoid.apply(self)

    def softplus(self) -> 'Tensor':
        return Softplus.apply(self)

    def tanh(self) -> 'Tensor':
        return Tanh.apply(self)

    def softmax(self, axis: int = -1) -> 'Tensor':
        return Softmax.apply(self, axis=axis)

    def logsumexp(self, axis: int = -1, keepdims: bool = False) -> 'Tensor':
        return LogSumExp.apply(self, axis=axis, keepdims=keepdims)

    # shape manipulation

    def reshape(self, *shape: int) -> 'Tensor':
        return Reshape.apply(self, shape=shape)

    def transpose(self, *axes: int) -> 'Tensor':
        return Transpose.apply(self, axes=axes or None)

    @property
    def T(self) -> 'Tensor':
        return self.transpose()

    # autograd

    def backward(self, grad: Optional[np.ndarray] = None) -> None:
        """Accumulate d(self)/d(leaf) into ``leaf.grad`` for every leaf requiring grad"""
        if grad is None:
            if self.data.size != 1:
                raise ValueError('Gradient must be given for non-scalar outputs')
            grad = np.ones_like(self.data)

        if not self.requires_grad:
            return

        pending: Dict[int, np.ndarray] = {id(self): np.asarray(grad, dtype=np.float64)}

        for node in reversed(_toposort(self)):
            node_grad = pending.pop(id(node), None)
            if node_grad is None:
                continue

            if node._ctx is None:
                if node.grad is None:
                    node.grad = np.array(node_grad, dtype=np.float64)
                else:
                    node.grad = node.grad + node_grad
                continue

            ctx = node._ctx
            parent_grads = ctx.backward(node_grad)
            for parent, parent_grad in zip(ctx.parents, parent_grads):
                if parent_grad is None or not parent.requires_grad:
                    continue
                parent_grad = _unbroadcast(parent_grad, parent.data.shape)
                key = id(parent)
                if key in pending:
                    pending[key] = pending[key] + parent_grad
                else:
                    pending[key] = parent_grad


def as_tensor(value: ArrayLike) -> Tensor:
    if isinstance(value, Tensor):
        return value
    return Tensor(value)


def _toposort(root: Tensor) -> List[Tensor]:
    # iterative post-order so deep graphs do not hit the recursion limit
    order: List[Tensor] = []
    visited = set()
    stack: List[Tuple[Tensor, bool]] = [(root, False)]

    while stack:
        node, expanded = stack.pop()
        if expanded:
            order.append(node)
            continue
        if id(node) in visited:
            continue
        visited.add(id(node))
        stack.append((node, True))
        if node._ctx is not None:
            for parent in node._ctx.parents:
                if parent.requires_grad and id(parent) not in visited:
                    stack.append((parent, False))

    return order


def _unbroadcast(grad: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
    """Sum a broadcast gradient back to the shape of its operand"""
    grad = np.asarray(grad)
    while grad.ndim > len(shape):
        grad = grad.sum(axis=0)
    for axis, size in enumerate(shape):
        if size == 1 and grad.shape[axis] != 1:
            grad = grad.sum(axis=axis, keepdims=True)
    return grad.reshape(shape)


GradTuple = Tuple[Optional[np.ndarray], ...]


class Function:
    """Base class of all recorded operations"""

    def __init__(self, *parents: Tensor) -> None:
        self.parents = parents

    @classmethod
    def apply(cls, *args: ArrayLike, **kwargs: Any) -> Tensor:
        parents = tuple(as_tensor(arg) for arg in args)
        ctx = cls(*parents)
        out = ctx.forward(*(p.data for p in parents), **kwargs)
        requires_grad = any(p.requires_grad for p in parents)
        return Tensor(out, requires_grad=requires_grad, _ctx=ctx if requires_grad else None)

    def forward(self, *args: Any, **kwargs: Any) -> np.ndarray:
        raise NotImplementedError

    def backward(self, grad: np.ndarray) -> GradTuple:
        raise NotImplementedError


class Add(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return x + y

    def backward(self, grad: np.ndarray) -> GradTuple:
        return grad, grad


class Sub(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        return x - y

    def backward(self, grad: np.ndarray) -> GradTuple:
        return grad, -grad


class Mul(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.x, self.y = x, y
        return x * y

    def backward(self, grad: np.ndarray) -> GradTuple:
        return grad * self.y, grad * self.x


class Div(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.x, self.y = x, y
        return x / y

    def backward(self, grad: np.ndarray) -> GradTuple:
        return grad / self.y, -grad * self.x / (self.y * self.y)


class Neg(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        return -x

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (-grad,)


class MatMul(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        if x.ndim < 2 or y.ndim < 2:
            raise ValueError('matmul operands must be at least two-dimensional')
        self.x, self.y = x, y
        return x @ y

    def backward(self, grad: np.ndarray) -> GradTuple:
        return grad @ np.swapaxes(self.y, -1, -2), np.swapaxes(self.x, -1, -2) @ grad


class Pow(Function):
    def forward(self, x: np.ndarray, exponent: float) -> np.ndarray:
        self.x, self.exponent = x, exponent
        return x ** exponent

    def backward(self, grad: np.ndarray) -> GradTuple:
        if self.exponent == 1.0:
            return (grad,)
        return (grad * self.exponent * self.x ** (self.exponent - 1.0),)


class Sum(Function):
    def forward(self, x: np.ndarray, axis: Optional[int], keepdims: bool) -> np.ndarray:
        self.shape, self.axis, self.keepdims = x.shape, axis, keepdims
        return x.sum(axis=axis, keepdims=keepdims)

    def backward(self, grad: np.ndarray) -> GradTuple:
        if self.axis is not None and not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (np.broadcast_to(grad, self.shape),)


class Exp(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = np.exp(x)
        return self.out

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad * self.out,)


class Log(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.x = x
        return np.log(x)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad / self.x,)


class Sqrt(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = np.sqrt(x)
        return self.out

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad / (2.0 * self.out),)


class Abs(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.sign = np.sign(x)
        return np.abs(x)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad * self.sign,)


class ReLU(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.mask = x > 0
        return np.where(self.mask, x, 0.0)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad * self.mask,)


class Sigmoid(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = expit(x)
        return self.out

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad * self.out * (1.0 - self.out),)


class Softplus(Function):
    """log(1 + exp(x)) without overflow"""

    def forward(self, x: np.ndarray) -> np.ndarray:
        self.x = x
        return np.logaddexp(0.0, x)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad * expit(self.x),)


class Tanh(Function):
    def forward(self, x: np.ndarray) -> np.ndarray:
        self.out = np.tanh(x)
        return self.out

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad * (1.0 - self.out * self.out),)


class Maximum(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.mask = x >= y
        return np.where(self.mask, x, y)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return grad * self.mask, grad * ~self.mask


class Minimum(Function):
    def forward(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        self.mask = x <= y
        return np.where(self.mask, x, y)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return grad * self.mask, grad * ~self.mask


class Softmax(Function):
    def forward(self, x: np.ndarray, axis: int) -> np.ndarray:
        shifted = np.exp(x - x.max(axis=axis, keepdims=True))
        self.out, self.axis = shifted / shifted.sum(axis=axis, keepdims=True), axis
        return self.out

    def backward(self, grad: np.ndarray) -> GradTuple:
        y = self.out
        return (y * (grad - (grad * y).sum(axis=self.axis, keepdims=True)),)


class LogSumExp(Function):
    def forward(self, x: np.ndarray, axis: int, keepdims: bool) -> np.ndarray:
        peak = x.max(axis=axis, keepdims=True)
        shifted = np.exp(x - peak)
        total = shifted.sum(axis=axis, keepdims=True)
        self.weights, self.axis, self.keepdims = shifted / total, axis, keepdims
        out = peak + np.log(total)
        return out if keepdims else np.squeeze(out, axis=axis)

    def backward(self, grad: np.ndarray) -> GradTuple:
        if not self.keepdims:
            grad = np.expand_dims(grad, self.axis)
        return (grad * self.weights,)


class Reshape(Function):
    def forward(self, x: np.ndarray, shape: Tuple[int, ...]) -> np.ndarray:
        self.shape = x.shape
        return x.reshape(shape)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return (grad.reshape(self.shape),)


class Transpose(Function):
    def forward(self, x: np.ndarray, axes: Optional[Tuple[int, ...]]) -> np.ndarray:
        self.axes = axes
        return np.ascontiguousarray(np.transpose(x, axes))

    def backward(self, grad: np.ndarray) -> GradTuple:
        if self.axes is None:
            return (np.transpose(grad),)
        return (np.transpose(grad, np.argsort(self.axes)),)


class GetItem(Function):
    def forward(self, x: np.ndarray, index: Index) -> np.ndarray:
        self.shape, self.index = x.shape, index
        return np.array(x[index])

    def backward(self, grad: np.ndarray) -> GradTuple:
        full = np.zeros(self.shape)
        np.add.at(full, self.index, grad)
        return (full,)


class Concat(Function):
    def forward(self, *arrays: np.ndarray, axis: int = 0) -> np.ndarray:
        self.axis = axis
        self.splits = np.cumsum([a.shape[axis] for a in arrays])[:-1]
        return np.concatenate(arrays, axis=axis)

    def backward(self, grad: np.ndarray) -> GradTuple:
        return tuple(np.split(grad, self.splits, axis=self.axis))


def maximum(x: ArrayLike, y: ArrayLike) -> Tensor:
    return Maximum.apply(x, y)


def minimum(x: ArrayLike, y: ArrayLike) -> Tensor:
    return Minimum.apply(x, y)


def concat(tensors: Sequence[ArrayLike], axis: int = 0) -> Tensor:
    return Concat.apply(*tensors, axis=axis)


def stack_rows(tensors: Sequence[ArrayLike]) -> Tensor:
    """Stack 1D tensors into the rows of a matrix"""
    return concat([as_tensor(t).reshape(1, -1) for t in tensors], axis=0)
