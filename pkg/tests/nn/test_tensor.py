import numpy as np
import pytest


def _leaf(rng, *shape, positive=False):
    from mutdet.nn.tensor import Tensor
    data = rng.uniform(0.5, 2.0, size=shape) if positive else rng.normal(size=shape)
    return Tensor(data, requires_grad=True)


UNARY_OPS = {
    'exp': lambda x: x.exp(),
    'log': lambda x: x.log(),
    'sqrt': lambda x: x.sqrt(),
    'pow': lambda x: x ** 3,
    'sigmoid': lambda x: x.sigmoid(),
    'softplus': lambda x: x.softplus(),
    'tanh': lambda x: x.tanh(),
    'neg': lambda x: -x,
    'softmax': lambda x: x.softmax(axis=-1),
    'logsumexp': lambda x: x.logsumexp(axis=0),
    'logsumexp_keepdims': lambda x: x.logsumexp(axis=-1, keepdims=True),
    'sum_axis': lambda x: x.sum(axis=1),
    'mean_keepdims': lambda x: x.mean(axis=0, keepdims=True),
    'reshape': lambda x: x.reshape(4, 3),
    'transpose': lambda x: x.T,
    'getitem_rows': lambda x: x[np.array([2, 0, 2])],
    'getitem_slice': lambda x: x[:, 1:3],
}


@pytest.mark.parametrize('op_name', list(UNARY_OPS))
def test_unary_gradients(op_name):
    from mutdet.nn.gradcheck import grad_check

    for seed in range(5):
        rng = np.random.default_rng(seed)
        x = _leaf(rng, 3, 4, positive=op_name in ('log', 'sqrt'))
        weights_rng = np.random.default_rng(100 + seed)
        weights = None

        def loss():
            nonlocal weights
            out = UNARY_OPS[op_name](x)
            if weights is None:
                weights = weights_rng.normal(size=out.shape)
            return (out * weights).sum()

        report = grad_check(loss, {'x': x}, h=1e-6)
        assert report.passed, report.worst


def _binary_op(name, x, y):
    from mutdet.nn.tensor import concat

    ops = {
        'add_broadcast': lambda: x + y[0],
        'sub': lambda: x - y,
        'mul_broadcast': lambda: x * y[:1],
        'div': lambda: x / y,
        'matmul': lambda: x @ y.T,
        'concat': lambda: concat([x, y], axis=1),
    }
    return ops[name]()


@pytest.mark.parametrize('op_name', [
    'add_broadcast', 'sub', 'mul_broadcast', 'div', 'matmul', 'concat'
])
def test_binary_gradients(op_name):
    from mutdet.nn.gradcheck import grad_check

    for seed in range(5):
        rng = np.random.default_rng(seed)
        x = _leaf(rng, 3, 4)
        y = _leaf(rng, 3, 4, positive=True)
        weights = None

        def loss():
            nonlocal weights
            out = _binary_op(op_name, x, y)
            if weights is None:
                weights = np.random.default_rng(seed + 50).normal(size=out.shape)
            return (out * weights).sum()

        report = grad_check(loss, {'x': x, 'y': y}, h=1e-6)
        assert report.passed, report.worst


def test_maximum_minimum_gradients():
    from mutdet.nn.tensor import Tensor, maximum, minimum

    x = Tensor(np.array([1., 5., 3.]), requires_grad=True)
    y = Tensor(np.array([2., 4., 3.]), requires_grad=True)
    (maximum(x, y) + minimum(x, y) * 10).sum().backward()

    # ties go to the first argument
    np.testing.assert_array_equal(x.grad, [10., 1., 11.])
    np.testing.assert_array_equal(y.grad, [1., 10., 0.])


def test_abs_relu():
    from mutdet.nn.tensor import Tensor

    x = Tensor(np.array([-2., 0.5, 3.]), requires_grad=True)
    (x.abs() + x.relu() * 2).sum().backward()
    np.testing.assert_array_equal(x.grad, [-1., 3., 3.])


def test_repeated_index_accumulates():
    from mutdet.nn.tensor import Tensor

    x = Tensor(np.arange(3.), requires_grad=True)
    x[np.array([1, 1, 2])].sum().backward()
    np.testing.assert_array_equal(x.grad, [0., 2., 1.])


def test_shared_subgraph_accumulates():
    from mutdet.nn.tensor import Tensor

    x = Tensor(np.array([2.]), requires_grad=True)
    y = x * x
    (y + y * 3).sum().backward()
    np.testing.assert_allclose(x.grad, [16.])


def test_detach_stops_gradient():
    from mutdet.nn.tensor import Tensor

    x = Tensor(np.array([1., 2.]), requires_grad=True)
    (x * x.detach()).sum().backward()
    np.testing.assert_array_equal(x.grad, [1., 2.])


def test_backward_requires_scalar():
    from mutdet.nn.tensor import Tensor

    x = Tensor(np.ones(3), requires_grad=True)
    with pytest.raises(ValueError):
        (x * 2).backward()


def test_no_grad_without_leaves():
    from mutdet.nn.tensor import Tensor

    x = Tensor(np.ones(3))
    out = (x * 2).sum()
    assert not out.requires_grad
    out.backward()
    assert x.grad is None


def test_softmax_stable():
    from mutdet.nn.tensor import Tensor

    out = Tensor(np.array([[1000., 1000.], [-1000., 0.]])).softmax()
    np.testing.assert_allclose(out.data, [[0.5, 0.5], [0., 1.]])

    lse = Tensor(np.array([1000., 1000.])).logsumexp()
    assert lse.item() == pytest.approx(1000 + np.log(2))


def test_deep_graph():
    from mutdet.nn.tensor import Tensor

    x = Tensor(np.array([1.]), requires_grad=True)
    y = x
    for _ in range(5000):
        y = y + 1e-3 * x
    y.sum().backward()
    assert x.grad[0] == pytest.approx(6.0)
