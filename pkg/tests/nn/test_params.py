import numpy as np
import pytest


def test_param_store_basics():
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    weight = store.add('layer.weight', np.ones((2, 3)))
    store.add('layer.bias', np.zeros(2))
    store.add('other.gain', np.ones(4))

    assert len(store) == 3
    assert 'layer.weight' in store
    assert store.size == 12
    assert store['layer.weight'] is weight
    assert weight.requires_grad
    assert set(store.subset('layer.')) == {'layer.weight', 'layer.bias'}


def test_param_store_duplicate():
    from mutdet.nn.params import ParamStore
    from mutdet.exceptions import InvalidArgumentsError

    store = ParamStore()
    store.add('a', np.ones(2))
    with pytest.raises(InvalidArgumentsError):
        store.add('a', np.ones(2))


def test_param_store_copies_input():
    from mutdet.nn.params import ParamStore

    value = np.ones(3)
    store = ParamStore()
    store.add('a', value)
    value[0] = 5
    assert store['a'].data[0] == 1


def test_zero_grad_and_grads():
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    a = store.add('a', np.array([1., 2.]))
    (a * a).sum().backward()
    np.testing.assert_array_equal(store.grads()['a'], [2., 4.])

    store.zero_grad()
    np.testing.assert_array_equal(store.grads()['a'], [0., 0.])


def test_state_roundtrip():
    from mutdet.nn.params import ParamStore
    from mutdet.exceptions import InvalidArgumentsError

    store = ParamStore()
    store.add('a', np.array([1., 2.]))
    store.add('b', np.eye(2))
    state = store.state()

    state['a'][0] = 10
    assert store['a'].data[0] == 1

    store.load_state(state)
    assert store['a'].data[0] == 10

    with pytest.raises(InvalidArgumentsError):
        store.load_state({'a': np.zeros(2)})

    with pytest.raises(InvalidArgumentsError):
        store.load_state({'a': np.zeros(3), 'b': np.eye(2)})


def test_track_access():
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    store.add('a', np.ones(1))
    store.add('b', np.ones(1))

    with store.track_access() as outer:
        store['a']
        with store.track_access() as inner:
            store['b']
        list(store.items())

    assert inner == {'b'}
    assert outer == {'a', 'b'}
