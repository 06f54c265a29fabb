import numpy as np
import pytest


def test_learning_rate_schedule():
    from mutdet.config import TrainConfig
    from mutdet.optim import learning_rate

    config = TrainConfig(learning_rate=1e-3, warmup_iters=4, epochs=10, lr_decay_epoch=5,
                         lr_decay_factor=0.1)

    warmup = [learning_rate(config, it, 0) for it in range(6)]
    assert warmup[0] == pytest.approx(2.5e-4)
    assert np.all(np.diff(warmup) >= 0)
    assert warmup[3] == warmup[5] == 1e-3

    assert learning_rate(config, 100, 4) == 1e-3
    assert learning_rate(config, 100, 5) == pytest.approx(1e-4)
    assert learning_rate(config, 100, 9) == pytest.approx(1e-4)


def test_learning_rate_without_warmup():
    from mutdet.config import TrainConfig
    from mutdet.optim import learning_rate

    config = TrainConfig(learning_rate=1e-3, warmup_iters=0)
    assert learning_rate(config, 0, 0) == 1e-3


def _store(value):
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    store.add('w', np.array(value, dtype=float))
    return store


def test_adamw_first_step():
    from mutdet.optim import AdamW

    store = _store([1.0, -2.0, 0.5])
    store['w'].grad = np.array([0.3, -4.0, 0.0])
    optimizer = AdamW(store, lr=0.1, weight_decay=0.0, eps=1e-12)
    optimizer.step()

    # bias-corrected first step moves by lr times the gradient sign
    np.testing.assert_allclose(store['w'].data, [0.9, -1.9, 0.5], atol=1e-9)
    assert optimizer.steps == 1


def test_adamw_reference():
    from mutdet.optim import AdamW

    rng = np.random.default_rng(0)
    store = _store(rng.normal(size=4))
    optimizer = AdamW(store, lr=0.01, betas=(0.8, 0.9), eps=1e-8, weight_decay=0.1)

    p = store['w'].data.copy()
    m, v = np.zeros(4), np.zeros(4)
    for t in range(1, 6):
        grad = rng.normal(size=4)
        store['w'].grad = grad.copy()
        optimizer.step()

        m = 0.8 * m + 0.2 * grad
        v = 0.9 * v + 0.1 * grad ** 2
        update = (m / (1 - 0.8 ** t)) / (np.sqrt(v / (1 - 0.9 ** t)) + 1e-8)
        p = p * (1 - 0.01 * 0.1) - 0.01 * update

    np.testing.assert_allclose(store['w'].data, p, rtol=1e-12)


def test_adamw_decay_without_gradient():
    from mutdet.optim import AdamW

    store = _store([2.0])
    store['w'].grad = None
    AdamW(store, lr=0.5, weight_decay=0.1).step()
    assert store['w'].data[0] == pytest.approx(2.0 * 0.95)


def test_adamw_from_config():
    from mutdet.config import TrainConfig
    from mutdet.optim import AdamW

    config = TrainConfig(learning_rate=3e-4, beta1=0.5, weight_decay=0.0)
    optimizer = AdamW.from_config(_store([0.0]), config)
    assert optimizer.lr == 3e-4
    assert optimizer.betas == (0.5, config.beta2)
    assert optimizer.weight_decay == 0.0
