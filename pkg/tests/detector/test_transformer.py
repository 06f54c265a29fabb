import numpy as np
import pytest


def test_sinusoidal_positions():
    from mutdet.detector.transformer import sinusoidal_positions

    encoding = sinusoidal_positions(np.array([[0.0, 0.0], [0.5, 0.25]]), 8)
    assert encoding.shape == (2, 8)
    np.testing.assert_array_equal(encoding[0], [0, 0, 1, 1, 0, 0, 1, 1])
    assert encoding[1, 0] == pytest.approx(np.sin(np.pi))
    assert encoding[1, 4] == pytest.approx(np.sin(np.pi / 2))


def test_multiscale_positions_are_distinct(tiny_config):
    from mutdet.detector.backbone import FrozenBackbone
    from mutdet.detector.transformer import multiscale_positions

    positions = FrozenBackbone(tiny_config, use_cache=False).token_positions()
    encoding = multiscale_positions(positions, tiny_config.dim)
    assert encoding.shape == (tiny_config.num_tokens, tiny_config.dim)
    assert len({row.tobytes() for row in encoding[:16]}) == 16


def test_encoder_without_layers(tiny_config):
    from mutdet.detector.transformer import Encoder
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    encoder = Encoder(store, 'encoder', tiny_config._replace(encoder_layers=0),
                      np.random.default_rng(0))
    rng = np.random.default_rng(1)
    tokens, positions = rng.normal(size=(5, 16)), rng.normal(size=(5, 16))

    assert len(store) == 0
    np.testing.assert_array_equal(encoder(tokens, positions).data, tokens + positions)


def test_encoder_layer_permutation_equivariant():
    from mutdet.detector.transformer import EncoderLayer
    from mutdet.nn.params import ParamStore

    rng = np.random.default_rng(2)
    layer = EncoderLayer(ParamStore(), 'enc', 8, 2, rng)
    x = rng.normal(size=(6, 8))
    permutation = rng.permutation(6)

    np.testing.assert_allclose(layer(x[permutation]).data, layer(x).data[permutation],
                               atol=1e-12)


def test_decoder_outputs(tiny_config):
    from mutdet.detector.transformer import Decoder
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    rng = np.random.default_rng(0)
    decoder = Decoder(store, 'decoder', tiny_config, rng)
    outputs = decoder(rng.normal(size=(20, 16)), rng.normal(size=(6, 16)))

    assert len(outputs) == tiny_config.decoder_layers
    for output in outputs:
        assert output.boxes.shape == (6, 4)
        assert output.class_logits.shape == (6, tiny_config.num_classes)
        assert output.angle_logits.shape == (6, tiny_config.angle_bins)
        assert output.embeddings.shape == (6, tiny_config.dim)
        assert np.all((output.boxes.data > 0) & (output.boxes.data < 1))

    # one set of heads for all layers
    assert sum(name.startswith('decoder.heads.cls') for name in store) == 2


def test_heads_prior(tiny_config):
    from mutdet.detector.heads import PRIOR_PROBABILITY, PredictionHeads
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    heads = PredictionHeads(store, 'heads', tiny_config, np.random.default_rng(0))
    output = heads(np.zeros((3, 16)))

    probabilities = 1 / (1 + np.exp(-output.class_logits.data))
    np.testing.assert_allclose(probabilities, PRIOR_PROBABILITY)

    subset = output.take([2, 0])
    assert subset.num_predictions == 2


def test_heads_reference(tiny_config):
    from mutdet.detector.heads import PredictionHeads
    from mutdet.nn.params import ParamStore

    store = ParamStore()
    heads = PredictionHeads(store, 'heads', tiny_config, np.random.default_rng(0))
    x = np.random.default_rng(1).normal(size=(3, 16))
    reference = np.array([[0., 0., -1., -1.], [2., -2., 0., 0.], [0., 1., 2., 3.]])

    free = heads(x)
    refined = heads(x, reference)
    np.testing.assert_allclose(refined.box_logits.data, free.box_logits.data + reference)
    np.testing.assert_allclose(refined.boxes.data, 1 / (1 + np.exp(-refined.box_logits.data)))
    np.testing.assert_array_equal(refined.embeddings.data, free.embeddings.data)
