import pytest

import numpy as np


TINY_DETECTOR = dict(
    dim=16,
    num_queries=6,
    num_classes=3,
    angle_bins=12,
    image_size=32,
    patch_sizes=(8, 16),
    encoder_layers=1,
    decoder_layers=2,
    enhancement_layers=2,
)

TINY_TRAINING = dict(
    seed=0,
    epochs=2,
    batch_size=2,
    learning_rate=1e-3,
    warmup_iters=2,
    lr_decay_epoch=2,
    csl_sigma=1.0,
    csl_radius=2,
)


@pytest.fixture(autouse=True)
def restore_settings():
    """Wipe settings after every test"""
    import mutdet
    from mutdet.config import MutDetSettings

    try:
        yield
    finally:
        mutdet._settings = MutDetSettings()
        mutdet._overwritten_settings = set()


@pytest.fixture()
def tiny_config():
    from mutdet.config import DetectorConfig
    return DetectorConfig(**TINY_DETECTOR)


@pytest.fixture()
def tiny_train_config():
    from mutdet.config import TrainConfig
    return TrainConfig(**TINY_TRAINING)


@pytest.fixture()
def scene():
    from mutdet.dataset import generate_scene
    return generate_scene(seed=3, n_objects=3, size=32)


@pytest.fixture(scope='session')
def synthetic_dataset(tmpdir_factory):
    from pathlib import Path
    from mutdet.dataset import generate_dataset

    directory = Path(str(tmpdir_factory.mktemp('dataset')))
    generate_dataset(directory, seed=0, count=6, max_objects=3, size=32)
    return directory


@pytest.fixture(scope='session')
def label_store(synthetic_dataset, tmpdir_factory):
    from pathlib import Path
    from mutdet.config import DetectorConfig
    from mutdet.dataset import load_dataset
    from mutdet.detector.backbone import FrozenBackbone
    from mutdet.labels import write_label_store
    from mutdet.labels.pipeline import prepare_labels

    scenes = load_dataset(synthetic_dataset)
    backbone = FrozenBackbone(DetectorConfig(**TINY_DETECTOR), use_cache=False)
    result = prepare_labels(scenes, backbone, clusters=3, dim=TINY_DETECTOR['dim'], seed=0)

    path = Path(str(tmpdir_factory.mktemp('labels'))) / 'dataset.plabels.jsonl'
    write_label_store(path, result.label_sets)
    return path


@pytest.fixture()
def labelled_scene(scene, tiny_config):
    """One scene with pseudo-labels whose embeddings match the tiny detector width"""
    from mutdet.geometry import min_area_rect
    from mutdet.labels.store import PseudoLabel, PseudoLabelSet

    rng = np.random.default_rng(0)
    entries = []
    for index, instance in enumerate(scene.instances):
        box = min_area_rect(instance.points)
        embedding = rng.normal(size=tiny_config.dim)
        embedding /= np.linalg.norm(embedding)
        entries.append(PseudoLabel(box, index % tiny_config.num_classes, box.angle,
                                   tuple(embedding.tolist())))

    return scene, PseudoLabelSet(scene.image_id, tuple(entries))


@pytest.fixture()
def run_config_file(tmpdir):
    """Flat TOML run configuration of the tiny detector, one epoch"""
    import toml

    config = {**TINY_DETECTOR, **TINY_TRAINING, 'epochs': 1, 'lr_decay_epoch': 1}
    config['patch_sizes'] = list(config['patch_sizes'])

    path = tmpdir.join('run.toml')
    path.write(toml.dumps(config))
    return str(path)
