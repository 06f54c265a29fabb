import pytest


def test_schema_integrity():
    from mutdet import config

    settings_fields = config.MutDetSettings._fields
    schema_fields = config.SettingSchema._declared_fields
    assert set(settings_fields) == set(schema_fields)

    assert set(config.DetectorConfig._fields) == set(config.DetectorConfigSchema._declared_fields)
    assert set(config.TrainConfig._fields) == set(config.TrainConfigSchema._declared_fields)


def test_env_config(monkeypatch):
    from mutdet import config

    with monkeypatch.context() as m:
        m.setenv('MUTDET_LOG_EVERY', '10')
        assert config.parse_config().LOG_EVERY == 10

    with monkeypatch.context() as m:
        m.setenv('MUTDET_PROFILE', 'true')
        assert config.parse_config().PROFILE is True


def test_env_config_invalid(monkeypatch):
    from mutdet import config

    with monkeypatch.context() as m:
        m.setenv('MUTDET_LOG_EVERY', '0')
        with pytest.raises(ValueError):
            config.parse_config()

    with monkeypatch.context() as m:
        m.setenv('MUTDET_PROFILE', 'foo')  # not a boolean
        with pytest.raises(ValueError):
            config.parse_config()


def test_dict_config():
    from mutdet import config

    settings = config.parse_config({'FEATURE_CACHE_SIZE': 0})
    assert settings.FEATURE_CACHE_SIZE == 0


def test_mutdet_settings():
    from mutdet import config
    settings = config.parse_config()

    assert settings.LOG_EVERY

    with pytest.raises(AttributeError):
        settings.LOG_EVERY = 10


def test_update_config():
    from mutdet import get_settings, update_settings
    update_settings(LOG_EVERY=5)
    new_settings = get_settings()
    assert new_settings.LOG_EVERY == 5

    update_settings(PROFILE=True)
    new_settings = get_settings()
    assert new_settings.LOG_EVERY == 5 and new_settings.PROFILE


def test_run_config_defaults():
    from mutdet.config import DetectorConfig, TrainConfig, parse_run_config

    detector_config, train_config = parse_run_config()
    assert detector_config == DetectorConfig()
    assert train_config == TrainConfig()
    assert detector_config.heads == 1
    assert DetectorConfig(dim=64).heads == 2
    assert DetectorConfig(dim=64, num_heads=4).heads == 4


def test_run_config_split():
    from mutdet.config import parse_run_config

    detector_config, train_config = parse_run_config({
        'dim': 16, 'patch_sizes': [4, 8], 'calibration_mode': 'none',
        'epochs': 3, 'lr_decay_epoch': 2, 'temperature': 0.1,
    })
    assert detector_config.dim == 16
    assert detector_config.patch_sizes == (4, 8)
    assert detector_config.calibration_mode == 'none'
    assert train_config.epochs == 3
    assert train_config.temperature == 0.1


@pytest.mark.parametrize('config', [
    {'unknown_key': 1},
    {'dim': 0},
    {'calibration_mode': 'mutual'},
    {'temperature': -1},
    {'dim': 30},
    {'dim': 48, 'num_heads': 5},
    {'image_size': 60},
    {'num_queries': 100},
    {'epochs': 2, 'lr_decay_epoch': 3},
    {'patch_sizes': []},
])
def test_run_config_invalid(config):
    from mutdet.config import parse_run_config
    from mutdet.exceptions import ConfigurationError

    with pytest.raises(ConfigurationError):
        parse_run_config(config)


def test_load_run_config(tmpdir):
    from mutdet.config import load_run_config
    from mutdet.exceptions import ConfigurationError

    path = tmpdir.join('run.toml')
    path.write('dim = 16\nepochs = 4\nlr_decay_epoch = 3\nenhance = false\n')
    detector_config, train_config = load_run_config(str(path))
    assert detector_config.dim == 16 and not detector_config.enhance
    assert train_config.epochs == 4

    path.write('[detector]\ndim = 16\n')
    with pytest.raises(ConfigurationError):
        load_run_config(str(path))

    path.write('dim = \n')
    with pytest.raises(ConfigurationError):
        load_run_config(str(path))
