import json

from click.testing import CliRunner


def _invoke(*args):
    from mutdet.scripts import cli
    return CliRunner().invoke(cli.cli, ['pretrain', *args])


def test_pretrain(tmpdir, synthetic_dataset, label_store, run_config_file):
    from mutdet.detector.checkpoint import load_checkpoint

    ckpt, metrics = tmpdir.join('run.ckpt'), tmpdir.join('run.metrics.jsonl')
    result = _invoke('--data', str(synthetic_dataset), '--labels', str(label_store),
                     '--config', run_config_file, '-o', str(ckpt), '--metrics', str(metrics))
    assert result.exit_code == 0, result.output
    assert 'Finished 3 iterations' in result.output

    assert len(metrics.readlines()) == 3
    checkpoint = load_checkpoint(str(ckpt))
    assert checkpoint.model.config.calibration_mode == 'siamese'
    assert checkpoint.train_config.epochs == 1


def test_pretrain_switches(tmpdir, synthetic_dataset, label_store, run_config_file):
    from mutdet.detector.checkpoint import read_header

    ckpt = tmpdir.join('run.ckpt')
    result = _invoke('--data', str(synthetic_dataset), '--labels', str(label_store),
                     '--config', run_config_file, '--calibration', 'encoder-distill',
                     '--enhance', 'off', '-q', '-o', str(ckpt),
                     '--metrics', str(tmpdir.join('m.jsonl')))
    assert result.exit_code == 0, result.output
    assert not result.output

    header = read_header(str(ckpt))
    assert header['detector_config']['calibration_mode'] == 'encoder-distill'
    assert header['detector_config']['enhance'] is False
    assert not any(t['name'].startswith('enhance.') for t in header['tensors'])


def test_pretrain_missing_labels(tmpdir, synthetic_dataset, run_config_file):
    result = _invoke('--data', str(synthetic_dataset),
                     '--labels', str(tmpdir.join('missing.jsonl')),
                     '--config', run_config_file, '-o', str(tmpdir.join('run.ckpt')),
                     '--metrics', str(tmpdir.join('m.jsonl')))
    assert result.exit_code == 3


def test_pretrain_invalid_config(tmpdir, synthetic_dataset, label_store):
    config = tmpdir.join('bad.toml')
    config.write('dim = 30\n')
    result = _invoke('--data', str(synthetic_dataset), '--labels', str(label_store),
                     '--config', str(config), '-o', str(tmpdir.join('run.ckpt')),
                     '--metrics', str(tmpdir.join('m.jsonl')))
    assert result.exit_code == 2

    result = _invoke('--data', str(synthetic_dataset), '--labels', str(label_store),
                     '--calibration', 'mutual', '-o', str(tmpdir.join('run.ckpt')),
                     '--metrics', str(tmpdir.join('m.jsonl')))
    assert result.exit_code == 2


def test_pretrain_wrong_image_size(tmpdir, synthetic_dataset, label_store):
    # default image size is 64, the dataset has 32
    result = _invoke('--data', str(synthetic_dataset), '--labels', str(label_store),
                     '-o', str(tmpdir.join('run.ckpt')), '--metrics', str(tmpdir.join('m.jsonl')))
    assert result.exit_code == 3
    assert 'image size' in result.output


def test_pretrain_numerical_failure(monkeypatch, tmpdir, synthetic_dataset, label_store,
                                    run_config_file):
    import mutdet.train
    from mutdet.losses.compose import breakdown
    from mutdet.nn.tensor import Tensor

    monkeypatch.setattr(mutdet.train, 'compose_losses',
                        lambda *args: breakdown(ca_det=Tensor(float('inf'))))

    metrics = tmpdir.join('m.jsonl')
    result = _invoke('--data', str(synthetic_dataset), '--labels', str(label_store),
                     '--config', run_config_file, '-o', str(tmpdir.join('run.ckpt')),
                     '--metrics', str(metrics))
    assert result.exit_code == 4

    dump = json.loads(tmpdir.join('m.jsonl.nan.json').read())
    assert dump['components']['ca_det'] == 'inf'
    assert not tmpdir.join('run.ckpt').check()
