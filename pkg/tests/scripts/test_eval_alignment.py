import json

import pytest
from click.testing import CliRunner


@pytest.fixture()
def checkpoint(tmpdir, tiny_config, tiny_train_config):
    from mutdet.detector.checkpoint import save_checkpoint
    from mutdet.detector.model import MutDet

    path = tmpdir.join('model.ckpt')
    save_checkpoint(str(path), MutDet(tiny_config), tiny_train_config)
    return str(path)


def test_eval_alignment(tmpdir, checkpoint, synthetic_dataset, label_store):
    from mutdet.scripts import cli

    out = tmpdir.join('report.json')
    result = CliRunner().invoke(cli.cli, [
        'eval-alignment', '--ckpt', checkpoint, '--data', str(synthetic_dataset),
        '--labels', str(label_store), '-o', str(out)
    ])
    assert result.exit_code == 0, result.output

    report = json.loads(out.read())
    assert set(report) == {'mean', 'per_image'}
    assert len(report['per_image']) == 6
    assert -1 <= report['mean'] <= 1
    assert '"per_image"' in result.output


def test_eval_alignment_bad_checkpoint(tmpdir, synthetic_dataset, label_store):
    from mutdet.scripts import cli

    bogus = tmpdir.join('bogus.ckpt')
    bogus.write('not a checkpoint\n')
    result = CliRunner().invoke(cli.cli, [
        'eval-alignment', '--ckpt', str(bogus), '--data', str(synthetic_dataset),
        '--labels', str(label_store)
    ])
    assert result.exit_code == 3
