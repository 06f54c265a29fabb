from click.testing import CliRunner


def test_prepare_labels(tmpdir, synthetic_dataset, run_config_file):
    from mutdet.labels import read_label_store
    from mutdet.scripts import cli

    out = tmpdir.join('data.plabels.jsonl')
    runner = CliRunner()
    result = runner.invoke(cli.cli, [
        'prepare-labels', '--data', str(synthetic_dataset), '--clusters', '3', '--dim', '16',
        '--config', run_config_file, '-o', str(out)
    ])
    assert result.exit_code == 0, result.output
    assert 'pseudo-labels of 6 images' in result.output

    label_sets = read_label_store(str(out))
    assert len(label_sets) == 6
    assert all(labels.embedding_dim in (0, 16) for labels in label_sets)
    assert max(labels.classes.max() for labels in label_sets if len(labels)) <= 2


def test_prepare_labels_deterministic(tmpdir, synthetic_dataset):
    from mutdet.scripts import cli

    runner = CliRunner()
    for name in ('a', 'b'):
        result = runner.invoke(cli.cli, [
            'prepare-labels', '--data', str(synthetic_dataset), '--clusters', '2', '--dim', '8',
            '-q', '-o', str(tmpdir.join(f'{name}.jsonl'))
        ])
        assert result.exit_code == 0, result.output

    assert tmpdir.join('a.jsonl').read() == tmpdir.join('b.jsonl').read()


def test_prepare_labels_errors(tmpdir, synthetic_dataset):
    from mutdet.scripts import cli

    runner = CliRunner()
    result = runner.invoke(cli.cli, [
        'prepare-labels', '--data', str(tmpdir.join('missing')), '-o', str(tmpdir.join('o'))
    ])
    assert result.exit_code == 2

    # an empty directory is not a dataset
    empty = tmpdir.mkdir('empty')
    result = runner.invoke(cli.cli, [
        'prepare-labels', '--data', str(empty), '-o', str(tmpdir.join('o'))
    ])
    assert result.exit_code == 3

    # more clusters than objects
    result = runner.invoke(cli.cli, [
        'prepare-labels', '--data', str(synthetic_dataset), '--clusters', '1000',
        '-o', str(tmpdir.join('o'))
    ])
    assert result.exit_code == 3
