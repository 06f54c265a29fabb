import json

from click.testing import CliRunner


def _records():
    from mutdet.losses.compose import BRANCH_COMPONENTS

    for iteration in range(4):
        record = {'iteration': iteration, 'epoch': iteration // 2, 'lr': 1e-4}
        record.update({key: 0.1 * (iteration + 1) for key in BRANCH_COMPONENTS})
        record['total'] = sum(record[key] for key in BRANCH_COMPONENTS)
        yield record


def test_plot_losses(tmpdir):
    from mutdet.curves import CSV_COLUMNS
    from mutdet.scripts import cli

    metrics = tmpdir.join('m.jsonl')
    metrics.write(''.join(json.dumps(r) + '\n' for r in _records()))
    out = tmpdir.join('losses.csv')

    result = CliRunner().invoke(cli.cli, [
        'plot-losses', '--metrics', str(metrics), '-o', str(out), '--epoch-means'
    ])
    assert result.exit_code == 0, result.output

    lines = out.read().splitlines()
    assert lines[0] == ','.join(CSV_COLUMNS)
    assert len(lines) == 5

    table = [line.split('\t') for line in result.output.splitlines()]
    assert table[0][0] == 'epoch'
    assert [row[0] for row in table[1:]] == ['0', '1']
    assert float(table[1][1]) == 0.15


def test_plot_losses_empty(tmpdir):
    from mutdet.scripts import cli

    metrics = tmpdir.join('m.jsonl')
    metrics.write('')
    out = tmpdir.join('losses.csv')
    result = CliRunner().invoke(cli.cli, ['plot-losses', '--metrics', str(metrics), '-o', str(out)])
    assert result.exit_code == 0
    assert len(out.read().splitlines()) == 1


def test_plot_losses_malformed(tmpdir):
    from mutdet.scripts import cli

    metrics = tmpdir.join('m.jsonl')
    metrics.write('{"iteration": 0}\n')
    result = CliRunner().invoke(cli.cli, [
        'plot-losses', '--metrics', str(metrics), '-o', str(tmpdir.join('losses.csv'))
    ])
    assert result.exit_code == 3
    assert 'line 1' in result.output
