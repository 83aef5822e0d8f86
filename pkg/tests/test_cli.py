"""
命令行测试
"""

import json

import pytest
from click.testing import CliRunner

from harness.cli import cli


@pytest.fixture
def runner():
    return CliRunner()


def _json(result) -> dict:
    return json.loads(result.stdout)


def test_bounds_epsilon(runner):
    result = runner.invoke(cli, ['bounds', 'epsilon', '--k', '6', '--L', '3'])
    assert result.exit_code == 0
    data = _json(result)
    assert data['kind'] == 'bounds.epsilon'
    assert data['results']['criterion_ok'] is True
    assert data['results']['epsilon'] == pytest.approx(0.12742, abs=1e-5)


def test_bounds_alpha_subcritical(runner):
    result = runner.invoke(cli, ['bounds', 'alpha', '--b', '3', '--delta', '1'])
    assert result.exit_code == 2


def test_latin_table_range(runner):
    result = runner.invoke(cli, ['latin', 'table', '--beta', '0.3:0.5:0.1'])
    assert result.exit_code == 0
    data = _json(result)
    assert [row['beta'] for row in data['rows']] == [0.3, 0.4, 0.5]
    assert data['verdicts'] == []


def test_latin_table_csv(runner):
    result = runner.invoke(cli, ['latin', 'table', '--beta', '0.15', '--format', 'csv'])
    assert result.exit_code == 0
    header, row = result.stdout.strip().splitlines()
    assert header.split(',')[0] == 'beta'
    assert row.split(',')[0] == '0.15'


def test_csv_requires_rows(runner):
    result = runner.invoke(cli, ['bounds', 'epsilon', '--k', '6', '--L', '3', '--format', 'csv'])
    assert result.exit_code == 2


def test_ksat_independence_from_dimacs(runner, tmp_path):
    path = tmp_path / "small.cnf"
    path.write_text("c two disjoint clauses\np cnf 8 2\n1 2 3 4 0\n-5 -6 7 8 0\n", encoding='utf-8')
    result = runner.invoke(cli, ['ksat', 'independence', '--dimacs', str(path), '--j', '1',
                                 '--trials', '50', '--seed', '3'])
    assert result.exit_code == 0
    data = _json(result)
    assert data['params']['source'] == 'file'
    assert data['results']['k_min'] == 4
    assert data['results']['L'] == 1
    assert data['params']['k'] == 4
    assert data['params']['L'] == 1
    assert data['results']['non_terminated'] == 0
    assert len(data['rows']) == 1


def test_ksat_malformed_dimacs(runner, tmp_path):
    path = tmp_path / "bad.cnf"
    path.write_text("p cnf 2 1\n1 x 0\n", encoding='utf-8')
    result = runner.invoke(cli, ['ksat', 'independence', '--dimacs', str(path), '--trials', '5'])
    assert result.exit_code == 2


@pytest.mark.parametrize("args", [
    ['bounds', 'epsilon', '--k', '6', '--L', '3', '--level', '0.9'],
    ['verify', '--suite', 'bogus'],
    ['bounds', 'epsilon', '--k', '6'],
])
def test_usage_errors(runner, args):
    assert runner.invoke(cli, args).exit_code == 2


def test_transversal_find(runner, tmp_path):
    path = tmp_path / "instance.json"
    path.write_text(json.dumps({"blocks": [[0, 1], [2, 3]], "edges": [[1, 2]], "avoid": [0]}), encoding='utf-8')
    result = runner.invoke(cli, ['transversal', 'find', '--instance', str(path), '--seed', '1'])
    assert result.exit_code == 0
    assert _json(result)['results']['choice'] == [1, 3]


def test_out_writes_file(runner, tmp_path):
    out = tmp_path / "reports" / "alpha.json"
    result = runner.invoke(cli, ['bounds', 'alpha', '--b', '8', '--delta', '2', '--out', str(out)])
    assert result.exit_code == 0
    assert result.stdout == ""
    data = json.loads(out.read_text(encoding='utf-8'))
    assert data['results']['alpha'] == pytest.approx(0.0625)


def test_bounds_shearer(runner, tmp_path):
    path = tmp_path / "graph.json"
    path.write_text(json.dumps({"m": 2, "edges": [[0, 1]], "probs": [0.25, 0.25]}), encoding='utf-8')
    result = runner.invoke(cli, ['bounds', 'shearer', '--graph', str(path)])
    assert result.exit_code == 0
    data = _json(result)
    assert data['results']['q_empty'] == pytest.approx(0.5)
    assert data['results']['satisfied'] is True


def test_bounds_shearer_bad_edge(runner, tmp_path):
    path = tmp_path / "graph.json"
    path.write_text(json.dumps({"m": 2, "edges": [[0, 5]], "probs": [0.1, 0.1]}), encoding='utf-8')
    result = runner.invoke(cli, ['bounds', 'shearer', '--graph', str(path)])
    assert result.exit_code == 2


CHAIN = {
    "n": 7,
    "bad": [[[0, 0], [1, 0], [2, 0]], [[2, 0], [3, 0], [4, 0]], [[4, 0], [5, 0], [6, 0]]],
    "members": [[[3, 1]], [[0, 1]]],
}


def test_bounds_disjunction_best_order(runner, tmp_path):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps(CHAIN), encoding='utf-8')
    result = runner.invoke(cli, ['bounds', 'disjunction', '--instance', str(path), '--best-order'])
    assert result.exit_code == 0
    data = _json(result)
    assert data['kind'] == 'bounds.disjunction'
    assert data['results']['given']['ordered'] == pytest.approx(73 / 82)
    assert data['results']['best']['order'] == [1, 0]
    assert data['results']['best']['ordered'] == pytest.approx(145 / 164)


@pytest.mark.parametrize("update", [{"order": [0, 0]}, {"members": []}])
def test_bounds_disjunction_bad_instance(runner, tmp_path, update):
    path = tmp_path / "chain.json"
    path.write_text(json.dumps({**CHAIN, **update}), encoding='utf-8')
    result = runner.invoke(cli, ['bounds', 'disjunction', '--instance', str(path)])
    assert result.exit_code == 2
