import json

import numpy as np
import pytest
from click.testing import CliRunner

import runner as runner_module
from config import EXIT_CODES
from main import cli
from runner import Check
from utils.run_config import default_config, parse_config


def invoke(*args):
    return CliRunner().invoke(cli, list(args), catch_exceptions=False)


def read_csv(text):
    lines = [line for line in text.splitlines() if ',' in line]
    return lines[0].split(','), np.array([[float(v) for v in line.split(',')] for line in lines[1:]])


def test_default_config_prints_a_valid_run_file():
    result = invoke('default-config', 'strip')
    assert result.exit_code == 0
    assert 'problem = strip' in result.output
    assert 'k = 1.0+2.0i' in result.output
    assert parse_config(result.output) == default_config('strip')


def test_default_config_for_oracle_target():
    result = invoke('default-config', 'oracle', '--target', 'heat-rod')
    assert parse_config(result.output).target == 'heat-rod'


def test_heat_rod_writes_csv_to_stdout():
    result = invoke('heat-rod', '--override', 'gamma_plus=1.0')
    assert result.exit_code == 0
    header, rows = read_csv(result.stdout)
    assert header == ['x', 't', 'u']
    assert rows.shape == (11, 3)
    np.testing.assert_allclose(rows[:, 0], np.linspace(-1.0, 1.0, 11))
    assert np.all(rows[:, 1] == 0.5)


def test_output_is_deterministic(tmp_path):
    first, second = tmp_path / 'a.csv', tmp_path / 'b.csv'
    invoke('heat-rod', '--out', str(first))
    invoke('heat-rod', '--out', str(second))
    assert first.read_bytes() == second.read_bytes()


def test_run_dispatches_on_problem_key(tmp_path):
    path = tmp_path / 'rod.run'
    path.write_text("# two-part rod\nproblem = heat-rod\nx = -0.5,0.5\nt = 0.25,1.0\n")
    result = invoke('run', '--config', str(path))
    assert result.exit_code == 0
    header, rows = read_csv(result.stdout)
    assert rows.shape == (4, 3)
    direct = invoke('heat-rod', '--config', str(path))
    assert direct.stdout == result.stdout


def test_wedge_run_reports_temperature_at_infinity(tmp_path):
    out, report = tmp_path / 'wedge.csv', tmp_path / 'wedge.json'
    result = invoke('wedge', '--out', str(out), '--report', str(report))
    assert result.exit_code == 0
    line = next(line for line in result.output.splitlines() if line.startswith('T_inf = '))
    assert float(line.split('=')[1]) == pytest.approx(1.0 - 2.0 / np.pi * np.arctan(0.5), abs=1e-10)
    header, rows = read_csv(out.read_text())
    assert header == ['r', 'theta', 'u']
    assert rows.shape == (6, 3)
    entry = json.loads(report.read_text())
    assert entry['status'] == 'ok'
    assert entry['records']['factorization_residual'] < 1e-8


def test_config_error_exit_code():
    result = invoke('aw-conv', '--override', 'lambda=0.3')
    assert result.exit_code == EXIT_CODES['config']
    assert 'error: config:' in result.output


def test_solver_error_exit_code():
    result = invoke('heat-rod-n', '--override', 'breakpoints=0.0', '--override', 'a=1.0,2.0',
                    '--override', 'k=1.0,3.0')
    assert result.exit_code == EXIT_CODES['domain']
    assert 'error: domain:' in result.output


def test_run_file_for_another_problem_is_rejected(tmp_path):
    path = tmp_path / 'strip.run'
    path.write_text("problem = strip\n")
    result = invoke('wedge', '--config', str(path))
    assert result.exit_code == EXIT_CODES['config']


def test_run_needs_a_config():
    result = CliRunner().invoke(cli, ['run'])
    assert result.exit_code == 2


def test_selftest_prints_table(monkeypatch):
    monkeypatch.setattr(runner_module, 'ACCEPTANCE_CHECKS', [
        Check('passes', 1.0, lambda: 0.25), Check('fails', 1.0, lambda: 4.0), Check('slow one', 1.0, lambda: 0.0, True)])
    result = invoke('selftest')
    assert result.exit_code == 1
    assert 'PASS' in result.output and 'FAIL' in result.output
    assert 'slow one' not in result.output
    assert '1/2 checks passed' in result.output
    assert invoke('selftest', '--slow').output.count('PASS') == 2


def test_selftest_through_run_file(tmp_path, monkeypatch):
    monkeypatch.setattr(runner_module, 'ACCEPTANCE_CHECKS', [Check('passes', 1.0, lambda: 0.25)])
    path = tmp_path / 'self.run'
    path.write_text("problem = selftest\n")
    result = invoke('run', '--config', str(path))
    assert result.exit_code == 0
    assert '1/1 checks passed' in result.output


def test_aw_oracle_uses_the_solver_schema():
    result = invoke('oracle', '--problem', 'aw-conv', '--override', 'x=0.5,1.0,2.0')
    assert result.exit_code == 0
    header, rows = read_csv(result.stdout)
    assert header == ['x', 'u1', 'u2']
    assert rows.shape == (3, 3)


@pytest.mark.slow
def test_aw_oracle_matches_solver():
    solver = read_csv(invoke('aw-conv', '--override', 'x=0.5,1.0,2.0').stdout)[1]
    oracle = read_csv(invoke('oracle', '--problem', 'aw-conv', '--override', 'x=0.5,1.0,2.0').stdout)[1]
    np.testing.assert_allclose(solver, oracle, atol=1e-4)


@pytest.mark.slow
def test_strip_run_reports_truncation_drift(tmp_path):
    report = tmp_path / 'strip.json'
    result = invoke('strip', '--report', str(report))
    assert result.exit_code == 0
    records = json.loads(report.read_text())['records']
    assert records['truncation'] >= 64
    assert records['coefficient_drift'] < 1e-8
    assert records['rhp_residual'] < 1e-6
