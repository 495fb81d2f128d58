import json

import numpy as np
import pytest

from runner import Check, SolverRunner
from solvers.diagnostics import DiagnosticsStore, to_plain
from utils.errors import ConfigError, DomainError
from utils.run_config import RunConfig, default_config


def test_to_plain_handles_numpy_and_complex():
    value = to_plain({'a': np.float64(1.5), 'b': 1 + 2j, 'c': np.array([1.0, 2.0]), 'd': (np.int64(3), None)})
    assert value == {'a': 1.5, 'b': {'re': 1.0, 'im': 2.0}, 'c': [1.0, 2.0], 'd': [3, None]}
    json.dumps(value)


def test_store_lifecycle():
    store = DiagnosticsStore()
    assert store.create_run('strip-1', 'strip', {'k': 1 + 2j})
    assert not store.create_run('strip-1', 'strip')
    assert store.add_record('strip-1', 'system_residual', np.float64(1e-12))
    assert not store.add_record('missing', 'x', 1.0)
    store.finish_run('strip-1')
    entry = store.get_run('strip-1')
    assert entry['status'] == 'ok'
    assert entry['params']['k'] == {'re': 1.0, 'im': 2.0}
    assert list(store.runs) == ['strip-1']
    assert store.get_run('missing') is None


def test_failed_runs_keep_their_category():
    store = DiagnosticsStore()
    store.create_run('wedge-1', 'wedge')
    store.finish_run('wedge-1', DomainError("angle outside (0, 2 pi)"))
    assert store.get_run('wedge-1')['status'] == 'domain'
    assert 'angle' in store.get_run('wedge-1')['error']
    assert store.get_run('wedge-1')['records'] == {}


def test_export_is_plain_json():
    store = DiagnosticsStore()
    store.create_run('aw-conv-1', 'aw-conv')
    store.add_records('aw-conv-1', {'c1': 0.5 - 0.25j, 'residues': [1e-12, 2e-12]})
    assert json.loads(store.export_data()) == store.runs
    assert json.loads(store.export_data('aw-conv-1'))['records']['c1'] == {'re': 0.5, 'im': -0.25}
    assert json.loads(store.export_data('missing')) == {}


def test_runner_records_solver_diagnostics():
    runner = SolverRunner()
    result = runner.run(default_config('aw-conv'))
    assert result.run_id == 'aw-conv-1'
    assert result.columns == ['x', 'u1', 'u2']
    assert result.rows.shape == (20, 3)
    entry = runner.store.get_run('aw-conv-1')
    assert entry['status'] == 'ok'
    assert entry['records']['rhp_residual'] < 1e-8
    assert entry['records']['equation_residual'] < 1e-6
    assert entry['records']['residue_u1_plus'] < 1e-10


def test_runner_records_failures():
    runner = SolverRunner()
    params = {**default_config('aw-conv').params, 'lambda': 0.3 + 0.0j}
    with pytest.raises(DomainError):
        runner.run(RunConfig('aw-conv', params))
    assert runner.store.get_run('aw-conv-1')['status'] == 'domain'


def test_runner_refuses_selftest_config():
    with pytest.raises(ConfigError):
        SolverRunner().run(default_config('selftest'))


def test_selftest_table():
    runner = SolverRunner()

    def broken():
        raise DomainError("check cannot run")

    table = runner.selftest(checks=[Check('small', 1.0, lambda: 0.5), Check('large', 1.0, lambda: 2.0),
                                    Check('broken', 1.0, broken), Check('skipped', 1.0, lambda: 0.0, slow=True)])
    assert [row['name'] for row in table] == ['small', 'large', 'broken']
    assert [row['passed'] for row in table] == [True, False, False]
    assert table[2]['error'] == 'domain'
    assert runner.store.get_run('selftest-1')['records']['checks'][0]['value'] == 0.5
