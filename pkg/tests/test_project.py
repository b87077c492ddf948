"""
test_project: tests Project settings, managers and command exit codes
Corey Rayburn Yung <coreyrayburnyung@gmail.com>
Copyright 2020-2023, Corey Rayburn Yung
License: Apache-2.0

    Licensed under the Apache License, Version 2.0 (the "License");
    you may not use this file except in compliance with the License.
    You may obtain a copy of the License at

        http://www.apache.org/licenses/LICENSE-2.0

    Unless required by applicable law or agreed to in writing, software
    distributed under the License is distributed on an "AS IS" BASIS,
    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
    See the License for the specific language governing permissions and
    limitations under the License.

Contents:


To Do:


"""
from __future__ import annotations
import json
import pathlib
import tempfile

import pandas as pd
import pytest

import relentless
from relentless import cli


SETTINGS = pathlib.Path(__file__).parent / 'run_settings.ini'


def _rest(**time: float) -> dict[str, dict[str, object]]:
    return {
        'general': {'name': 'rest'},
        'mesh': {'nx': 2, 'ny': 2},
        'time': {'dt': 0.01, 'final_time': 0.02, **time},
        'data': {'initial': 'rest'}}

def test_project(tmp_path):
    project = relentless.Project(
        idea = SETTINGS,
        overrides = {'output': str(tmp_path)},
        automatic = False)
    assert project.name == 'bump'
    assert project.config.nx == 4
    assert project.config.bounds == (0.0, 0.0, 1.0, 1.0)
    assert project.config.solution is None
    assert project.config.laboratory_levels == 3
    assert isinstance(project.manager, relentless.Run)
    assert project.folder == tmp_path
    project.manager.complete()
    assert project.manager.exit_code == 0
    ledger = pd.read_csv(tmp_path / 'energy_ledger.csv')
    assert list(ledger['step']) == [0, 1, 2]
    assert (tmp_path / 'state_0002.vtk').exists()
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert all(summary['gates'].values())
    assert summary['steps'] == 2
    return

def test_configuration():
    config = relentless.ExperimentConfig.create(
        _rest(), levels = 5, mode = 'verify-inequalities')
    assert config.mode == 'verify_inequalities'
    assert config.convergence_levels == 5
    assert config.laboratory_levels == 5
    with pytest.raises(relentless.ConfigurationError):
        relentless.ExperimentConfig.create(_rest(dt = -1.0))
    with pytest.raises(relentless.ConfigurationError):
        relentless.ExperimentConfig.create({'mesh': {'nx': 'many'}})
    with pytest.raises(relentless.ConfigurationError):
        relentless.ExperimentConfig.create({'physics': {'form': 'tabulated'}})
    tabulated = relentless.ExperimentConfig.create({
        'physics': {
            'form': 'tabulated',
            'densities': [0.5, 1.0, 2.0, 4.0],
            'pressures': [0.25, 1.0, 4.0, 16.0]}})
    assert tabulated.densities == (0.5, 1.0, 2.0, 4.0)
    return

def test_rest_run(tmp_path):
    code = cli.cmd_run(_rest(), output = str(tmp_path))
    assert code == 0
    history = pd.read_csv(tmp_path / 'mass_history.csv')
    assert list(history.columns) == [
        'step', 'time', 'mass', 'expected', 'drift']
    assert history['drift'].max() <= 1e-15
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['data'] == 'rest'
    return

def test_exit_codes(tmp_path):
    assert cli.cmd_run(_rest(dt = -1.0), output = str(tmp_path)) == 2
    assert cli.cmd_run(tmp_path / 'missing.ini') == 2
    assert cli.cmd_run(
        {'data': {'initial': 'unknown'}}, output = str(tmp_path)) == 2
    assert cli.cmd_verify_inequalities(
        _rest(), levels = 1, output = str(tmp_path)) == 2
    assert cli.cmd_convergence(
        {'data': {'solution': 'gaussian_bump'}},
        output = str(tmp_path)) == 2
    return

def test_convergence_table(tmp_path):
    settings = {
        'general': {'name': 'vortex'},
        'mesh': {'nx': 4, 'ny': 4},
        'time': {'dt': 0.01, 'final_time': 0.01},
        'data': {'solution': 'vortex'}}
    code = cli.cmd_convergence(settings, output = str(tmp_path))
    assert code == 0
    table = pd.read_csv(tmp_path / 'convergence.csv')
    assert list(table['level']) == [0, 1, 2]
    assert list(table['dt']) == pytest.approx([0.01, 0.0025, 0.000625])
    assert {
        'eoc', 'constant', 'initial_relative_energy', 'velocity_bound',
        'density_bound', 'momentum_bound',
        'density_dissipation'} <= set(table.columns)
    assert (table['density_dissipation'] >= 0.0).all()
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert summary['expected_order'] == pytest.approx(1.0)
    assert summary['orders']['relative_energy'] >= 0.75
    assert summary['passed']
    assert len(summary['constants']) == 3
    assert len(summary['constant_ratios']) == 2
    assert set(summary['bound_growth']) == set(relentless.BOUNDS)
    return

def test_convergence_gate_failure(tmp_path, monkeypatch):
    monkeypatch.setitem(relentless.Defaults.gates, 'order_margin', -10.0)
    settings = {
        'general': {'name': 'vortex'},
        'mesh': {'nx': 2, 'ny': 2},
        'time': {'dt': 0.01, 'final_time': 0.01},
        'data': {'solution': 'vortex'}}
    code = cli.cmd_convergence(settings, levels = 2, output = str(tmp_path))
    assert code == 4
    summary = json.loads((tmp_path / 'summary.json').read_text())
    assert not summary['passed']
    return

def test_enforce_raises_on_failed_gates(tmp_path):
    project = relentless.Project(
        idea = _rest(),
        overrides = {'output': str(tmp_path)},
        automatic = False)
    manager = project.manager
    manager.enforce([])
    assert manager.exit_code == 0
    with pytest.raises(relentless.InvariantGateFailure, match = 'mass'):
        manager.enforce(['mass'])
    assert manager.exit_code == 4
    manager.exit_code = 3
    manager.enforce(['identity'])
    assert manager.exit_code == 3
    return

def test_main(tmp_path):
    code = cli.main([
        'run', '--config', str(SETTINGS), '--output', str(tmp_path)])
    assert code == 0
    assert (tmp_path / 'summary.json').exists()
    parser = cli.build_parser()
    args = parser.parse_args(['verify-inequalities', '--levels', '3'])
    assert args.mode == 'verify-inequalities'
    assert args.levels == 3
    return


if __name__ == '__main__':
    folder = pathlib.Path(tempfile.mkdtemp())
    test_project(folder / 'project')
    test_configuration()
    test_rest_run(folder / 'rest')
    test_exit_codes(folder / 'codes')
    test_convergence_table(folder / 'convergence')
    with pytest.MonkeyPatch.context() as patch:
        test_convergence_gate_failure(folder / 'gate', patch)
    test_enforce_raises_on_failed_gates(folder / 'enforce')
    test_main(folder / 'main')
