"""
test_diagnostics: tests energy ledgers, relative energy checks and orders
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
import math

import numpy as np
import pytest

import relentless


def _run(
    solution: relentless.Solution,
    law: relentless.PressureLaw = None) -> relentless.Trajectory:
    mesh = relentless.structured_triangulation(4, 4)
    config = relentless.SchemeConfig(
        dt = 0.01,
        T_final = 0.03,
        law = law or relentless.Isentropic())
    return relentless.run_simulation(solution.project(mesh), config)

def test_energy_ledger_of_a_bump():
    trajectory = _run(relentless.GaussianBump(amplitude = 0.2, width = 0.2))
    ledger = relentless.energy_ledger(trajectory)
    assert ledger.max_abs_residual < 1e-7
    assert ledger.min_dissipation >= -1e-14
    assert np.all(np.diff(ledger.energy) <= 1e-12)
    assert ledger.E0 == pytest.approx(ledger.energy[0])
    frame = ledger.to_frame()
    assert len(frame) == 4
    assert 'identity_residual' in frame.columns
    mass, drift = relentless.mass_history(trajectory)
    assert mass[0] == pytest.approx(ledger.M0)
    assert drift < 1e-10
    return

def test_relative_energy_against_a_constant_state():
    trajectory = _run(relentless.GaussianBump(amplitude = 0.2, width = 0.2))
    report = relentless.relative_energy_inequality_check(
        trajectory, relentless.Rest(value = 1.2))
    assert report.passes(1e-6)
    np.testing.assert_allclose(report.rhs, 0.0, atol = 1e-12)
    np.testing.assert_allclose(report.slack, report.dissipation, atol = 1e-7)
    assert set(report.to_frame().columns) >= {'lhs', 'rhs', 'slack', 'T1'}
    with pytest.raises(TypeError):
        relentless.relative_energy_inequality_check(
            trajectory, lambda t, x: np.ones(x.shape[:-1]))
    with pytest.raises(relentless.NonPositiveReferenceField):
        relentless.relative_energy_inequality_check(
            trajectory,
            lambda t, x: np.zeros(x.shape[:-1]),
            lambda t, x: np.zeros(x.shape))
    return

def test_relative_energy_of_a_forced_vortex():
    vortex = relentless.Vortex()
    mesh = relentless.structured_triangulation(4, 4)
    config = relentless.SchemeConfig(dt = 0.01, T_final = 0.03)
    sources = vortex.sources(config.law, config.viscosity)
    trajectory = relentless.run_simulation(
        vortex.project(mesh), config, sources = sources)
    assert not trajectory.failed
    report = relentless.relative_energy_inequality_check(trajectory, vortex)
    assert report.passes(1e-8)
    assert np.all(report.dissipation >= 0.0)
    np.testing.assert_allclose(report.slack, report.dissipation, atol = 1e-6)
    assert np.abs(report.terms['source']).max() > 0.0
    assert report.relative_energy[-1] > 0.0
    return

def test_rest_twin():
    trajectory = _run(relentless.Rest())
    report = relentless.relative_energy_inequality_check(
        trajectory, relentless.Rest())
    np.testing.assert_allclose(report.relative_energy, 0.0, atol = 1e-14)
    np.testing.assert_allclose(report.slack, 0.0, atol = 1e-14)
    strong = relentless.error_vs_strong(trajectory, relentless.Rest())
    assert strong.max_relative_energy == pytest.approx(0.0, abs = 1e-14)
    assert strong.total_gradient_error == pytest.approx(0.0, abs = 1e-14)
    assert strong.residual_measure.max() == 0.0
    bounds = relentless.uniform_bounds(trajectory, relentless.Rest())
    assert bounds.velocity == pytest.approx(0.0, abs = 1e-12)
    assert bounds.density == pytest.approx(1.0)
    assert bounds.momentum == pytest.approx(0.0, abs = 1e-14)
    assert bounds.to_dict()['relative_energy'] == pytest.approx(
        0.0, abs = 1e-14)
    monitor = relentless.density_dissipation_monitor(trajectory)
    assert monitor.total == pytest.approx(0.0, abs = 1e-14)
    return

def test_density_dissipation_monitor():
    bump = relentless.GaussianBump(amplitude = 0.2, width = 0.2)
    stiff = relentless.density_dissipation_monitor(_run(bump))
    assert stiff.upper >= 0.0
    assert stiff.lower == 0.0
    soft = relentless.density_dissipation_monitor(
        _run(bump, law = relentless.Isentropic(gamma = 1.4)))
    assert soft.gamma == pytest.approx(1.4)
    assert soft.upper >= 0.0 and soft.lower >= 0.0
    assert 'approximation' in soft.header
    return

def test_orders():
    hs = [0.1, 0.05, 0.025]
    values = [3.0 * h**2 for h in hs]
    assert relentless.fit_order(hs, values) == pytest.approx(2.0)
    np.testing.assert_allclose(relentless.eoc(hs, values), [2.0, 2.0])
    assert math.isnan(relentless.fit_order(hs, [1.0, 0.0, -1.0]))
    assert math.isnan(relentless.eoc(hs, [1.0, 0.0, 1.0])[0])
    return


if __name__ == '__main__':
    test_energy_ledger_of_a_bump()
    test_relative_energy_against_a_constant_state()
    test_relative_energy_of_a_forced_vortex()
    test_rest_twin()
    test_density_dissipation_monitor()
    test_orders()
