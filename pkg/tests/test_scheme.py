"""
test_scheme: tests the implicit upwind time step and the marching loop
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

import numpy as np
import pytest

import relentless


def _bump(n: int = 4) -> relentless.State:
    mesh = relentless.structured_triangulation(n, n)
    return relentless.GaussianBump(amplitude = 0.2, width = 0.2).project(mesh)

def test_config_validation():
    with pytest.raises(ValueError):
        relentless.SchemeConfig(dt = 0.0, T_final = 1.0)
    with pytest.raises(ValueError):
        relentless.SchemeConfig(dt = 0.1, T_final = 1.0, solver = 'magic')
    with pytest.raises(ValueError):
        relentless.SchemeConfig(
            dt = 0.1, T_final = 1.0, dt_backoff_factor = 1.0)
    config = relentless.SchemeConfig(dt = 0.03, T_final = 0.05)
    assert config.n_steps == 2
    return

def test_upwind_value():
    mesh = relentless.structured_triangulation(2, 2)
    q = relentless.ScalarCellField(
        mesh = mesh,
        values = np.arange(1.0, mesh.n_cells + 1.0))
    face = int(mesh.internal_faces[0])
    owner, neighbor = mesh.face_cells[face]
    dofs = np.zeros((mesh.n_dofs, 2))
    dofs[mesh.dofs[face]] = mesh.normals[face]
    outward = relentless.CRVectorField(mesh = mesh, dofs = dofs)
    assert relentless.upwind_value(q, outward, face) == q[owner]
    assert relentless.upwind_value(
        q, outward, face, owner_cell = neighbor) == q[owner]
    assert relentless.upwind_value(q, -outward, face) == q[neighbor]
    with pytest.raises(relentless.BoundaryFace):
        relentless.upwind_value(q, outward, int(mesh.boundary_faces[0]))
    return

def test_continuity_step_is_positive_and_conservative():
    mesh = relentless.structured_triangulation(4, 4)
    rng = np.random.default_rng(3)
    rho_prev = relentless.ScalarCellField(
        mesh = mesh,
        values = rng.uniform(0.1, 2.0, mesh.n_cells))
    u = relentless.CRVectorField(
        mesh = mesh,
        dofs = 10.0 * rng.standard_normal((mesh.n_dofs, 2)))
    for solver in ('direct', 'iterative'):
        rho = relentless.continuity_step(rho_prev, u, 0.1, solver = solver)
        assert np.all(rho.values > 0)
        assert rho.integral == pytest.approx(rho_prev.integral, rel = 1e-10)
    source = np.full(mesh.n_cells, 0.5)
    fed = relentless.continuity_step(rho_prev, u, 0.1, source = source)
    assert fed.integral == pytest.approx(rho_prev.integral + 0.05, rel = 1e-10)
    broken = relentless.ScalarCellField(
        mesh = mesh,
        values = np.where(np.arange(mesh.n_cells) == 0, 0.0, 1.0))
    with pytest.raises(relentless.NegativeDensity):
        relentless.continuity_step(broken, u, 0.1)
    return

def test_continuity_step_on_two_cells():
    mesh = relentless.build_mesh(
        vertices = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
        cells = [[0, 1, 2], [0, 2, 3]])
    assert mesh.n_dofs == 1
    np.testing.assert_allclose(mesh.cell_measures, 0.5)
    face = int(mesh.internal_faces[0])
    owner, neighbor = mesh.owners[face], mesh.neighbors[face]
    rho_prev = relentless.ScalarCellField(
        mesh = mesh, values = np.array([1.0, 2.0]))
    dt = 0.25
    for sign in (1.0, -1.0):
        dofs = np.zeros((1, 2))
        dofs[mesh.dofs[face]] = sign * mesh.normals[face] / np.sqrt(2.0)
        u = relentless.CRVectorField(mesh = mesh, dofs = dofs)
        flux = relentless.normal_fluxes(u)[0]
        assert flux == pytest.approx(sign)
        upwind, downwind = (owner, neighbor) if flux > 0 else (neighbor, owner)
        # |K|/dt = 2 on both cells and |F| = 1
        expected = np.zeros(2)
        expected[upwind] = 2.0 * rho_prev[upwind] / 3.0
        expected[downwind] = rho_prev[downwind] + 0.5 * expected[upwind]
        rho = relentless.continuity_step(rho_prev, u, dt)
        np.testing.assert_allclose(rho.values, expected, atol = 1e-13)
        assert rho.integral == pytest.approx(rho_prev.integral, rel = 1e-13)
    return

def test_rest_is_a_fixed_point():
    mesh = relentless.structured_triangulation(2, 2)
    initial = relentless.project_initial_data(1.0, None, mesh)
    config = relentless.SchemeConfig(dt = 0.03, T_final = 0.05)
    trajectory = relentless.run_simulation(initial, config)
    assert not trajectory.failed
    assert len(trajectory) == 3
    assert trajectory.config.dt == pytest.approx(0.025)
    np.testing.assert_allclose(trajectory.times, [0.0, 0.025, 0.05])
    for state in trajectory:
        np.testing.assert_allclose(state.rho.values, 1.0)
        np.testing.assert_allclose(state.u.dofs, 0.0, atol = 1e-14)
    assert trajectory.final.iterations == 1
    return

def test_bump_step():
    initial = _bump()
    config = relentless.SchemeConfig(dt = 0.01, T_final = 0.01)
    state = relentless.advance_time_step(initial, config)
    assert state.time_index == 1
    assert state.time == pytest.approx(0.01)
    assert np.all(state.rho.values > 0)
    assert state.mass == pytest.approx(initial.mass, rel = 1e-10)
    assert np.abs(state.u.dofs).max() > 0
    residual = relentless.momentum_residual(initial, state, 0.01, config)
    assert residual.shape == (initial.mesh.n_dofs, 2)
    assert np.abs(residual).max() < 1e-7
    iterative = relentless.advance_time_step(
        initial,
        relentless.SchemeConfig(dt = 0.01, T_final = 0.01, solver = 'iterative'))
    np.testing.assert_allclose(
        iterative.rho.values, state.rho.values, rtol = 1e-7)
    return

def test_run_with_hooks_and_backoff():
    initial = _bump()
    calls = []
    config = relentless.SchemeConfig(dt = 0.01, T_final = 0.03)
    trajectory = relentless.run_simulation(
        initial,
        config,
        hooks = [lambda previous, current: calls.append(current.time_index)])
    assert not trajectory.failed
    assert trajectory.backoffs == 0
    assert calls == [1, 2, 3]
    masses = [state.mass for state in trajectory]
    np.testing.assert_allclose(masses, masses[0], rtol = 1e-10)
    starved = relentless.SchemeConfig(
        dt = 0.01, T_final = 0.03, picard_max_iters = 1, max_backoffs = 1)
    failed = relentless.run_simulation(initial, starved)
    assert failed.failed
    assert failed.backoffs == 1
    assert failed.config.dt == pytest.approx(0.005)
    assert len(failed) == 1
    return

def test_huge_step_diverges_and_backs_off():
    mesh = relentless.structured_triangulation(4, 4)
    initial = relentless.Shock().project(mesh)
    dt = 1e6 * mesh.h
    config = relentless.SchemeConfig(
        dt = dt, T_final = dt, picard_max_iters = 3, max_backoffs = 2)
    with pytest.raises(relentless.NonlinearDivergence):
        relentless.advance_time_step(initial, config)
    failed = relentless.run_simulation(initial, config)
    assert failed.failed
    assert 'iterations' in failed.failure or 'positivity' in failed.failure
    assert failed.backoffs == 2
    assert failed.config.dt == pytest.approx(dt / 4)
    assert len(failed) == 1
    return

def test_unit_mass_source_adds_area_times_dt():
    mesh = relentless.structured_triangulation(2, 2)
    initial = relentless.Rest().project(mesh)
    sources = relentless.SourceTerms(mass = lambda t, x: np.ones(x.shape[:-1]))
    config = relentless.SchemeConfig(dt = 0.01, T_final = 0.03)
    trajectory = relentless.run_simulation(initial, config, sources = sources)
    assert not trajectory.failed
    masses = np.array([state.mass for state in trajectory])
    np.testing.assert_allclose(np.diff(masses), 0.01, rtol = 1e-12)
    for n, state in enumerate(trajectory):
        np.testing.assert_allclose(state.rho.values, 1.0 + 0.01 * n)
        np.testing.assert_allclose(state.u.dofs, 0.0, atol = 1e-14)
    return

def test_mesh_quality_gate():
    mesh = relentless.structured_triangulation(1, 20)
    initial = relentless.project_initial_data(1.0, None, mesh)
    with pytest.raises(relentless.MeshQualityError):
        relentless.run_simulation(
            initial, relentless.SchemeConfig(dt = 0.01, T_final = 0.01))
    return

def test_initial_density_must_be_positive():
    mesh = relentless.structured_triangulation(2, 2)
    with pytest.raises(relentless.NonPositiveInitialDensity):
        relentless.project_initial_data(lambda x: x[..., 0] - 0.5, None, mesh)
    with pytest.raises(relentless.NonPositiveInitialDensity):
        relentless.project_initial_data(0.0, None, mesh)
    return


if __name__ == '__main__':
    test_config_validation()
    test_upwind_value()
    test_continuity_step_is_positive_and_conservative()
    test_continuity_step_on_two_cells()
    test_rest_is_a_fixed_point()
    test_bump_step()
    test_run_with_hooks_and_backoff()
    test_huge_step_diverges_and_backs_off()
    test_unit_mass_source_adds_area_times_dt()
    test_mesh_quality_gate()
    test_initial_density_must_be_positive()
