"""
test_solutions: tests analytic data and manufactured forcing
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


_POINTS = np.random.default_rng(7).uniform(0.05, 0.95, (20, 2))
_STEP = 1e-6


def test_registry():
    for key in ('rest', 'gaussian_bump', 'shock', 'drift', 'vortex'):
        assert key in relentless.Resources.solution
    solution = relentless.Resources.solution['vortex'].create(amplitude = 0.5)
    assert solution.amplitude == 0.5
    assert solution.key == 'vortex'
    return

def test_fields_vanish_on_the_boundary():
    edge = np.linspace(0.0, 1.0, 11)
    boundary = np.concatenate([
        np.column_stack([edge, np.zeros_like(edge)]),
        np.column_stack([edge, np.ones_like(edge)]),
        np.column_stack([np.zeros_like(edge), edge]),
        np.column_stack([np.ones_like(edge), edge])])
    for solution in (
            relentless.Shock(),
            relentless.Drift(),
            relentless.Vortex(),
            relentless.GaussianBump()):
        np.testing.assert_allclose(
            solution.velocity(0.3, boundary), 0.0, atol = 1e-14)
        assert np.all(solution.density(0.3, _POINTS) > 0)
    return

def test_vortex_derivatives():
    vortex = relentless.Vortex()
    t = 0.4
    gradient = vortex.velocity_gradient(t, _POINTS)
    np.testing.assert_allclose(
        np.trace(gradient, axis1 = -2, axis2 = -1), 0.0, atol = 1e-12)
    for axis in range(2):
        shift = np.zeros(2)
        shift[axis] = _STEP
        difference = (
            vortex.velocity(t, _POINTS + shift)
            - vortex.velocity(t, _POINTS - shift)) / (2 * _STEP)
        np.testing.assert_allclose(
            gradient[..., axis], difference, atol = 1e-6)
        density = (
            vortex.density(t, _POINTS + shift)
            - vortex.density(t, _POINTS - shift)) / (2 * _STEP)
        np.testing.assert_allclose(
            vortex.density_gradient(t, _POINTS)[..., axis],
            density,
            atol = 1e-6)
    rate = (
        vortex.velocity(t + _STEP, _POINTS)
        - vortex.velocity(t - _STEP, _POINTS)) / (2 * _STEP)
    np.testing.assert_allclose(
        vortex.velocity_time(t, _POINTS), rate, atol = 1e-6)
    laplacian = sum(
        vortex.velocity_gradient(t, _POINTS + shift)[..., axis]
        - vortex.velocity_gradient(t, _POINTS - shift)[..., axis]
        for axis, shift in enumerate(np.eye(2) * _STEP)) / (2 * _STEP)
    np.testing.assert_allclose(
        vortex.velocity_laplacian(t, _POINTS), laplacian, atol = 1e-4)
    return

def test_rest_forcing_vanishes():
    law = relentless.Isentropic()
    viscosity = relentless.ViscosityParams()
    sources = relentless.Rest(value = 2.0).sources(law, viscosity)
    np.testing.assert_allclose(sources.mass(0.1, _POINTS), 0.0)
    np.testing.assert_allclose(sources.momentum(0.1, _POINTS), 0.0)
    with pytest.raises(NotImplementedError):
        relentless.GaussianBump().sources(law, viscosity)
    return

def test_vortex_mass_source():
    vortex = relentless.Vortex()
    law = relentless.Isentropic()
    viscosity = relentless.ViscosityParams()
    sources = vortex.sources(law, viscosity)
    t = 0.2
    velocity = vortex.velocity(t, _POINTS)
    expected = vortex.density_time(t, _POINTS) + np.sum(
        velocity * vortex.density_gradient(t, _POINTS), axis = -1)
    np.testing.assert_allclose(sources.mass(t, _POINTS), expected, atol = 1e-12)
    assert sources.momentum(t, _POINTS).shape == (len(_POINTS), 2)
    return


if __name__ == '__main__':
    test_registry()
    test_fields_vanish_on_the_boundary()
    test_vortex_derivatives()
    test_rest_forcing_vanishes()
    test_vortex_mass_source()
