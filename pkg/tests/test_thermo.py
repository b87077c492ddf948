"""
test_thermo: tests pressure laws, Helmholtz functions and relative energies
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


def test_isentropic_closed_forms():
    law = relentless.Isentropic(gamma = 2.0)
    rho = np.linspace(0.1, 3.0, 12)
    np.testing.assert_allclose(law.pressure(rho), rho**2)
    np.testing.assert_allclose(relentless.helmholtz_H(rho, law), rho**2 - rho)
    np.testing.assert_allclose(
        relentless.bregman_E(rho, 1.3, law), (rho - 1.3)**2, atol = 1e-14)
    assert law.helmholtz(0.0) == 0.0
    soft = relentless.Isentropic(gamma = 1.4, coefficient = 2.0)
    np.testing.assert_allclose(
        rho * soft.helmholtz_derivative(rho) - soft.helmholtz(rho),
        soft.pressure(rho))
    assert soft.alpha == pytest.approx(-0.6)
    assert np.all(soft.bregman(rho, 0.7) >= 0.0)
    return

def test_pressure_law_errors():
    with pytest.raises(ValueError):
        relentless.Isentropic(gamma = 0.5)
    with pytest.raises(ValueError):
        relentless.Isentropic(coefficient = 0.0)
    isothermal = relentless.Isentropic(gamma = 1.0)
    with pytest.raises(relentless.NegativeDensity):
        isothermal.helmholtz(0.0)
    with pytest.raises(relentless.NegativeDensity):
        isothermal.helmholtz(-1.0)
    with pytest.raises(relentless.NonPositiveReference):
        isothermal.bregman(1.0, 0.0)
    with pytest.raises(ValueError):
        relentless.Tabulated(
            gamma = 1.5,
            pressure_function = lambda rho: rho**1.5,
            derivative_function = lambda rho: 1.5 * np.sqrt(rho))
    with pytest.raises(ValueError):
        relentless.Tabulated(densities = [1.0, 2.0], pressures = [1.0, 0.5])
    return

def test_tabulated_matches_isentropic():
    exact = relentless.Isentropic(gamma = 2.0)
    rho = np.array([0.2, 0.9, 1.0, 2.5])
    from_callables = relentless.Tabulated(
        gamma = 2.0,
        pressure_function = lambda z: z**2,
        derivative_function = lambda z: 2.0 * z)
    densities = np.geomspace(0.01, 100.0, 25)
    from_table = relentless.Tabulated(
        gamma = 2.0,
        densities = densities,
        pressures = densities**2)
    for law in (from_callables, from_table):
        np.testing.assert_allclose(
            law.helmholtz(rho), exact.helmholtz(rho), atol = 1e-8)
        np.testing.assert_allclose(
            law.helmholtz_derivative(rho),
            exact.helmholtz_derivative(rho),
            atol = 1e-8)
        np.testing.assert_allclose(
            law.bregman(rho, 1.5), exact.bregman(rho, 1.5), atol = 1e-7)
    return

def test_bregman_round_off_and_nonconvex_gap(caplog):
    law = relentless.Isentropic(gamma = 2.0)
    assert law.bregman(1.0, 1.0) == 0.0
    assert law.bregman(1.0 + 1e-9, 1.0) >= 0.0
    # concave helmholtz energy beyond ϱ ≈ 1261, above the validated range
    fading = relentless.Tabulated(
        gamma = 2.0,
        pressure_function = lambda z: z**2 * np.exp(-(z / 1500.0)**8),
        derivative_function = lambda z: (
            z * np.exp(-(z / 1500.0)**8) * (2.0 - 8.0 * (z / 1500.0)**8)))
    with caplog.at_level('WARNING', logger = 'relentless.core.thermo'):
        gap = fading.bregman(2000.0, 1600.0)
    assert gap < 0.0
    assert 'not convex' in caplog.text
    assert fading.bregman(1.2, 1.0) > 0.0
    return

def test_tabulated_quadrature_cache_is_bounded():
    law = relentless.Tabulated(
        gamma = 2.0,
        pressure_function = lambda z: z**2,
        derivative_function = lambda z: 2.0 * z)
    assert law._integral.cache_info().maxsize == 4096
    law.helmholtz(np.array([0.5, 2.0]))
    hits = law._integral.cache_info().hits
    law.helmholtz(np.array([0.5, 2.0]))
    assert law._integral.cache_info().hits == hits + 2
    return

def test_viscosity():
    viscosity = relentless.ViscosityParams(mu = 2.0, lambda_ = -1.0)
    assert viscosity.bulk == pytest.approx(1.0)
    with pytest.raises(ValueError):
        relentless.ViscosityParams(mu = 0.0)
    with pytest.raises(ValueError):
        relentless.ViscosityParams(mu = 1.0, lambda_ = -1.5)
    return

def test_density_split():
    mesh = relentless.structured_triangulation(2, 2)
    values = np.ones(mesh.n_cells)
    values[0], values[-1] = 0.1, 5.0
    rho = relentless.ScalarCellField(mesh = mesh, values = values)
    split = relentless.essential_residual_split(rho, 1.0, 1.0)
    assert split.residual.sum() == 2
    assert split.residual_measure == pytest.approx(0.25)
    assert split.residual_mass == pytest.approx((0.01 + 25.0) / 8.0)
    assert split.essential_distance == pytest.approx(0.0)
    shifted = relentless.essential_residual_split(
        rho, 1.0, 1.0, reference = 1.5)
    assert shifted.essential_distance == pytest.approx(6 * 0.25 / 8.0)
    with pytest.raises(ValueError):
        relentless.essential_residual_split(rho, 2.0, 1.0)
    return

def test_coercivity_and_exponent():
    law = relentless.Isentropic(gamma = 2.0)
    constant = relentless.coercivity_constant(law, 1.0, 2.0)
    assert 0.0 < constant <= 1.0
    assert relentless.convergence_exponent(2.0) == pytest.approx(1.0)
    assert relentless.convergence_exponent(1.5) == pytest.approx(2.0 / 3.0)
    assert relentless.convergence_exponent(3.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        relentless.convergence_exponent(1.0)
    return

def test_relative_energy_of_identical_states():
    mesh = relentless.structured_triangulation(2, 2)
    state = relentless.State(
        time_index = 0,
        rho = relentless.ScalarCellField.constant(mesh, 1.2),
        u = relentless.CRVectorField.zeros(mesh))
    law = relentless.Isentropic(gamma = 2.0)
    assert relentless.relative_energy(
        state, state.rho, state.u, law) == pytest.approx(0.0)
    lighter = relentless.ScalarCellField.constant(mesh, 1.0)
    assert relentless.relative_energy(
        state, lighter, state.u, law) == pytest.approx(0.04)
    return


if __name__ == '__main__':
    test_isentropic_closed_forms()
    test_pressure_law_errors()
    test_tabulated_matches_isentropic()
    test_tabulated_quadrature_cache_is_bounded()
    test_viscosity()
    test_density_split()
    test_coercivity_and_exponent()
    test_relative_energy_of_identical_states()
