"""
test_laboratory: tests the discrete inequality probes
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


def test_random_fields_are_reproducible():
    mesh = relentless.structured_triangulation(4, 4)
    first = relentless.random_fields(mesh, np.random.default_rng(5), 3)
    second = relentless.random_fields(mesh, np.random.default_rng(5), 3)
    assert first.shape == (3, mesh.n_dofs, 2)
    np.testing.assert_array_equal(first, second)
    return

def test_random_fields_default_to_standard_normal():
    mesh = relentless.structured_triangulation(4, 4)
    noise = relentless.random_fields(mesh, np.random.default_rng(5), 3)
    expected = np.random.default_rng(5).standard_normal((3, mesh.n_dofs, 2))
    np.testing.assert_array_equal(noise, expected)
    smooth = relentless.random_fields(
        mesh, np.random.default_rng(5), 3, smooth = True)
    assert smooth.shape == noise.shape
    assert not np.allclose(smooth, noise)
    sobolev = relentless.Resources.probe['sobolev_vh'].create()
    poincare = relentless.Resources.probe['poincare'].create()
    assert sobolev.smooth and not poincare.smooth
    return

def test_projection_orders():
    report = relentless.probe_projection_orders(levels = 3)
    assert report.name == 'projection_orders'
    assert report.levels == [0, 1, 2]
    assert report.h[1] == pytest.approx(0.5 * report.h[0])
    assert report.orders_within({'value': 2.0, 'gradient': 1.0}, 0.25)
    assert report.orders_within(
        {'value_nonseparable': 2.0, 'gradient_nonseparable': 1.0}, 0.3)
    assert report.expected == {
        'value': 2.0,
        'gradient': 1.0,
        'value_nonseparable': 2.0,
        'gradient_nonseparable': 1.0}
    assert report.within_band()
    assert report.min_ratio is None
    return

def test_projection_first_order_constants_shrink():
    report = relentless.probe_projection_orders(levels = 3)
    assert set(report.bounds) == {'value', 'gradient'}
    for values in report.bounds.values():
        assert len(values) == 3
        assert np.all(np.asarray(values) > 0)
        assert np.all(np.diff(values) < 0)
    frame = report.to_frame()
    assert {'value_bound', 'gradient_bound'} <= set(frame.columns)
    custom = relentless.probe_projection_orders(
        levels = 2,
        field = lambda x: np.stack([
            x[..., 0] * (1 - x[..., 0]) * x[..., 1] * (1 - x[..., 1])] * 2,
            axis = -1),
        gradient = lambda x: np.stack([np.stack([
            (1 - 2 * x[..., 0]) * x[..., 1] * (1 - x[..., 1]),
            x[..., 0] * (1 - x[..., 0]) * (1 - 2 * x[..., 1])],
            axis = -1)] * 2, axis = -2))
    assert set(custom.orders) == {'value', 'gradient'}
    assert set(custom.expected) == {'value', 'gradient'}
    return

def test_poincare_and_jump_bound():
    for report in (
            relentless.probe_poincare(levels = 3, samples = 4),
            relentless.probe_jump_bound(levels = 3, samples = 4)):
        assert len(report.max_ratio) == 3
        assert np.all(np.isfinite(report.max_ratio))
        assert np.all(np.asarray(report.max_ratio) > 0)
        np.testing.assert_allclose(report.theta, np.sqrt(2.0) - 1.0)
        assert not report.flagged
    return

def test_norm_equivalence_is_two_sided():
    report = relentless.probe_norm_equivalence(levels = 2, samples = 4)
    assert report.min_ratio is not None
    assert all(
        0 < low <= high
        for low, high in zip(report.min_ratio, report.max_ratio))
    frame = report.to_frame()
    assert list(frame.columns) == [
        'level', 'h', 'theta', 'max_ratio', 'min_ratio']
    return

def test_needle_meshes():
    report = relentless.probe_sobolev_Vh(levels = 2, samples = 3, needle = True)
    assert report.needle
    assert max(report.theta) < 0.05
    assert isinstance(report.flagged, bool)
    return

def test_every_inequality_runs():
    reports = relentless.probe_all(levels = 2, samples = 2, seed = 11)
    assert set(reports) == set(relentless.PROBES)
    sobolev = relentless.Resources.probe['sobolev_vh'].create(
        levels = 2, samples = 2, exponent = 6.0, unused = True)
    assert sobolev.exponent == 6.0
    assert sobolev.key == 'sobolev_vh'
    assert len(sobolev.meshes()) == 2
    return


if __name__ == '__main__':
    test_random_fields_are_reproducible()
    test_random_fields_default_to_standard_normal()
    test_projection_orders()
    test_projection_first_order_constants_shrink()
    test_poincare_and_jump_bound()
    test_norm_equivalence_is_two_sided()
    test_needle_meshes()
    test_every_inequality_runs()
