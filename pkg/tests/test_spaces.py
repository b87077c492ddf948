"""
test_spaces: tests quadrature, projections and norms of discrete fields
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


def test_triangle_rules():
    for degree in range(0, 9):
        rule = relentless.triangle_rule(degree)
        assert rule.degree >= degree
        assert rule.weights.sum() == pytest.approx(1.0)
        np.testing.assert_allclose(rule.points.sum(axis = 1), 1.0)
    rule = relentless.triangle_rule(6)
    x, y = rule.points[:, 1], rule.points[:, 2]
    for a, b in [(3, 3), (2, 4), (0, 5), (1, 0)]:
        exact = 2.0 * math.factorial(a) * math.factorial(b) / math.factorial(
            a + b + 2)
        assert rule.weights @ (x**a * y**b) == pytest.approx(exact)
    edge = relentless.edge_rule(5)
    assert edge.weights @ edge.points**5 == pytest.approx(1.0 / 6.0)
    with pytest.raises(ValueError):
        relentless.triangle_rule(-1)
    return

def test_cell_average():
    mesh = relentless.structured_triangulation(2, 2)
    averages = relentless.cell_average(lambda x: x[..., 0] * x[..., 1], mesh)
    assert averages.integral == pytest.approx(0.25)
    constant = relentless.ScalarCellField.constant(mesh, 2.0)
    assert relentless.lp_norm(constant) == pytest.approx(2.0)
    with pytest.raises(relentless.QuadratureDegreeTooLow):
        relentless.cell_average(
            lambda x: x[..., 0], mesh, degree = 6, exact_degree = 8)
    return

def test_continuity_at_face_midpoints():
    mesh = relentless.structured_triangulation(3, 3)
    rng = np.random.default_rng(0)
    field = relentless.CRVectorField(
        mesh = mesh,
        dofs = rng.standard_normal((mesh.n_dofs, 2)))
    faces = mesh.internal_faces
    midpoints = mesh.face_midpoints[faces]
    owners = field.evaluate(mesh.owners[faces], midpoints)
    neighbors = field.evaluate(mesh.neighbors[faces], midpoints)
    np.testing.assert_allclose(owners, field.dofs)
    np.testing.assert_allclose(neighbors, field.dofs)
    np.testing.assert_allclose(
        field.cell_means,
        relentless.cell_average(field).values)
    with pytest.raises(ValueError):
        relentless.CRVectorField(
            mesh = mesh,
            dofs = np.zeros((mesh.n_dofs + 1, 2)))
    return

def test_basis():
    mesh = relentless.structured_triangulation(2, 2)
    face = int(mesh.internal_faces[0])
    basis = relentless.CRVectorField.basis(mesh, face, component = 1)
    assert basis.face_values[face, 1] == 1.0
    assert np.abs(basis.face_values).sum() == 1.0
    with pytest.raises(relentless.BoundaryFace):
        relentless.CRVectorField.basis(mesh, int(mesh.boundary_faces[0]))
    return

def test_broken_gradient_of_conforming_field():
    mesh = relentless.structured_triangulation(2, 2)
    nodal = np.zeros((mesh.vertices.shape[0], 2))
    centre = int(np.argmin(np.linalg.norm(mesh.vertices - 0.5, axis = 1)))
    nodal[centre] = [1.0, -2.0]
    field = relentless.conforming_p1(mesh, nodal)
    assert relentless.face_jump_mean_square(field) == pytest.approx(
        0.0, abs = 1e-24)
    gradient = relentless.broken_gradient(field)
    slope = gradient.tensors[:, 0, :]
    np.testing.assert_allclose(gradient.tensors[:, 1, :], -2.0 * slope)
    np.testing.assert_allclose(np.abs(slope).max(), 2.0)
    return

def test_projection_of_affine_fields():
    mesh = relentless.structured_triangulation(4, 4)
    matrix = np.array([[1.0, 2.0], [-3.0, 0.5]])
    field = relentless.cr_interpolate(lambda x: x @ matrix.T, mesh)
    gradient = relentless.broken_gradient(field).tensors
    interior = np.all(
        mesh.face_cells[mesh.cell_faces][..., 1] >= 0, axis = 1)
    np.testing.assert_allclose(gradient[interior], matrix[None])
    return

def test_norms():
    mesh = relentless.structured_triangulation(2, 2)
    zero = relentless.CRVectorField.zeros(mesh)
    assert relentless.broken_norm(zero) == 0.0
    assert relentless.discrete_lp_norm(zero) == 0.0
    ones = relentless.CRVectorField(
        mesh = mesh,
        dofs = np.ones((mesh.n_dofs, 2)))
    internal = mesh.face_measures[mesh.internal_faces].sum()
    assert relentless.discrete_lp_norm(ones) == pytest.approx(
        math.sqrt(2.0 * internal * mesh.h))
    assert relentless.gradient_error(
        lambda x: np.zeros(x.shape + (2,)), ones) == pytest.approx(
            relentless.broken_norm(ones))
    with pytest.raises(ValueError):
        relentless.broken_norm(ones, p = 0.5)
    return

def test_divergence_compatibility():
    mesh = relentless.structured_triangulation(4, 4)
    q = relentless.ScalarCellField(
        mesh = mesh,
        values = np.random.default_rng(1).uniform(size = mesh.n_cells))

    def field(x):
        bubble = x[..., 0] * (1 - x[..., 0]) * x[..., 1] * (1 - x[..., 1])
        return np.stack([bubble, np.zeros_like(bubble)], axis = -1)

    def divergence(x):
        return (1 - 2 * x[..., 0]) * x[..., 1] * (1 - x[..., 1])

    assert relentless.divergence_compatibility_check(
        field, q, divergence = divergence) < 1e-12
    assert relentless.divergence_compatibility_check(field, q) < 1e-12
    return


if __name__ == '__main__':
    test_triangle_rules()
    test_cell_average()
    test_continuity_at_face_midpoints()
    test_basis()
    test_broken_gradient_of_conforming_field()
    test_projection_of_affine_fields()
    test_norms()
    test_divergence_compatibility()
