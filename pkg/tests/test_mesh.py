"""
test_mesh: tests triangulations, their geometry and their validation
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


def test_structured_counts():
    mesh = relentless.structured_triangulation(2, 2)
    assert mesh.n_cells == 8
    assert mesh.n_faces == 16
    assert mesh.n_dofs == 8
    assert len(mesh.boundary_faces) == 8
    assert mesh.area == pytest.approx(1.0)
    assert mesh.h == pytest.approx(0.5 * math.sqrt(2.0))
    wide = relentless.structured_triangulation(3, 2, rect = (0, 0, 3, 1))
    assert wide.n_cells == 12
    assert wide.n_faces == 3 * 3 + 2 * 4 + 3 * 2
    assert wide.area == pytest.approx(3.0)
    return

def test_normals_and_orientation():
    mesh = relentless.structured_triangulation(3, 3)
    for face in mesh.internal_faces:
        owner, neighbor = mesh.face_cells[face]
        np.testing.assert_allclose(
            mesh.normal(face, owner), -mesh.normal(face, neighbor))
        outward = mesh.face_midpoints[face] - mesh.centroids[owner]
        assert outward @ mesh.normal(face, owner) > 0
    closure = np.einsum(
        'cj,cjk->ck', mesh.cell_face_measures, mesh.cell_normals)
    np.testing.assert_allclose(closure, 0.0, atol = 1e-14)
    with pytest.raises(KeyError):
        mesh.normal(0, int(np.setdiff1d(
            np.arange(mesh.n_cells), mesh.face_cells[0])[0]))
    return

def test_quality_and_refinement():
    mesh = relentless.structured_triangulation(2, 2)
    measured = relentless.quality(mesh)
    assert measured.theta == pytest.approx(math.sqrt(2.0) - 1.0)
    assert measured.h == pytest.approx(mesh.h)
    finer = relentless.refine_uniform(mesh)
    assert finer.n_cells == 4 * mesh.n_cells
    assert finer.h == pytest.approx(0.5 * mesh.h)
    assert finer.area == pytest.approx(mesh.area)
    assert relentless.quality(finer).theta == pytest.approx(measured.theta)
    return

def test_single_triangle_and_orientation():
    mesh = relentless.build_mesh([[0, 0], [1, 0], [0, 1]], [[0, 2, 1]])
    assert mesh.n_faces == 3
    assert mesh.n_dofs == 0
    assert mesh.cell_measures[0] == pytest.approx(0.5)
    assert len(mesh.boundary_faces) == 3
    return

def test_invalid_meshes():
    with pytest.raises(relentless.DegenerateCell):
        relentless.build_mesh([[0, 0], [1, 1], [2, 2]], [[0, 1, 2]])
    with pytest.raises(relentless.DuplicateCell):
        relentless.build_mesh(
            [[0, 0], [1, 0], [0, 1]], [[0, 1, 2], [2, 1, 0]])
    with pytest.raises(relentless.NonConforming):
        relentless.build_mesh(
            [[0, 0], [2, 0], [0, 2], [2, 2], [1, 1]],
            [[0, 1, 2], [1, 3, 4], [4, 3, 2]])
    with pytest.raises(IndexError):
        relentless.build_mesh([[0, 0], [1, 0], [0, 1]], [[0, 1, 3]])
    return

def test_read_mesh(tmp_path):
    path = tmp_path / 'square.mesh'
    path.write_text('4\n0 0\n1 0\n1 1\n0 1\n2\n0 1 2\n0 2 3\n')
    mesh = relentless.read_mesh(path)
    assert mesh.n_cells == 2
    assert mesh.n_dofs == 1
    assert mesh.area == pytest.approx(1.0)
    truncated = tmp_path / 'truncated.mesh'
    truncated.write_text('4\n0 0\n1 0\n1 1\n0 1\n2\n0 1 2\n0 2\n')
    with pytest.raises(ValueError):
        relentless.read_mesh(truncated)
    return


if __name__ == '__main__':
    test_structured_counts()
    test_normals_and_orientation()
    test_quality_and_refinement()
    test_single_triangle_and_orientation()
    test_invalid_meshes()
