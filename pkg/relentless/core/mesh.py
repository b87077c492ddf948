"""
mesh: conforming triangulations with the face connectivity the scheme needs
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
    Mesh (object): immutable triangulation with faces, adjacency, normals and
        measures.
    MeshQuality (object): regularity parameter, mesh size and uniformity
        ratios of a Mesh.
    build_mesh: validates vertices and cells and returns a Mesh.
    structured_triangulation: right-triangle mesh of a rectangle.
    quality: returns the MeshQuality of a Mesh.
    refine_uniform: splits every cell into four similar children.
    read_mesh: loads a Mesh from the plain ASCII mesh format.

Local face i of a cell is always the face opposite local vertex i.

To Do:


"""
from __future__ import annotations
from collections.abc import Sequence
import dataclasses
import logging
import pathlib

import numpy as np
from numpy.typing import NDArray
from scipy import spatial

from . import errors


_LOGGER = logging.getLogger(__name__)
_TOLERANCE = 1e-12
_LOCAL_FACES = np.array([[1, 2], [2, 0], [0, 1]])


@dataclasses.dataclass(frozen = True, eq = False)
class Mesh(object):
    """Conforming triangulation of a polygonal domain.

    Every array is read-only once the Mesh is built. Internal faces are stored
    once with a canonical owner (the first cell found to contain them), so
    the normal of an internal face points from 'owner' to 'neighbor' and its
    negation is never stored.

    Args:
        vertices (NDArray): (n_vertices, 2) coordinates.
        cells (NDArray): (n_cells, 3) positively oriented vertex triples.
        faces (NDArray): (n_faces, 2) sorted vertex pairs.
        face_cells (NDArray): (n_faces, 2) owner and neighbor cell of each
            face. The neighbor of a boundary face is -1.
        cell_faces (NDArray): (n_cells, 3) face opposite each local vertex.
        cell_signs (NDArray): (n_cells, 3) +1 where the cell owns the face and
            -1 where it is the neighbor.
        normals (NDArray): (n_faces, 2) unit normals pointing out of the owner.
        face_measures (NDArray): (n_faces,) face lengths |σ|.
        face_midpoints (NDArray): (n_faces, 2) face midpoints.
        cell_measures (NDArray): (n_cells,) cell areas |K|.
        cell_diameters (NDArray): (n_cells,) longest edge h_K of each cell.
        centroids (NDArray): (n_cells, 2) cell centroids.
        dofs (NDArray): (n_faces,) velocity unknown attached to each face, -1
            on the boundary.

    """
    vertices: NDArray
    cells: NDArray
    faces: NDArray
    face_cells: NDArray
    cell_faces: NDArray
    cell_signs: NDArray
    normals: NDArray
    face_measures: NDArray
    face_midpoints: NDArray
    cell_measures: NDArray
    cell_diameters: NDArray
    centroids: NDArray
    dofs: NDArray

    """ Properties """

    @property
    def n_cells(self) -> int:
        """Returns the number of cells."""
        return self.cells.shape[0]

    @property
    def n_faces(self) -> int:
        """Returns the number of faces."""
        return self.faces.shape[0]

    @property
    def n_dofs(self) -> int:
        """Returns the number of internal faces (scalar unknowns per field)."""
        return self.internal_faces.shape[0]

    @property
    def owners(self) -> NDArray:
        return self.face_cells[:, 0]

    @property
    def neighbors(self) -> NDArray:
        return self.face_cells[:, 1]

    @property
    def internal(self) -> NDArray:
        """Returns a boolean mask of internal faces."""
        return self.face_cells[:, 1] >= 0

    @property
    def internal_faces(self) -> NDArray:
        """Returns indices of internal faces in unknown order."""
        return np.flatnonzero(self.internal)

    @property
    def boundary_faces(self) -> NDArray:
        """Returns indices of boundary faces."""
        return np.flatnonzero(~self.internal)

    @property
    def face_diameters(self) -> NDArray:
        """Returns h_σ, which equals |σ| for segments."""
        return self.face_measures

    @property
    def h(self) -> float:
        """Returns the mesh size, the largest cell diameter."""
        return float(self.cell_diameters.max())

    @property
    def cell_normals(self) -> NDArray:
        """Returns (n_cells, 3, 2) outward normals n_{σ,K} per local face."""
        return self.normals[self.cell_faces] * self.cell_signs[..., None]

    @property
    def cell_face_measures(self) -> NDArray:
        """Returns (n_cells, 3) measures of the local faces."""
        return self.face_measures[self.cell_faces]

    @property
    def area(self) -> float:
        """Returns |Ω|."""
        return float(self.cell_measures.sum())

    """ Public Methods """

    def normal(self, face: int, cell: int) -> NDArray:
        """Returns n_{σ,K} for 'face' seen from 'cell'.

        Raises:
            KeyError: if 'cell' is not adjacent to 'face'.

        """
        if self.face_cells[face, 0] == cell:
            return self.normals[face].copy()
        elif self.face_cells[face, 1] == cell:
            return -self.normals[face]
        else:
            raise KeyError(f'cell {cell} is not adjacent to face {face}')

    def points(self, barycentric: NDArray) -> NDArray:
        """Maps barycentric coordinates into every cell.

        Args:
            barycentric (NDArray): (n_points, 3) barycentric coordinates.

        Returns:
            NDArray: (n_cells, n_points, 2) physical points.

        """
        corners = self.vertices[self.cells]
        return np.einsum('qv,cvk->cqk', barycentric, corners)

    def locate_barycentric(self, cells: NDArray, points: NDArray) -> NDArray:
        """Returns barycentric coordinates of 'points' in 'cells'.

        Args:
            cells (NDArray): (m,) cell indices.
            points (NDArray): (m, 2) physical points.

        Returns:
            NDArray: (m, 3) barycentric coordinates (not clipped).

        """
        corners = self.vertices[self.cells[cells]]
        jacobian = np.stack(
            [corners[:, 1] - corners[:, 0], corners[:, 2] - corners[:, 0]],
            axis = 2)
        local = np.linalg.solve(
            jacobian, (points - corners[:, 0])[..., None])[..., 0]
        return np.column_stack([1.0 - local.sum(axis = 1), local])


@dataclasses.dataclass(frozen = True)
class MeshQuality(object):
    """Regularity measures of a Mesh.

    Args:
        theta (float): min over cells of incircle diameter divided by h_K.
        h (float): largest cell diameter.
        uniformity_ratios (dict[str, float]): h over the smallest cell
            diameter, h over the smallest face, the largest |σ|h/|K| and the
            largest |K|/(|σ|h) over cells and their faces.

    """
    theta: float
    h: float
    uniformity_ratios: dict[str, float] = dataclasses.field(
        default_factory = dict)


def build_mesh(
    vertices: Sequence[Sequence[float]] | NDArray,
    cells: Sequence[Sequence[int]] | NDArray,
    verify: bool = True) -> Mesh:
    """Builds a Mesh from vertex coordinates and vertex-index triples.

    Clockwise cells are reoriented. Conformity is verified geometrically
    unless 'verify' is False, which is reserved for constructions that are
    conforming by design (structured grids and their refinements).

    Args:
        vertices (Sequence[Sequence[float]] | NDArray): 2D points.
        cells (Sequence[Sequence[int]] | NDArray): 0-based vertex triples.
        verify (bool): whether to check for hanging nodes and overlapping
            cells. Defaults to True.

    Raises:
        TypeError: if the arrays do not have the right shapes.
        IndexError: if a cell refers to a missing vertex.
        DegenerateCell: if a cell has zero area.
        DuplicateCell: if two cells share all three vertices.
        NonConforming: if a face is shared by more than two cells, a vertex
            hangs on a face or two cells overlap.

    Returns:
        Mesh: the validated triangulation.

    """
    points = np.array(vertices, dtype = float)
    triples = np.array(cells, dtype = np.int64)
    if points.ndim != 2 or points.shape[1] != 2:
        raise TypeError('vertices must be a list of 2D points')
    if triples.ndim != 2 or triples.shape[1] != 3 or triples.shape[0] == 0:
        raise TypeError('cells must be a non-empty list of vertex triples')
    if triples.min() < 0 or triples.max() >= points.shape[0]:
        raise IndexError(
            f'cells refer to vertices outside 0..{points.shape[0] - 1}')
    extent = np.ptp(points, axis = 0).max()
    corners = points[triples]
    areas = _signed_areas(corners)
    flat = np.abs(areas) <= _TOLERANCE * extent**2
    if flat.any():
        index = int(np.flatnonzero(flat)[0])
        raise errors.DegenerateCell(
            f'cell {index} {triples[index].tolist()} has zero area')
    clockwise = areas < 0
    triples[clockwise] = triples[clockwise][:, [0, 2, 1]]
    _check_duplicates(triples)
    n_vertices = points.shape[0]
    local = np.sort(triples[:, _LOCAL_FACES], axis = 2)
    keys = (local[..., 0] * n_vertices + local[..., 1]).reshape(-1)
    unique, inverse, counts = np.unique(
        keys, return_inverse = True, return_counts = True)
    inverse = inverse.reshape(-1)
    if counts.max() > 2:
        face = int(unique[np.argmax(counts)])
        raise errors.NonConforming(
            f'face {divmod(face, n_vertices)} is shared by more than two '
            f'cells')
    faces = np.column_stack(divmod(unique, n_vertices)).astype(np.int64)
    n_cells = triples.shape[0]
    n_faces = faces.shape[0]
    cell_faces = inverse.reshape(n_cells, 3)
    flat_cells = np.repeat(np.arange(n_cells), 3)
    order = np.argsort(inverse, kind = 'stable')
    starts = np.concatenate([[0], np.cumsum(counts)[:-1]])
    face_cells = np.full((n_faces, 2), -1, dtype = np.int64)
    face_cells[:, 0] = flat_cells[order[starts]]
    shared = counts == 2
    face_cells[shared, 1] = flat_cells[order[starts[shared] + 1]]
    corners = points[triples]
    centroids = corners.mean(axis = 1)
    tangents = points[faces[:, 1]] - points[faces[:, 0]]
    face_measures = np.linalg.norm(tangents, axis = 1)
    face_midpoints = 0.5 * (points[faces[:, 0]] + points[faces[:, 1]])
    normals = np.column_stack([tangents[:, 1], -tangents[:, 0]])
    normals = normals / face_measures[:, None]
    outward = np.einsum(
        'fk,fk->f', face_midpoints - centroids[face_cells[:, 0]], normals)
    normals[outward < 0] *= -1.0
    cell_signs = np.where(
        face_cells[cell_faces, 0] == np.arange(n_cells)[:, None], 1.0, -1.0)
    dofs = np.full(n_faces, -1, dtype = np.int64)
    dofs[shared] = np.arange(int(shared.sum()))
    mesh = Mesh(
        vertices = points,
        cells = triples,
        faces = faces,
        face_cells = face_cells,
        cell_faces = cell_faces,
        cell_signs = cell_signs,
        normals = normals,
        face_measures = face_measures,
        face_midpoints = face_midpoints,
        cell_measures = np.abs(areas),
        cell_diameters = face_measures[cell_faces].max(axis = 1),
        centroids = centroids,
        dofs = dofs)
    for item in dataclasses.fields(mesh):
        getattr(mesh, item.name).flags.writeable = False
    if verify:
        _verify_conformity(mesh)
    unused = n_vertices - np.unique(triples).size
    if unused:
        _LOGGER.warning('%d vertices are not used by any cell', unused)
    return mesh

def structured_triangulation(
    nx: int,
    ny: int,
    rect: Sequence[float] = (0.0, 0.0, 1.0, 1.0)) -> Mesh:
    """Returns a right-triangle mesh of a rectangle.

    Each of the nx by ny sub-rectangles is split along the diagonal from its
    lower left to its upper right corner.

    Args:
        nx (int): number of divisions along x.
        ny (int): number of divisions along y.
        rect (Sequence[float]): bounding box as (x_min, y_min, x_max, y_max).
            Defaults to the unit square.

    Raises:
        ValueError: if 'nx' or 'ny' is less than 1 or 'rect' is empty.

    Returns:
        Mesh: the structured triangulation.

    """
    if nx < 1 or ny < 1:
        raise ValueError(f'nx and ny must be at least 1, not {nx} and {ny}')
    x_min, y_min, x_max, y_max = (float(value) for value in rect)
    if x_max <= x_min or y_max <= y_min:
        raise ValueError(f'{tuple(rect)} is not a valid bounding box')
    xs = x_min + (x_max - x_min) * np.arange(nx + 1) / nx
    ys = y_min + (y_max - y_min) * np.arange(ny + 1) / ny
    grid_x, grid_y = np.meshgrid(xs, ys)
    vertices = np.column_stack([grid_x.ravel(), grid_y.ravel()])
    columns, rows = np.meshgrid(np.arange(nx), np.arange(ny))
    lower_left = (rows * (nx + 1) + columns).ravel()
    lower_right = lower_left + 1
    upper_left = lower_left + nx + 1
    upper_right = upper_left + 1
    cells = np.concatenate([
        np.column_stack([lower_left, lower_right, upper_right]),
        np.column_stack([lower_left, upper_right, upper_left])])
    return build_mesh(vertices = vertices, cells = cells, verify = False)

def quality(mesh: Mesh) -> MeshQuality:
    """Returns regularity measures of 'mesh'.

    The regularity parameter of a cell is the diameter of its incircle,
    4|K|/perimeter, divided by its diameter h_K.

    Args:
        mesh (Mesh): mesh to measure.

    Returns:
        MeshQuality: theta, h and the uniformity ratios.

    """
    lengths = mesh.cell_face_measures
    perimeters = lengths.sum(axis = 1)
    thetas = 4.0 * mesh.cell_measures / (perimeters * mesh.cell_diameters)
    h = mesh.h
    scaled = lengths * h / mesh.cell_measures[:, None]
    ratios = {
        'h_over_min_cell': h / float(mesh.cell_diameters.min()),
        'h_over_min_face': h / float(mesh.face_measures.min()),
        'max_face_h_over_cell': float(scaled.max()),
        'max_cell_over_face_h': float((1.0 / scaled).max())}
    return MeshQuality(
        theta = float(thetas.min()),
        h = h,
        uniformity_ratios = ratios)

def refine_uniform(mesh: Mesh) -> Mesh:
    """Splits every cell into four similar children through edge midpoints.

    Args:
        mesh (Mesh): mesh to refine.

    Returns:
        Mesh: the refined mesh, with half the mesh size and the same theta.

    """
    n_vertices = mesh.vertices.shape[0]
    vertices = np.concatenate([mesh.vertices, mesh.face_midpoints])
    v0, v1, v2 = mesh.cells.T
    m0, m1, m2 = (n_vertices + mesh.cell_faces).T
    cells = np.concatenate([
        np.column_stack([v0, m2, m1]),
        np.column_stack([m2, v1, m0]),
        np.column_stack([m1, m0, v2]),
        np.column_stack([m0, m1, m2])])
    return build_mesh(vertices = vertices, cells = cells, verify = False)

def read_mesh(path: str | pathlib.Path) -> Mesh:
    """Loads a Mesh from the ASCII mesh format.

    The format lists the vertex count, the vertex coordinates, the cell count
    and the 0-based vertex triples, separated by any whitespace.

    Args:
        path (str | pathlib.Path): file to read.

    Raises:
        ValueError: if the file is truncated or has extra values.

    Returns:
        Mesh: the validated triangulation.

    """
    tokens = pathlib.Path(path).read_text().split()
    try:
        n_vertices = int(tokens[0])
        stop = 1 + 2 * n_vertices
        coordinates = np.array(tokens[1:stop], dtype = float)
        n_cells = int(tokens[stop])
        indices = np.array(
            tokens[stop + 1:stop + 1 + 3 * n_cells], dtype = np.int64)
    except (IndexError, ValueError) as error:
        raise ValueError(f'{path} is not a valid mesh file') from error
    if (coordinates.size != 2 * n_vertices
            or indices.size != 3 * n_cells
            or len(tokens) != stop + 1 + 3 * n_cells):
        raise ValueError(f'{path} does not match its declared counts')
    return build_mesh(
        vertices = coordinates.reshape(n_vertices, 2),
        cells = indices.reshape(n_cells, 3))

def _signed_areas(corners: NDArray) -> NDArray:
    edges_1 = corners[:, 1] - corners[:, 0]
    edges_2 = corners[:, 2] - corners[:, 0]
    return 0.5 * (
        edges_1[:, 0] * edges_2[:, 1] - edges_1[:, 1] * edges_2[:, 0])

def _check_duplicates(triples: NDArray) -> None:
    keys = np.sort(triples, axis = 1)
    _, index, counts = np.unique(
        keys, axis = 0, return_index = True, return_counts = True)
    if counts.max() > 1:
        first = int(index[np.argmax(counts)])
        raise errors.DuplicateCell(
            f'cell {first} {keys[first].tolist()} appears more than once')
    return

def _verify_conformity(mesh: Mesh) -> None:
    """Raises NonConforming on hanging nodes or overlapping cells."""
    tolerance = _TOLERANCE * 1e2 * mesh.h
    used = np.unique(mesh.cells)
    tree = spatial.cKDTree(mesh.vertices[used])
    starts = mesh.vertices[mesh.faces[:, 0]]
    tangents = mesh.vertices[mesh.faces[:, 1]] - starts
    nearby = tree.query_ball_point(
        mesh.face_midpoints, r = 0.5 * mesh.face_measures + tolerance)
    for face, candidates in enumerate(nearby):
        for vertex in used[candidates]:
            if vertex in mesh.faces[face]:
                continue
            offset = mesh.vertices[vertex] - starts[face]
            length = mesh.face_measures[face]
            along = offset @ tangents[face] / length**2
            across = abs(
                offset[0] * tangents[face, 1]
                - offset[1] * tangents[face, 0]) / length
            if 0.0 < along < 1.0 and across <= tolerance:
                raise errors.NonConforming(
                    f'vertex {vertex} hangs on face '
                    f'{mesh.faces[face].tolist()}')
    pairs = spatial.cKDTree(mesh.centroids).query_pairs(
        r = 2.0 * mesh.h, output_type = 'ndarray')
    if pairs.size == 0:
        return
    first = mesh.vertices[mesh.cells[pairs[:, 0]]]
    second = mesh.vertices[mesh.cells[pairs[:, 1]]]
    axes = np.concatenate([_edge_normals(first), _edge_normals(second)], 1)
    project_first = np.einsum('pak,pvk->pav', axes, first)
    project_second = np.einsum('pak,pvk->pav', axes, second)
    separated = (
        (project_first.max(axis = 2)
            <= project_second.min(axis = 2) + tolerance)
        | (project_second.max(axis = 2)
            <= project_first.min(axis = 2) + tolerance))
    overlapping = ~separated.any(axis = 1)
    if overlapping.any():
        pair = pairs[np.argmax(overlapping)]
        raise errors.NonConforming(
            f'cells {pair[0]} and {pair[1]} overlap')
    return

def _edge_normals(corners: NDArray) -> NDArray:
    edges = np.roll(corners, -1, axis = 1) - corners
    normals = np.stack([edges[..., 1], -edges[..., 0]], axis = -1)
    return normals / np.linalg.norm(normals, axis = -1, keepdims = True)
