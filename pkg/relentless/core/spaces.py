"""
spaces: piecewise constant and Crouzeix-Raviart fields on a Mesh
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
    Quadrature (object): barycentric points and area-fraction weights.
    ScalarCellField (object): one value (or small vector) per cell.
    CRVectorField (object): velocity with one 2-vector per internal face.
    BrokenGradient (object): constant gradient tensor per cell.
    triangle_rule: quadrature rule on triangles of a given exactness.
    edge_rule: Gauss-Legendre rule on faces of a given exactness.
    sample: values of analytic or discrete fields at quadrature points.
    cell_average: cell means of analytic or discrete fields.
    cr_interpolate: face-mean projection onto the velocity space.
    conforming_p1: velocity field of a continuous piecewise affine function.
    broken_gradient: per-cell gradients of a CRVectorField.
    broken_norm: broken Sobolev seminorm of a CRVectorField.
    lp_norm: Lebesgue norm of a field or of the difference of two fields.
    gradient_error: Lebesgue norm of an analytic gradient minus a broken one.
    discrete_lp_norm: face-weighted norm of velocity unknowns.
    face_jump_mean_square: scaled squared face jumps of a CRVectorField.
    divergence_compatibility_check: divergence preservation of the
        projection against piecewise constants.

On a cell the basis function of local face j is 1 - 2λ_j, with λ_j the
barycentric coordinate of local vertex j, and its gradient is |σ_j|n_j/|K|.

To Do:


"""
from __future__ import annotations
from collections.abc import Callable
import dataclasses
import functools
import logging
import math
from typing import Any, Optional

import numpy as np
from numpy.typing import NDArray
from scipy import special

from . import errors
from . import mesh as meshes


_LOGGER = logging.getLogger(__name__)
ANALYTIC_DEGREE = 6
EDGE_DEGREE = 5

Field = Any


@dataclasses.dataclass(frozen = True, eq = False)
class Quadrature(object):
    """Quadrature rule on the reference triangle or segment.

    Args:
        points (NDArray): (n_points, 3) barycentric coordinates on triangles
            or (n_points,) segment parameters in [0, 1] on faces.
        weights (NDArray): (n_points,) weights that sum to 1.
        degree (int): highest polynomial degree integrated exactly.

    """
    points: NDArray
    weights: NDArray
    degree: int


@dataclasses.dataclass(eq = False)
class ScalarCellField(object):
    """Piecewise constant field.

    Args:
        mesh (meshes.Mesh): mesh the field lives on.
        values (NDArray): (n_cells,) values, or (n_cells, d) for cell averages
            of vector quantities.

    """
    mesh: meshes.Mesh
    values: NDArray

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        self.values = np.asarray(self.values, dtype = float)
        if self.values.shape[0:1] != (self.mesh.n_cells,):
            raise ValueError(
                f'a cell field needs {self.mesh.n_cells} values, not '
                f'{self.values.shape[0] if self.values.ndim else 0}')
        if not np.all(np.isfinite(self.values)):
            raise ValueError('cell field values must be finite')

    @classmethod
    def constant(cls, mesh: meshes.Mesh, value: float) -> ScalarCellField:
        """Returns a field equal to 'value' on every cell."""
        return cls(mesh = mesh, values = np.full(mesh.n_cells, float(value)))

    """ Properties """

    @property
    def integral(self) -> float | NDArray:
        """Returns Σ|K|q_K."""
        return np.einsum('c,c...->...', self.mesh.cell_measures, self.values)

    """ Dunder Methods """

    def __len__(self) -> int:
        return self.values.shape[0]

    def __getitem__(self, cell: int) -> float | NDArray:
        return self.values[cell]


@dataclasses.dataclass(eq = False)
class CRVectorField(object):
    """Nonconforming piecewise affine velocity with zero boundary face means.

    Unknowns are the face means on internal faces, ordered as in
    'mesh.internal_faces'. Scalar kernels read the interleaved view, where
    component i of unknown k sits at position 2k + i.

    Args:
        mesh (meshes.Mesh): mesh the field lives on.
        dofs (NDArray): (n_dofs, 2) face means on internal faces.

    """
    mesh: meshes.Mesh
    dofs: NDArray

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        self.dofs = np.asarray(self.dofs, dtype = float).reshape(-1, 2)
        if self.dofs.shape[0] != self.mesh.n_dofs:
            raise ValueError(
                f'a velocity field needs {self.mesh.n_dofs} face values, '
                f'not {self.dofs.shape[0]}')
        if not np.all(np.isfinite(self.dofs)):
            raise ValueError('velocity unknowns must be finite')

    @classmethod
    def zeros(cls, mesh: meshes.Mesh) -> CRVectorField:
        """Returns the zero field on 'mesh'."""
        return cls(mesh = mesh, dofs = np.zeros((mesh.n_dofs, 2)))

    @classmethod
    def basis(
        cls,
        mesh: meshes.Mesh,
        face: int,
        component: int = 0) -> CRVectorField:
        """Returns the basis function of internal 'face' times e_component.

        Raises:
            BoundaryFace: if 'face' is on the boundary.

        """
        dof = mesh.dofs[face]
        if dof < 0:
            raise errors.BoundaryFace(f'face {face} carries no unknown')
        dofs = np.zeros((mesh.n_dofs, 2))
        dofs[dof, component] = 1.0
        return cls(mesh = mesh, dofs = dofs)

    @classmethod
    def from_interleaved(
        cls,
        mesh: meshes.Mesh,
        values: NDArray) -> CRVectorField:
        """Returns a field from the interleaved unknown vector."""
        return cls(mesh = mesh, dofs = np.asarray(values).reshape(-1, 2))

    """ Properties """

    @property
    def interleaved(self) -> NDArray:
        """Returns unknowns as one flat vector, components interleaved."""
        return self.dofs.reshape(-1)

    @property
    def face_values(self) -> NDArray:
        """Returns (n_faces, 2) face means, zero on boundary faces."""
        values = np.zeros((self.mesh.n_faces, 2))
        values[self.mesh.internal_faces] = self.dofs
        return values

    @property
    def cell_dofs(self) -> NDArray:
        """Returns (n_cells, 3, 2) face means on each local face."""
        return self.face_values[self.mesh.cell_faces]

    @property
    def cell_means(self) -> NDArray:
        """Returns (n_cells, 2) cell averages, the centroid values."""
        return self.cell_dofs.mean(axis = 1)

    """ Public Methods """

    def at(self, barycentric: NDArray) -> NDArray:
        """Returns (n_cells, n_points, 2) values at barycentric points."""
        shape = 1.0 - 2.0 * np.asarray(barycentric)
        return np.einsum('qj,cjk->cqk', shape, self.cell_dofs)

    def evaluate(self, cells: NDArray, points: NDArray) -> NDArray:
        """Returns (m, 2) values of the restriction to 'cells' at 'points'."""
        cells = np.asarray(cells)
        barycentric = self.mesh.locate_barycentric(cells, points)
        values = self.face_values[self.mesh.cell_faces[cells]]
        return np.einsum('mj,mjk->mk', 1.0 - 2.0 * barycentric, values)

    """ Dunder Methods """

    def __add__(self, other: CRVectorField) -> CRVectorField:
        return CRVectorField(mesh = self.mesh, dofs = self.dofs + other.dofs)

    def __sub__(self, other: CRVectorField) -> CRVectorField:
        return CRVectorField(mesh = self.mesh, dofs = self.dofs - other.dofs)

    def __mul__(self, scale: float) -> CRVectorField:
        return CRVectorField(mesh = self.mesh, dofs = scale * self.dofs)

    __rmul__ = __mul__

    def __neg__(self) -> CRVectorField:
        return CRVectorField(mesh = self.mesh, dofs = -self.dofs)


@dataclasses.dataclass(eq = False)
class BrokenGradient(object):
    """Per-cell gradient tensors, entry [a, b] being ∂u_a/∂x_b.

    Args:
        mesh (meshes.Mesh): mesh the gradient lives on.
        tensors (NDArray): (n_cells, 2, 2) constant gradients.

    """
    mesh: meshes.Mesh
    tensors: NDArray

    """ Properties """

    @property
    def divergence(self) -> NDArray:
        """Returns (n_cells,) per-cell divergence, the trace."""
        return np.trace(self.tensors, axis1 = 1, axis2 = 2)

    @property
    def magnitude(self) -> NDArray:
        """Returns (n_cells,) Frobenius norms."""
        return np.linalg.norm(self.tensors, axis = (1, 2))


@functools.lru_cache(maxsize = None)
def triangle_rule(degree: int) -> Quadrature:
    """Returns a triangle rule exact for polynomials of total 'degree'.

    Degrees 1 and 2 use the centroid and the edge-midpoint rules. Higher
    degrees use a collapsed tensor rule of Gauss-Legendre and Gauss-Jacobi
    points.

    Raises:
        ValueError: if 'degree' is negative.

    """
    if degree < 0:
        raise ValueError(f'quadrature degree must be nonnegative, not {degree}')
    if degree <= 1:
        return Quadrature(
            points = np.full((1, 3), 1.0 / 3.0),
            weights = np.ones(1),
            degree = 1)
    if degree == 2:
        return Quadrature(
            points = np.array(
                [[0.0, 0.5, 0.5], [0.5, 0.0, 0.5], [0.5, 0.5, 0.0]]),
            weights = np.full(3, 1.0 / 3.0),
            degree = 2)
    count = math.ceil((degree + 1) / 2)
    nodes, node_weights = np.polynomial.legendre.leggauss(count)
    heights, height_weights = special.roots_jacobi(count, 1.0, 0.0)
    xi = 0.5 * (nodes + 1.0)
    eta = 0.5 * (heights + 1.0)
    grid_xi, grid_eta = np.meshgrid(xi, eta, indexing = 'ij')
    x = (grid_xi * (1.0 - grid_eta)).ravel()
    y = grid_eta.ravel()
    weights = np.outer(0.5 * node_weights, 0.25 * height_weights).ravel()
    return Quadrature(
        points = np.column_stack([1.0 - x - y, x, y]),
        weights = 2.0 * weights,
        degree = 2 * count - 1)

@functools.lru_cache(maxsize = None)
def edge_rule(degree: int) -> Quadrature:
    """Returns a Gauss-Legendre rule on [0, 1] exact for 'degree'."""
    if degree < 0:
        raise ValueError(f'quadrature degree must be nonnegative, not {degree}')
    count = max(1, math.ceil((degree + 1) / 2))
    nodes, weights = np.polynomial.legendre.leggauss(count)
    return Quadrature(
        points = 0.5 * (nodes + 1.0),
        weights = 0.5 * weights,
        degree = 2 * count - 1)

def sample(field: Field, mesh: meshes.Mesh, rule: Quadrature) -> NDArray:
    """Returns values of 'field' at the quadrature points of every cell.

    Args:
        field (Field): a callable of points shaped (..., 2), a CRVectorField
            or a ScalarCellField.
        mesh (meshes.Mesh): mesh holding the cells.
        rule (Quadrature): triangle rule.

    Returns:
        NDArray: (n_cells, n_points) or (n_cells, n_points, d) values.

    """
    if isinstance(field, CRVectorField):
        return field.at(rule.points)
    elif isinstance(field, ScalarCellField):
        values = field.values[:, None]
        return np.repeat(values, rule.points.shape[0], axis = 1)
    elif callable(field):
        return np.asarray(field(mesh.points(rule.points)), dtype = float)
    else:
        raise TypeError(f'{type(field).__name__} cannot be sampled')

def cell_average(
    field: Field,
    mesh: Optional[meshes.Mesh] = None,
    degree: int = ANALYTIC_DEGREE,
    exact_degree: Optional[int] = None) -> ScalarCellField:
    """Returns (1/|K|)∫_K field on every cell.

    Discrete fields are averaged exactly. Callables are integrated with
    'triangle_rule(degree)'.

    Args:
        field (Field): callable, CRVectorField or ScalarCellField.
        mesh (Optional[meshes.Mesh]): required for callables.
        degree (int): exactness of the rule used for callables.
        exact_degree (Optional[int]): polynomial degree the caller needs
            integrated exactly. Defaults to None.

    Raises:
        QuadratureDegreeTooLow: if 'exact_degree' exceeds what the rule of
            'degree' integrates exactly.

    Returns:
        ScalarCellField: the cell means (componentwise for vectors).

    """
    if isinstance(field, ScalarCellField):
        return field
    elif isinstance(field, CRVectorField):
        return ScalarCellField(mesh = field.mesh, values = field.cell_means)
    if mesh is None:
        raise TypeError('cell_average of a callable needs a mesh')
    rule = triangle_rule(degree)
    if exact_degree is not None and exact_degree > rule.degree:
        raise errors.QuadratureDegreeTooLow(
            f'a degree {rule.degree} rule cannot integrate degree '
            f'{exact_degree} exactly')
    values = sample(field, mesh, rule)
    return ScalarCellField(
        mesh = mesh,
        values = np.einsum('q,cq...->c...', rule.weights, values))

def face_means(
    field: Callable[[NDArray], NDArray],
    mesh: meshes.Mesh,
    degree: int = EDGE_DEGREE) -> NDArray:
    """Returns (n_faces, ...) face means of an analytic field."""
    rule = edge_rule(degree)
    starts = mesh.vertices[mesh.faces[:, 0]]
    tangents = mesh.vertices[mesh.faces[:, 1]] - starts
    points = starts[:, None, :] + rule.points[None, :, None] * tangents[:, None]
    values = np.asarray(field(points), dtype = float)
    return np.einsum('q,fq...->f...', rule.weights, values)

def cr_interpolate(
    field: Field,
    mesh: Optional[meshes.Mesh] = None,
    degree: int = EDGE_DEGREE) -> CRVectorField:
    """Projects a boundary-vanishing vector field onto the velocity space.

    The unknown on every internal face is the face mean of 'field'. Boundary
    face means are dropped; a warning is logged when they are not zero.

    Args:
        field (Field): callable returning (..., 2) values, or a CRVectorField.
        mesh (Optional[meshes.Mesh]): required for callables.
        degree (int): exactness of the edge rule. Defaults to EDGE_DEGREE.

    Returns:
        CRVectorField: the projection.

    """
    if isinstance(field, CRVectorField):
        return field
    if mesh is None:
        raise TypeError('cr_interpolate of a callable needs a mesh')
    means = face_means(field, mesh, degree = degree)
    if means.shape != (mesh.n_faces, 2):
        raise TypeError('cr_interpolate needs a 2-vector valued field')
    leak = np.abs(means[mesh.boundary_faces]).max(initial = 0.0)
    scale = max(1.0, np.abs(means).max(initial = 0.0))
    if leak > 1e-8 * scale:
        _LOGGER.warning(
            'boundary face means up to %.3e are dropped by the projection',
            leak)
    return CRVectorField(mesh = mesh, dofs = means[mesh.internal_faces])

def conforming_p1(mesh: meshes.Mesh, nodal: NDArray) -> CRVectorField:
    """Returns the velocity field of a continuous piecewise affine function.

    Args:
        mesh (meshes.Mesh): mesh holding the vertices.
        nodal (NDArray): (n_vertices, 2) vertex values, which should vanish
            on boundary vertices.

    """
    nodal = np.asarray(nodal, dtype = float)
    midpoints = 0.5 * (nodal[mesh.faces[:, 0]] + nodal[mesh.faces[:, 1]])
    return CRVectorField(mesh = mesh, dofs = midpoints[mesh.internal_faces])

def broken_gradient(field: CRVectorField) -> BrokenGradient:
    """Returns the exact per-cell gradient of 'field'."""
    mesh = field.mesh
    tensors = np.einsum(
        'cj,cja,cjb->cab',
        mesh.cell_face_measures,
        field.cell_dofs,
        mesh.cell_normals)
    return BrokenGradient(
        mesh = mesh,
        tensors = tensors / mesh.cell_measures[:, None, None])

def broken_norm(field: CRVectorField | BrokenGradient, p: float = 2) -> float:
    """Returns (Σ_K ‖∇u‖^p_{L^p(K)})^{1/p} with the Frobenius pointwise norm.

    Raises:
        ValueError: if 'p' is not in [1, ∞).

    """
    if not 1 <= p < math.inf:
        raise ValueError(f'exponent must be in [1, inf), not {p}')
    if isinstance(field, CRVectorField):
        field = broken_gradient(field)
    total = np.sum(field.mesh.cell_measures * field.magnitude**p)
    return float(total**(1.0 / p))

def lp_norm(
    field: Field,
    p: float = 2,
    mesh: Optional[meshes.Mesh] = None,
    reference: Optional[Field] = None,
    degree: int = ANALYTIC_DEGREE) -> float:
    """Returns ‖field − reference‖_{L^p(Ω)} on a triangle rule.

    Args:
        field (Field): callable, CRVectorField or ScalarCellField.
        p (float): exponent in [1, ∞). Defaults to 2.
        mesh (Optional[meshes.Mesh]): required when no discrete field
            supplies one.
        reference (Optional[Field]): field subtracted from 'field'. Defaults
            to None.
        degree (int): exactness of the triangle rule.

    """
    if not 1 <= p < math.inf:
        raise ValueError(f'exponent must be in [1, inf), not {p}')
    mesh = mesh or _mesh_of(field) or _mesh_of(reference)
    if mesh is None:
        raise TypeError('lp_norm of callables needs a mesh')
    rule = triangle_rule(degree)
    values = sample(field, mesh, rule)
    if reference is not None:
        values = values - sample(reference, mesh, rule)
    if values.ndim == 3:
        values = np.linalg.norm(values, axis = 2)
    weights = mesh.cell_measures[:, None] * rule.weights[None, :]
    return float(np.sum(weights * np.abs(values)**p)**(1.0 / p))

def gradient_error(
    gradient: Callable[[NDArray], NDArray],
    field: CRVectorField,
    p: float = 2,
    degree: int = ANALYTIC_DEGREE) -> float:
    """Returns ‖∇v − ∇_h field‖_{L^p} for an analytic gradient.

    Args:
        gradient (Callable[[NDArray], NDArray]): maps points (..., 2) to
            tensors (..., 2, 2) with entry [a, b] equal to ∂v_a/∂x_b.
        field (CRVectorField): discrete field.
        p (float): exponent. Defaults to 2.
        degree (int): exactness of the triangle rule.

    """
    mesh = field.mesh
    rule = triangle_rule(degree)
    exact = np.asarray(gradient(mesh.points(rule.points)), dtype = float)
    difference = exact - broken_gradient(field).tensors[:, None]
    magnitude = np.linalg.norm(difference, axis = (2, 3))
    weights = mesh.cell_measures[:, None] * rule.weights[None, :]
    return float(np.sum(weights * magnitude**p)**(1.0 / p))

def discrete_lp_norm(field: CRVectorField, p: float = 2) -> float:
    """Returns (Σ_{σ internal} |σ| h |v_σ|^p)^{1/p}."""
    mesh = field.mesh
    measures = mesh.face_measures[mesh.internal_faces]
    magnitude = np.linalg.norm(field.dofs, axis = 1)
    return float(np.sum(measures * mesh.h * magnitude**p)**(1.0 / p))

def face_jump_mean_square(
    field: CRVectorField,
    h: Optional[float] = None) -> float:
    """Returns Σ_σ (1/h)∫_σ |[u]|² with two-point Gauss rules on faces.

    The jump on a boundary face is the trace from its only cell.

    Args:
        field (CRVectorField): field to measure.
        h (Optional[float]): length scale. Defaults to the mesh size.

    """
    mesh = field.mesh
    h = mesh.h if h is None else h
    rule = edge_rule(3)
    starts = mesh.vertices[mesh.faces[:, 0]]
    tangents = mesh.vertices[mesh.faces[:, 1]] - starts
    points = starts[:, None, :] + rule.points[None, :, None] * tangents[:, None]
    count = rule.points.shape[0]
    flat = points.reshape(-1, 2)
    owners = np.repeat(mesh.owners, count)
    jumps = field.evaluate(owners, flat)
    internal = np.repeat(mesh.internal, count)
    neighbors = np.repeat(mesh.neighbors, count)[internal]
    jumps[internal] -= field.evaluate(neighbors, flat[internal])
    squares = np.sum(jumps**2, axis = 1).reshape(-1, count)
    integrals = mesh.face_measures * (squares @ rule.weights)
    return float(integrals.sum() / h)

def divergence_compatibility_check(
    field: Callable[[NDArray], NDArray],
    q: ScalarCellField,
    divergence: Optional[Callable[[NDArray], NDArray]] = None,
    degree: int = 10) -> float:
    """Returns |Σ_K q_K ∫_K div v_h − ∫_Ω q div v|.

    The continuous side integrates 'divergence' with a triangle rule of
    'degree' when it is given, and otherwise the boundary flux of 'field'
    with an edge rule of 'degree'.

    Args:
        field (Callable[[NDArray], NDArray]): boundary-vanishing vector field.
        q (ScalarCellField): piecewise constant test function.
        divergence (Optional[Callable[[NDArray], NDArray]]): analytic
            divergence of 'field'. Defaults to None.
        degree (int): exactness of the reference rule. Defaults to 10.

    """
    mesh = q.mesh
    projection = cr_interpolate(field, mesh)
    discrete = np.sum(
        q.values * mesh.cell_measures * broken_gradient(projection).divergence)
    if divergence is None:
        means = face_means(field, mesh, degree = degree)
        fluxes = np.einsum(
            'cj,cjk,cjk->c',
            mesh.cell_face_measures,
            means[mesh.cell_faces],
            mesh.cell_normals)
    else:
        rule = triangle_rule(degree)
        values = np.asarray(divergence(mesh.points(rule.points)))
        fluxes = mesh.cell_measures * (values @ rule.weights)
    return float(abs(discrete - np.sum(q.values * fluxes)))

def _mesh_of(field: Field) -> Optional[meshes.Mesh]:
    return getattr(field, 'mesh', None)
