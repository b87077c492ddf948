"""
scheme: implicit upwind finite volume / Crouzeix-Raviart time stepping
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
    State (object): density and velocity at one time level.
    SchemeConfig (object): time step, tolerances and physics of a run.
    SourceTerms (object): optional analytic mass and momentum forcing.
    Trajectory (object): states of a run with its metadata.
    upwind_value: value of a cell field seen from the upwind side of a face.
    continuity_step: one implicit upwind mass balance for a frozen velocity.
    momentum_residual: residual of the momentum balance per unknown.
    advance_time_step: Picard iteration coupling both balances.
    run_simulation: marches a trajectory with dt backoff on failure.
    project_initial_data: discrete initial state from analytic data.

The unknowns of time level n solve, on every cell K and for every velocity
test function v,

    |K|(ϱ_K − ϱ_K^{n−1})/Δt + Σ_σ |σ| ϱ_σ^{up} u_σ·n_{σ,K} = |K| s_K,

    Σ_K |K|(ϱ_K û_K − ϱ_K^{n−1} û_K^{n−1})/Δt · v̂_K
        + Σ_K Σ_σ |σ| ϱ_σ^{up} û_σ^{up} (u_σ·n_{σ,K}) · v̂_K
        + μ(∇u, ∇v) + (μ + λ)(div u, div v)
        − Σ_K p(ϱ_K) Σ_σ |σ| v_σ·n_{σ,K} = (f_m, v),

where hats are cell averages and upwinding follows the sign of u_σ·n_{σ,K}.

To Do:


"""
from __future__ import annotations
from collections.abc import Callable, Iterator, Sequence
import dataclasses
import functools
import logging
import math
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy import sparse
from scipy.sparse import linalg

from . import errors
from . import mesh as meshes
from . import spaces
from . import thermo


_LOGGER = logging.getLogger(__name__)

Function = Callable[[NDArray], NDArray]
Forcing = Callable[[float, NDArray], NDArray]
Hook = Callable[['State', 'State'], None]


@dataclasses.dataclass(frozen = True, eq = False)
class State(object):
    """Discrete density and velocity at one time level.

    Args:
        time_index (int): index n of the time level.
        rho (spaces.ScalarCellField): cell densities, strictly positive.
        u (spaces.CRVectorField): velocity.
        time (float): the time t_n. Defaults to 0.0.
        mass_load (Optional[NDArray]): (n_cells,) cell-averaged mass source
            applied to reach this state. Defaults to None.
        momentum_load (Optional[NDArray]): (n_dofs, 2) momentum source tested
            against each basis function. Defaults to None.
        iterations (int): Picard iterations spent on this state.

    """
    time_index: int
    rho: spaces.ScalarCellField
    u: spaces.CRVectorField
    time: float = 0.0
    mass_load: Optional[NDArray] = dataclasses.field(
        default = None, repr = False)
    momentum_load: Optional[NDArray] = dataclasses.field(
        default = None, repr = False)
    iterations: int = 0

    """ Properties """

    @property
    def mesh(self) -> meshes.Mesh:
        return self.rho.mesh

    @property
    def mass(self) -> float:
        """Returns Σ|K|ϱ_K."""
        return float(self.rho.integral)


@dataclasses.dataclass(frozen = True)
class SchemeConfig(object):
    """Settings of a time-marching run.

    Args:
        dt (float): uniform time step.
        T_final (float): final time.
        law (thermo.PressureLaw): equation of state. Defaults to p = ϱ².
        viscosity (thermo.ViscosityParams): μ and λ. Defaults to μ = 1,
            λ = 0.
        picard_tol (float): tolerance on the larger relative residual of the
            two balances. Defaults to 1e-10.
        picard_max_iters (int): iteration cap. Defaults to 100.
        linear_tol (float): relative tolerance of the iterative solver.
            Defaults to 1e-12.
        dt_backoff_factor (float): dt multiplier after a failed run. Defaults
            to 0.5.
        theta_min (float): smallest admitted mesh regularity. Defaults to 0.1.
        max_backoffs (int): restarts before giving up. Defaults to 8.
        solver (str): 'direct' or 'iterative'. Defaults to 'direct'.

    """
    dt: float
    T_final: float
    law: thermo.PressureLaw = dataclasses.field(
        default_factory = thermo.Isentropic)
    viscosity: thermo.ViscosityParams = dataclasses.field(
        default_factory = thermo.ViscosityParams)
    picard_tol: float = 1e-10
    picard_max_iters: int = 100
    linear_tol: float = 1e-12
    dt_backoff_factor: float = 0.5
    theta_min: float = 0.1
    max_backoffs: int = 8
    solver: str = 'direct'

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Validates an instance."""
        if not self.dt > 0:
            raise ValueError(f'dt must be positive, not {self.dt}')
        if not self.T_final >= 0:
            raise ValueError(f'T_final must be nonnegative, not {self.T_final}')
        if not (self.picard_tol > 0 and self.linear_tol > 0):
            raise ValueError('tolerances must be positive')
        if self.picard_max_iters < 1:
            raise ValueError('picard_max_iters must be at least 1')
        if not 0 < self.dt_backoff_factor < 1:
            raise ValueError(
                f'dt_backoff_factor must be in (0, 1), not '
                f'{self.dt_backoff_factor}')
        if self.max_backoffs < 0:
            raise ValueError('max_backoffs must be nonnegative')
        if self.solver not in ('direct', 'iterative'):
            raise ValueError(
                f'solver must be direct or iterative, not {self.solver}')

    """ Public Methods """

    def with_dt(self, dt: float) -> SchemeConfig:
        """Returns a copy with time step 'dt'."""
        return dataclasses.replace(self, dt = dt)

    """ Properties """

    @property
    def n_steps(self) -> int:
        """Returns N = round(T_final/dt)."""
        return int(round(self.T_final / self.dt))


@dataclasses.dataclass(frozen = True)
class SourceTerms(object):
    """Analytic forcing added to the right sides of both balances.

    Each source is a callable of (t, x) with x shaped (..., 2). The mass
    source enters as cell averages and the momentum source as integrals
    against the velocity basis functions, both at the new time level.

    Args:
        mass (Optional[Forcing]): f_ϱ(t, x) returning (...) values.
        momentum (Optional[Forcing]): f_m(t, x) returning (..., 2) values.
        degree (int): exactness of the quadrature. Defaults to 6.

    """
    mass: Optional[Forcing] = None
    momentum: Optional[Forcing] = None
    degree: int = spaces.ANALYTIC_DEGREE

    """ Public Methods """

    def cell_mass(self, mesh: meshes.Mesh, t: float) -> Optional[NDArray]:
        """Returns (n_cells,) cell averages of f_ϱ(t), or None."""
        if self.mass is None:
            return None
        averages = spaces.cell_average(
            lambda x: self.mass(t, x), mesh, degree = self.degree)
        return averages.values

    def momentum_load(self, mesh: meshes.Mesh, t: float) -> Optional[NDArray]:
        """Returns (n_dofs, 2) integrals ∫ f_m(t)·φ_σ e_i, or None."""
        if self.momentum is None:
            return None
        rule = spaces.triangle_rule(self.degree)
        values = np.asarray(self.momentum(t, mesh.points(rule.points)))
        shapes = 1.0 - 2.0 * rule.points
        local = np.einsum(
            'c,q,qj,cqk->cjk', mesh.cell_measures, rule.weights, shapes, values)
        load = np.zeros((mesh.n_faces, 2))
        np.add.at(load, mesh.cell_faces.ravel(), local.reshape(-1, 2))
        return load[mesh.internal_faces]

    """ Properties """

    @property
    def is_zero(self) -> bool:
        return self.mass is None and self.momentum is None


@dataclasses.dataclass
class Trajectory(object):
    """States of one run at t_0, ..., t_N.

    Args:
        states (list[State]): accepted states in time order.
        config (SchemeConfig): settings actually used, after any backoff.
        sources (Optional[SourceTerms]): forcing of the run.
        backoffs (int): number of restarts with a smaller dt.
        failure (Optional[str]): reason the run stopped early, or None.

    """
    states: list[State]
    config: SchemeConfig
    sources: Optional[SourceTerms] = None
    backoffs: int = 0
    failure: Optional[str] = None

    """ Properties """

    @property
    def mesh(self) -> meshes.Mesh:
        return self.states[0].mesh

    @property
    def times(self) -> NDArray:
        return np.array([state.time for state in self.states])

    @property
    def failed(self) -> bool:
        return self.failure is not None

    @property
    def final(self) -> State:
        return self.states[-1]

    """ Dunder Methods """

    def __len__(self) -> int:
        return len(self.states)

    def __getitem__(self, index: int) -> State:
        return self.states[index]

    def __iter__(self) -> Iterator[State]:
        return iter(self.states)


def upwind_value(
    q: spaces.ScalarCellField,
    u: spaces.CRVectorField,
    face: int,
    owner_cell: Optional[int] = None) -> float | NDArray:
    """Returns q_K if u_σ·n_{σ,K} > 0 and q_L otherwise.

    Args:
        q (spaces.ScalarCellField): transported cell quantity.
        u (spaces.CRVectorField): advecting velocity.
        face (int): internal face σ = K|L.
        owner_cell (Optional[int]): the cell K the normal points out of.
            Defaults to the stored owner of 'face'.

    Raises:
        BoundaryFace: if 'face' is on the boundary.

    """
    mesh = q.mesh
    if not mesh.internal[face]:
        raise errors.BoundaryFace(f'face {face} has no upwind side')
    owner, neighbor = mesh.face_cells[face]
    if owner_cell is None or owner_cell == owner:
        inside, outside = owner, neighbor
    else:
        inside, outside = neighbor, owner
    flux = u.face_values[face] @ mesh.normal(face, inside)
    return q.values[inside] if flux > 0 else q.values[outside]

def continuity_step(
    rho_prev: spaces.ScalarCellField,
    u: spaces.CRVectorField,
    dt: float,
    source: Optional[NDArray] = None,
    solver: str = 'direct',
    linear_tol: float = 1e-12) -> spaces.ScalarCellField:
    """Solves the implicit upwind mass balance for a frozen velocity.

    The matrix is an M-matrix whose column sums are |K|/Δt, so the result is
    positive for a nonnegative right side and conserves Σ|K|ϱ_K when there is
    no source.

    Args:
        rho_prev (spaces.ScalarCellField): densities of the previous level.
        u (spaces.CRVectorField): advecting velocity.
        dt (float): time step.
        source (Optional[NDArray]): (n_cells,) cell-averaged mass source.
        solver (str): 'direct' or 'iterative'.
        linear_tol (float): relative tolerance of the iterative solver.

    Raises:
        NegativeDensity: if 'rho_prev' or the result is not positive.
        LinearSolveFailure: if the solve fails.

    """
    if np.any(rho_prev.values <= 0):
        raise errors.NegativeDensity(
            f'previous density is not positive on cell '
            f'{int(np.argmin(rho_prev.values))}')
    mesh = rho_prev.mesh
    matrix = _continuity_matrix(mesh, u, dt)
    rhs = _continuity_rhs(rho_prev, dt, source)
    values = _solve(matrix, rhs, solver, linear_tol)
    if np.any(values <= 0):
        raise errors.NegativeDensity(
            f'continuity step produced density {values.min():.3e} on cell '
            f'{int(np.argmin(values))}')
    return spaces.ScalarCellField(mesh = mesh, values = values)

def momentum_residual(
    state_prev: State,
    state: State,
    dt: float,
    config: Optional[SchemeConfig] = None,
    sources: Optional[SourceTerms] = None) -> NDArray:
    """Returns the momentum balance residual tested against φ_σ e_i.

    Upwinding and fluxes use the velocity of 'state' itself, so the residual
    vanishes exactly for an exact discrete solution.

    Args:
        state_prev (State): previous level.
        state (State): candidate level.
        dt (float): time step.
        config (Optional[SchemeConfig]): physics. Defaults to p = ϱ² with
            μ = 1 and λ = 0.
        sources (Optional[SourceTerms]): forcing evaluated at 'state.time'.
            Defaults to the load recorded on 'state'.

    Returns:
        NDArray: (n_dofs, 2) residual, one 2-vector per internal face.

    """
    config = config or SchemeConfig(dt = dt, T_final = dt)
    mesh = state.mesh
    if sources is not None:
        load = sources.momentum_load(mesh, state.time)
    else:
        load = state.momentum_load
    matrix, rhs = _momentum_system(
        state_prev = state_prev,
        rho = state.rho,
        advecting = state.u,
        dt = dt,
        config = config,
        load = load)
    return (matrix @ state.u.interleaved - rhs).reshape(-1, 2)

def advance_time_step(
    state_prev: State,
    config: SchemeConfig,
    sources: Optional[SourceTerms] = None) -> State:
    """Returns the next state by Picard iteration on the coupled balances.

    Each iteration freezes the advecting velocity u^(k), solves the mass
    balance for ϱ^(k+1) and then the momentum balance, linear in u^(k+1),
    with ϱ^(k+1) and the upwind directions of u^(k). The iteration stops when
    the larger relative residual of the two balances, both evaluated with
    u^(k+1), is at most 'config.picard_tol'.

    Raises:
        NonlinearDivergence: if the tolerance is not met within
            'config.picard_max_iters' iterations or a density turns
            nonpositive.
        LinearSolveFailure: if a linear solve fails.

    """
    mesh = state_prev.mesh
    dt = config.dt
    time = state_prev.time + dt
    sources = sources or SourceTerms()
    mass_load = sources.cell_mass(mesh, time)
    momentum_load = sources.momentum_load(mesh, time)
    advecting = state_prev.u
    residual = math.inf
    for iteration in range(1, config.picard_max_iters + 1):
        try:
            rho = continuity_step(
                rho_prev = state_prev.rho,
                u = advecting,
                dt = dt,
                source = mass_load,
                solver = config.solver,
                linear_tol = config.linear_tol)
        except errors.NegativeDensity as error:
            raise errors.NonlinearDivergence(
                f'step {state_prev.time_index + 1} lost positivity: '
                f'{error}') from error
        matrix, rhs = _momentum_system(
            state_prev = state_prev,
            rho = rho,
            advecting = advecting,
            dt = dt,
            config = config,
            load = momentum_load)
        velocity = spaces.CRVectorField.from_interleaved(
            mesh, _solve(matrix, rhs, config.solver, config.linear_tol))
        mass_residual = _continuity_residual(
            state_prev.rho, rho, velocity, dt, mass_load)
        matrix, rhs = _momentum_system(
            state_prev = state_prev,
            rho = rho,
            advecting = velocity,
            dt = dt,
            config = config,
            load = momentum_load)
        momentum_residual = _relative_residual(
            matrix @ velocity.interleaved, rhs)
        residual = max(mass_residual, momentum_residual)
        _LOGGER.debug(
            'step %d iteration %d: mass residual %.3e, momentum residual '
            '%.3e', state_prev.time_index + 1, iteration, mass_residual,
            momentum_residual)
        if residual <= config.picard_tol:
            return State(
                time_index = state_prev.time_index + 1,
                rho = rho,
                u = velocity,
                time = time,
                mass_load = mass_load,
                momentum_load = momentum_load,
                iterations = iteration)
        advecting = velocity
    raise errors.NonlinearDivergence(
        f'step {state_prev.time_index + 1} stopped at residual {residual:.3e} '
        f'after {config.picard_max_iters} iterations with dt = {dt:.3e}')

def run_simulation(
    initial: State,
    config: SchemeConfig,
    sources: Optional[SourceTerms] = None,
    hooks: Sequence[Hook] = ()) -> Trajectory:
    """Marches 'initial' to 'config.T_final' with a uniform time step.

    The number of steps is N = round(T_final/dt) and dt is adjusted to
    T_final/N. A failed step restarts the whole run with dt multiplied by
    'config.dt_backoff_factor', at most 'config.max_backoffs' times, after
    which the partial trajectory is returned with its failure marker set.
    Hooks are called with (previous, current) after every accepted step of
    every attempt.

    Raises:
        MeshQualityError: if the mesh is less regular than
            'config.theta_min'.

    """
    theta = meshes.quality(initial.mesh).theta
    if theta < config.theta_min:
        raise errors.MeshQualityError(
            f'mesh regularity {theta:.4f} is below theta_min '
            f'{config.theta_min}')
    config = _fit_step(config)
    if config.n_steps == 0:
        return Trajectory(states = [initial], config = config, sources = sources)
    failure = None
    states = [initial]
    for backoff in range(config.max_backoffs + 1):
        states = [initial]
        try:
            for _ in range(config.n_steps):
                states.append(advance_time_step(states[-1], config, sources))
                for hook in hooks:
                    hook(states[-2], states[-1])
        except (errors.NonlinearDivergence, errors.LinearSolveFailure) as error:
            failure = str(error)
            if backoff == config.max_backoffs:
                break
            _LOGGER.warning(
                '%s; restarting with dt = %.3e',
                failure,
                config.dt * config.dt_backoff_factor)
            config = _fit_step(
                config.with_dt(config.dt * config.dt_backoff_factor))
        else:
            return Trajectory(
                states = states,
                config = config,
                sources = sources,
                backoffs = backoff)
    _LOGGER.error('run failed after %d backoffs: %s', backoff, failure)
    return Trajectory(
        states = states,
        config = config,
        sources = sources,
        backoffs = backoff,
        failure = failure)

def project_initial_data(
    rho0: Function | float | spaces.ScalarCellField,
    u0: Optional[Function | spaces.CRVectorField],
    mesh: meshes.Mesh,
    degree: int = spaces.ANALYTIC_DEGREE) -> State:
    """Returns ϱ⁰ = cell averages of ϱ₀ and u⁰ = face means of u₀.

    Args:
        rho0 (Function | float | spaces.ScalarCellField): positive initial
            density.
        u0 (Optional[Function | spaces.CRVectorField]): boundary-vanishing
            initial velocity. None means zero.
        mesh (meshes.Mesh): mesh of the discrete state.
        degree (int): exactness of the quadrature for callables.

    Raises:
        NonPositiveInitialDensity: if ϱ₀ is not positive at a quadrature
            point or on a cell.

    """
    if isinstance(rho0, (int, float)):
        rho = spaces.ScalarCellField.constant(mesh, rho0)
    elif callable(rho0) and not isinstance(rho0, spaces.ScalarCellField):
        rule = spaces.triangle_rule(degree)
        samples = spaces.sample(rho0, mesh, rule)
        if np.any(samples <= 0):
            raise errors.NonPositiveInitialDensity(
                f'initial density reaches {samples.min():.3e}')
        rho = spaces.cell_average(rho0, mesh, degree = degree)
    else:
        rho = rho0
    if np.any(rho.values <= 0):
        raise errors.NonPositiveInitialDensity(
            f'initial density is not positive on cell '
            f'{int(np.argmin(rho.values))}')
    if u0 is None:
        u = spaces.CRVectorField.zeros(mesh)
    else:
        u = spaces.cr_interpolate(u0, mesh)
    return State(time_index = 0, rho = rho, u = u, time = 0.0)

def normal_fluxes(u: spaces.CRVectorField) -> NDArray:
    """Returns |σ| u_σ·n_σ on internal faces, n_σ pointing out of the owner."""
    mesh = u.mesh
    faces = mesh.internal_faces
    return mesh.face_measures[faces] * np.einsum(
        'fk,fk->f', u.dofs, mesh.normals[faces])

def upwind_cells(u: spaces.CRVectorField) -> NDArray:
    """Returns the upwind cell of every internal face."""
    mesh = u.mesh
    faces = mesh.internal_faces
    return np.where(
        normal_fluxes(u) > 0, mesh.owners[faces], mesh.neighbors[faces])

@functools.lru_cache(maxsize = 8)
def mean_operator(mesh: meshes.Mesh) -> sparse.csr_matrix:
    """Returns the (n_cells, n_dofs) map from face unknowns to cell means."""
    cells = np.repeat(np.arange(mesh.n_cells), 3)
    dofs = mesh.dofs[mesh.cell_faces].ravel()
    keep = dofs >= 0
    return sparse.csr_matrix(
        (np.full(int(keep.sum()), 1.0 / 3.0), (cells[keep], dofs[keep])),
        shape = (mesh.n_cells, mesh.n_dofs))

@functools.lru_cache(maxsize = 16)
def viscous_matrix(
    mesh: meshes.Mesh,
    mu: float,
    bulk: float) -> sparse.csr_matrix:
    """Returns the matrix of μ(∇u, ∇v) + (μ + λ)(div u, div v).

    Rows and columns follow the interleaved unknown order.

    """
    count = mesh.n_cells
    slopes = (
        mesh.cell_face_measures[..., None]
        * mesh.cell_normals
        / mesh.cell_measures[:, None, None])
    areas = mesh.cell_measures[:, None, None, None, None]
    shear = (
        np.einsum('cid,cjd->cij', slopes, slopes)[:, :, None, :, None]
        * np.eye(2)[None, None, :, None, :])
    divergence = np.einsum('cia,cjb->ciajb', slopes, slopes)
    local = (areas * (mu * shear + bulk * divergence)).reshape(count, 6, 6)
    dofs = mesh.dofs[mesh.cell_faces]
    index = (2 * dofs[:, :, None] + np.arange(2)[None, None, :]).reshape(
        count, 6)
    valid = np.repeat(dofs >= 0, 2, axis = 1)
    mask = valid[:, :, None] & valid[:, None, :]
    rows = np.broadcast_to(index[:, :, None], (count, 6, 6))
    columns = np.broadcast_to(index[:, None, :], (count, 6, 6))
    size = 2 * mesh.n_dofs
    return sparse.coo_matrix(
        (local[mask], (rows[mask], columns[mask])),
        shape = (size, size)).tocsr()

def _continuity_matrix(
    mesh: meshes.Mesh,
    u: spaces.CRVectorField,
    dt: float) -> sparse.csr_matrix:
    faces = mesh.internal_faces
    owners = mesh.owners[faces]
    neighbors = mesh.neighbors[faces]
    fluxes = normal_fluxes(u)
    upwind = np.where(fluxes > 0, owners, neighbors)
    diagonal = np.arange(mesh.n_cells)
    rows = np.concatenate([diagonal, owners, neighbors])
    columns = np.concatenate([diagonal, upwind, upwind])
    data = np.concatenate([mesh.cell_measures / dt, fluxes, -fluxes])
    return sparse.csr_matrix(
        (data, (rows, columns)), shape = (mesh.n_cells, mesh.n_cells))

def _continuity_rhs(
    rho_prev: spaces.ScalarCellField,
    dt: float,
    source: Optional[NDArray]) -> NDArray:
    measures = rho_prev.mesh.cell_measures
    rhs = measures * rho_prev.values / dt
    if source is not None:
        rhs = rhs + measures * source
    return rhs

def _continuity_residual(
    rho_prev: spaces.ScalarCellField,
    rho: spaces.ScalarCellField,
    u: spaces.CRVectorField,
    dt: float,
    source: Optional[NDArray]) -> float:
    matrix = _continuity_matrix(rho.mesh, u, dt)
    return _relative_residual(
        matrix @ rho.values, _continuity_rhs(rho_prev, dt, source))

def _momentum_system(
    state_prev: State,
    rho: spaces.ScalarCellField,
    advecting: spaces.CRVectorField,
    dt: float,
    config: SchemeConfig,
    load: Optional[NDArray]) -> tuple[sparse.csr_matrix, NDArray]:
    """Returns the momentum matrix and right side, linear in the velocity."""
    mesh = rho.mesh
    faces = mesh.internal_faces
    owners = mesh.owners[faces]
    neighbors = mesh.neighbors[faces]
    fluxes = normal_fluxes(advecting)
    upwind = np.where(fluxes > 0, owners, neighbors)
    mass_fluxes = fluxes * rho.values[upwind]
    convection = sparse.csr_matrix(
        (np.concatenate([mass_fluxes, -mass_fluxes]),
         (np.concatenate([owners, neighbors]),
          np.concatenate([upwind, upwind]))),
        shape = (mesh.n_cells, mesh.n_cells))
    inertia = sparse.diags(mesh.cell_measures * rho.values / dt)
    means = mean_operator(mesh)
    scalar = means.T @ (inertia + convection) @ means
    matrix = sparse.kron(scalar, sparse.identity(2), format = 'csr')
    matrix = matrix + viscous_matrix(
        mesh, config.viscosity.mu, config.viscosity.bulk)
    previous = (
        (mesh.cell_measures * state_prev.rho.values / dt)[:, None]
        * state_prev.u.cell_means)
    rhs = np.asarray(means.T @ previous)
    pressure = config.law.pressure(rho.values)
    jumps = mesh.face_measures[faces] * (pressure[owners] - pressure[neighbors])
    rhs = rhs + jumps[:, None] * mesh.normals[faces]
    if load is not None:
        rhs = rhs + load
    return matrix.tocsr(), rhs.reshape(-1)

def _relative_residual(action: NDArray, rhs: NDArray) -> float:
    residual = np.abs(action - rhs).max(initial = 0.0)
    scale = max(
        np.abs(rhs).max(initial = 0.0), np.abs(action).max(initial = 0.0))
    return float(residual / scale) if scale > 0 else float(residual)

def _solve(
    matrix: sparse.spmatrix,
    rhs: NDArray,
    solver: str,
    linear_tol: float) -> NDArray:
    """Solves a sparse system, falling back to a direct solve if needed."""
    if rhs.size == 0:
        return np.zeros(0)
    if solver == 'iterative':
        values, info = linalg.bicgstab(
            matrix, rhs, rtol = linear_tol, atol = 0.0, maxiter = 10 * rhs.size)
        if info == 0 and np.all(np.isfinite(values)):
            return values
        _LOGGER.warning(
            'iterative solve stopped with code %d, using a direct solve', info)
    try:
        values = linalg.spsolve(matrix.tocsc(), rhs)
    except RuntimeError as error:
        raise errors.LinearSolveFailure(f'sparse solve failed: {error}') from error
    values = np.atleast_1d(np.asarray(values, dtype = float))
    if not np.all(np.isfinite(values)):
        raise errors.LinearSolveFailure('sparse solve returned non-finite values')
    return values

def _fit_step(config: SchemeConfig) -> SchemeConfig:
    """Returns 'config' with dt adjusted so that N dt = T_final."""
    steps = config.n_steps
    if steps == 0:
        return config
    dt = config.T_final / steps
    if not math.isclose(dt, config.dt, rel_tol = 1e-12):
        _LOGGER.info(
            'dt adjusted from %.6e to %.6e for %d steps', config.dt, dt, steps)
        return config.with_dt(dt)
    return config
