"""
resources: registered base classes for relentless experiments
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
    Manager (framework.Resource): controller of one experiment mode.
    Solution (framework.Resource): analytic density and velocity pair used as
        initial data or as a manufactured strong solution.
    Probe (framework.Resource): numerical check of one discrete functional
        inequality over a refinement sequence.

To Do:


"""
from __future__ import annotations
import abc
from collections.abc import Sequence
import contextlib
import dataclasses
import logging
import pathlib
from typing import Any, ClassVar, Optional, TYPE_CHECKING

import camina
import miller
import numpy as np
from numpy.typing import NDArray

from . import errors
from . import framework
from . import mesh as meshes
from . import scheme
from . import spaces
from . import thermo

if TYPE_CHECKING:
    from ..options import laboratory


_LOGGER = logging.getLogger(__name__)


@dataclasses.dataclass
class Manager(framework.Resource, abc.ABC):
    """Controller for relentless projects.

    Args:
        project (framework.Project): linked Project instance to modify and
            control.
        results (dict[str, Any]): summary values gathered while running.
        artifacts (list[pathlib.Path]): files written while running.
        exit_code (int): 0 on success, 3 after a solver failure and 4 after
            an invariant-gate failure.

    """
    project: Optional[framework.Project] = dataclasses.field(
        default = None, repr = False, compare = False)
    results: dict[str, Any] = dataclasses.field(default_factory = dict)
    artifacts: list[pathlib.Path] = dataclasses.field(default_factory = list)
    exit_code: int = 0

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        # Calls parent and/or mixin initialization method(s).
        with contextlib.suppress(AttributeError):
            super().__post_init__()
        # Validates core attributes.
        self.validate()
        if self.project.automatic:
            self.complete()

    """ Required Subclass Methods """

    @abc.abstractmethod
    def complete(self) -> None:
        """Runs the experiment of 'project'."""
        return

    """ Public Methods """

    @classmethod
    def create(
        cls,
        project: framework.Project,
        name: Optional[str] = None,
        **kwargs: Any) -> Manager:
        """Returns a subclass instance based on passed arguments.

        Args:
            project (framework.Project): related Project instance.
            name (Optional[str]): name or key to lookup the subclass.

        Returns:
            Manager: subclass instance based on passed arguments.

        """
        return cls(project = project, **kwargs)

    def validate(self) -> None:
        """Validates or creates required portions of 'project'."""
        self._validate_name()
        self._validate_id()
        return

    def enforce(self, failed: Sequence[str]) -> None:
        """Sets 'exit_code' to 4 and raises if 'failed' names any gate.

        A solver failure already recorded in 'exit_code' takes precedence
        and nothing is raised.

        Raises:
            InvariantGateFailure: naming every failed gate.

        """
        if failed and self.exit_code == 0:
            self.exit_code = 4
            raise errors.InvariantGateFailure(
                f'{self.project.name}: gates failed: {", ".join(failed)}')
        return

    def build_law(self) -> thermo.PressureLaw:
        """Returns the configured pressure law."""
        config = self.config
        law = framework.Resources.pressure_law[config.form]
        try:
            return law.create(
                gamma = config.gamma,
                coefficient = config.coefficient,
                densities = config.densities,
                pressures = config.pressures)
        except ValueError as error:
            raise errors.ConfigurationError(
                f'physics settings give no valid {config.form} law: {error}'
            ) from error

    def build_viscosity(self) -> thermo.ViscosityParams:
        """Returns the configured viscosity coefficients."""
        return thermo.ViscosityParams(
            mu = self.config.mu,
            lambda_ = self.config.lambda_)

    def build_mesh(self, level: int = 0) -> meshes.Mesh:
        """Returns the configured mesh after 'level' extra refinements."""
        config = self.config
        if config.mesh_path is None:
            mesh = meshes.structured_triangulation(
                nx = config.nx,
                ny = config.ny,
                rect = config.bounds)
        else:
            mesh = meshes.read_mesh(config.mesh_path)
        for _ in range(config.refinements + level):
            mesh = meshes.refine_uniform(mesh)
        return mesh

    def build_scheme(self, dt: Optional[float] = None) -> scheme.SchemeConfig:
        """Returns the configured scheme settings, with 'dt' if given."""
        config = self.config
        return scheme.SchemeConfig(
            dt = config.dt if dt is None else dt,
            T_final = config.final_time,
            law = self.build_law(),
            viscosity = self.build_viscosity(),
            picard_tol = config.picard_tol,
            picard_max_iters = config.picard_max_iters,
            linear_tol = config.linear_tol,
            dt_backoff_factor = config.dt_backoff_factor,
            theta_min = config.theta_min,
            max_backoffs = config.max_backoffs,
            solver = config.solver)

    def build_solution(self, key: Optional[str]) -> Solution:
        """Returns the registered Solution named 'key'.

        Raises:
            ConfigurationError: if no Solution is registered as 'key'.

        """
        try:
            solution = framework.Resources.solution[key]
        except KeyError as error:
            raise errors.ConfigurationError(
                f'{key} is not a known initial condition or solution'
            ) from error
        return solution.create()

    """ Private Methods """

    def _validate_id(self) -> None:
        """Creates unique 'project.identification' if one doesn't exist.

        By default, 'identification' is set to the 'name' attribute followed by
        an underscore and the date and time.

        """
        if self.project.identification is None:
            prefix = self.project.name + '_'
            self.project.identification = miller.how_soon_is_now(
                prefix = prefix)
        elif not isinstance(self.project.identification, str):
            raise TypeError('identification must be a str or None type')
        return

    def _validate_name(self) -> None:
        """Creates or validates 'project.name'."""
        if self.project.name is None:
            idea_name = self.config.name or self._infer_project_name()
            if idea_name is None:
                self.project.name = camina.namify(self.project) or 'relentless'
            else:
                self.project.name = idea_name
        if self.project.name.endswith('_project'):
            self.project.name = self.project.name[:-8]
        return

    def _infer_project_name(self) -> Optional[str]:
        """Infers project name from a '<name>_project' section of the idea.

        Returns:
            Optional[str]: name of project based on project settings. Returns
                None if a name can not be inferred.

        """
        name = None
        for key in self.project.idea.keys():
            if str(key).endswith('_project'):
                name = str(key).removesuffix('_project')
                break
        return name

    """ Properties """

    @property
    def config(self) -> framework.ExperimentConfig:
        """Returns the validated settings of 'project'."""
        return self.project.config

    @property
    def folder(self) -> pathlib.Path:
        """Returns the output folder, creating it on first use."""
        if self.config.output is None:
            folder = pathlib.Path('output').joinpath(
                self.project.identification)
        else:
            folder = pathlib.Path(self.config.output)
        folder.mkdir(parents = True, exist_ok = True)
        return folder


@dataclasses.dataclass
class Solution(framework.Resource, abc.ABC):
    """Analytic density r(t, x) and velocity U(t, x).

    Points are arrays shaped (..., 2). Densities return (...) arrays and
    velocities (..., 2). Manufactured solutions also supply the derivatives
    that turn them into exact solutions of a forced system; other subclasses
    are initial data only.

    Attributes:
        manufactured (ClassVar[bool]): whether the derivative methods are
            implemented.

    """
    manufactured: ClassVar[bool] = False

    """ Required Subclass Methods """

    @abc.abstractmethod
    def density(self, t: float, x: NDArray) -> NDArray:
        """Returns r(t, x)."""

    @abc.abstractmethod
    def velocity(self, t: float, x: NDArray) -> NDArray:
        """Returns U(t, x)."""

    """ Optional Subclass Methods """

    def density_time(self, t: float, x: NDArray) -> NDArray:
        """Returns ∂t r."""
        raise NotImplementedError(f'{self.key} has no derivatives')

    def density_gradient(self, t: float, x: NDArray) -> NDArray:
        """Returns ∇r shaped (..., 2)."""
        raise NotImplementedError(f'{self.key} has no derivatives')

    def velocity_time(self, t: float, x: NDArray) -> NDArray:
        """Returns ∂t U shaped (..., 2)."""
        raise NotImplementedError(f'{self.key} has no derivatives')

    def velocity_gradient(self, t: float, x: NDArray) -> NDArray:
        """Returns ∇U shaped (..., 2, 2), entry [a, b] being ∂U_a/∂x_b."""
        raise NotImplementedError(f'{self.key} has no derivatives')

    def velocity_laplacian(self, t: float, x: NDArray) -> NDArray:
        """Returns ΔU shaped (..., 2)."""
        raise NotImplementedError(f'{self.key} has no derivatives')

    def velocity_grad_div(self, t: float, x: NDArray) -> NDArray:
        """Returns ∇div U shaped (..., 2)."""
        raise NotImplementedError(f'{self.key} has no derivatives')

    """ Public Methods """

    @classmethod
    def create(cls, **kwargs: Any) -> Solution:
        """Returns an instance built from the matching keyword arguments."""
        names = {item.name for item in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in kwargs.items() if k in names})

    def density_at(self, t: float) -> scheme.Function:
        """Returns x ↦ r(t, x)."""
        return lambda x: self.density(t, x)

    def velocity_at(self, t: float) -> scheme.Function:
        """Returns x ↦ U(t, x)."""
        return lambda x: self.velocity(t, x)

    def project(
        self,
        mesh: meshes.Mesh,
        t: float = 0.0,
        degree: int = spaces.ANALYTIC_DEGREE) -> scheme.State:
        """Returns the discrete state projected from (r(t), U(t))."""
        state = scheme.project_initial_data(
            rho0 = self.density_at(t),
            u0 = self.velocity_at(t),
            mesh = mesh,
            degree = degree)
        return dataclasses.replace(state, time = t)

    def mass_source(self, t: float, x: NDArray) -> NDArray:
        """Returns f_ϱ = ∂t r + U·∇r + r div U."""
        velocity = self.velocity(t, x)
        divergence = np.trace(self.velocity_gradient(t, x), axis1 = -2, axis2 = -1)
        return (
            self.density_time(t, x)
            + np.sum(velocity * self.density_gradient(t, x), axis = -1)
            + self.density(t, x) * divergence)

    def momentum_source(
        self,
        t: float,
        x: NDArray,
        law: thermo.PressureLaw,
        viscosity: thermo.ViscosityParams) -> NDArray:
        """Returns f_m, the momentum defect of (r, U).

        f_m = r(∂tU + (∇U)U) + U f_ϱ − μΔU − (μ+λ)∇div U + p′(r)∇r.

        """
        density = self.density(t, x)
        velocity = self.velocity(t, x)
        gradient = self.velocity_gradient(t, x)
        convection = np.einsum('...ab,...b->...a', gradient, velocity)
        return (
            density[..., None] * (self.velocity_time(t, x) + convection)
            + velocity * self.mass_source(t, x)[..., None]
            - viscosity.mu * self.velocity_laplacian(t, x)
            - viscosity.bulk * self.velocity_grad_div(t, x)
            + law.derivative(density)[..., None] * self.density_gradient(t, x))

    def sources(
        self,
        law: thermo.PressureLaw,
        viscosity: thermo.ViscosityParams,
        degree: int = spaces.ANALYTIC_DEGREE) -> scheme.SourceTerms:
        """Returns the forcing that makes (r, U) an exact solution.

        Raises:
            NotImplementedError: if the subclass is not manufactured.

        """
        if not self.manufactured:
            raise NotImplementedError(f'{self.key} has no derivatives')
        return scheme.SourceTerms(
            mass = self.mass_source,
            momentum = lambda t, x: self.momentum_source(
                t, x, law, viscosity),
            degree = degree)

    """ Properties """

    @property
    def key(self) -> str:
        """Returns the snakecase registry name of the subclass."""
        return camina.namify(self.__class__)


@dataclasses.dataclass
class Probe(framework.Resource, abc.ABC):
    """Numerical check that the constant of a discrete inequality is uniform.

    Args:
        levels (int): number of refinement levels. Defaults to 4.
        samples (int): random fields per level. Defaults to 50.
        seed (int): seed of the random generator. Defaults to 0.
        needle (bool): whether to run on degenerate needle meshes. Defaults
            to False.
        coarse (int): cells per side of the coarsest structured mesh.
            Defaults to 4.
        smooth (bool): whether random fields are smooth modes plus small
            noise rather than standard-normal unknowns. Defaults to False.

    """
    levels: int = 4
    samples: int = 50
    seed: int = 0
    needle: bool = False
    coarse: int = 4
    smooth: bool = False

    """ Required Subclass Methods """

    @abc.abstractmethod
    def run(self) -> laboratory.ProbeReport:
        """Returns the per-level constants and their trend."""

    """ Public Methods """

    @classmethod
    def create(cls, **kwargs: Any) -> Probe:
        """Returns an instance built from the matching keyword arguments."""
        names = {item.name for item in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in kwargs.items() if k in names})

    def generator(self) -> np.random.Generator:
        """Returns a fresh generator seeded with 'seed'."""
        return np.random.default_rng(self.seed)

    def meshes(self) -> list[meshes.Mesh]:
        """Returns the refinement sequence the probe runs on."""
        if self.needle:
            base = needle_triangulation(self.coarse)
        else:
            base = meshes.structured_triangulation(self.coarse, self.coarse)
        sequence = [base]
        for _ in range(self.levels - 1):
            sequence.append(meshes.refine_uniform(sequence[-1]))
        return sequence

    """ Properties """

    @property
    def key(self) -> str:
        """Returns the snakecase registry name of the subclass."""
        return camina.namify(self.__class__)


def needle_triangulation(n: int, stretch: float = 100.0) -> meshes.Mesh:
    """Returns a structured mesh of [0, 1] × [0, 1/stretch].

    Its cells are needles with a regularity θ close to 1/stretch.

    """
    return meshes.structured_triangulation(
        n, n, rect = (0.0, 0.0, 1.0, 1.0 / stretch))
