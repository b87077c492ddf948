"""
framework: settings, registries and the project interface
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
    Defaults
    Idea
    ExperimentConfig
    Resources
    Resource
    Project

To Do:


"""
from __future__ import annotations
import abc
from collections.abc import Hashable, Mapping, MutableMapping
import contextlib
import dataclasses
import inspect
import pathlib
from typing import Any, ClassVar, Optional, Type
import warnings

import ashford
import bobbie
import camina

from . import errors


@dataclasses.dataclass
class Defaults(abc.ABC):
    """Default values for building a relentless project.

    Every attribute in Defaults should be a class attribute so that it is
    accessible without instancing it (which it cannot be).

    Args:
        settings (ClassVar[dict[Hashable, dict[Hashable, Any]]]): default
            settings for a relentless project's idea.
        manager (ClassVar[str]): key name of the default manager. Defaults to
            'run'.
        modes (ClassVar[tuple[str, ...]]): experiment modes, each the key
            name of a Manager.
        gates (ClassVar[dict[str, float]]): invariant gate tolerances checked
            by the managers.
        null_nodes (ClassVar[list[Any]]): values that mean a selector is
            unset. Defaults to ['none', 'None', None].

    """
    settings: ClassVar[dict[Hashable, dict[Hashable, Any]]] = {
        'general': {
            'mode': 'run',
            'name': None,
            'seed': 20231,
            'verbose': False,
            'theta_min': 0.1,
            'output': None},
        'mesh': {
            'nx': 8,
            'ny': 8,
            'bounds': [0.0, 0.0, 1.0, 1.0],
            'refinements': 0,
            'path': None},
        'physics': {
            'form': 'isentropic',
            'gamma': 2.0,
            'coefficient': 1.0,
            'mu': 1.0,
            'lambda': 0.0,
            'densities': None,
            'pressures': None},
        'time': {
            'dt': 0.01,
            'final_time': 0.05,
            'picard_tol': 1e-10,
            'picard_max_iters': 100,
            'linear_tol': 1e-12,
            'dt_backoff_factor': 0.5,
            'max_backoffs': 8,
            'solver': 'direct'},
        'data': {
            'initial': 'gaussian_bump',
            'solution': None,
            'quadrature_degree': 6},
        'convergence': {
            'levels': 3,
            'dt_factor': 0.25},
        'laboratory': {
            'levels': 4,
            'samples': 50,
            'exponent': 2.0,
            'sobolev_exponent': 4.0,
            'needle': False}}
    manager: ClassVar[str] = 'run'
    modes: ClassVar[tuple[str, ...]] = (
        'run', 'convergence', 'verify_inequalities')
    gates: ClassVar[dict[str, float]] = {
        'identity': 10.0,
        'slack': 1e-8,
        'mass': 1e-12,
        'band': 0.15,
        'order_margin': 0.25}
    null_nodes: ClassVar[list[Any]] = ['none', 'None', None]


@dataclasses.dataclass
class Idea(bobbie.Settings):
    """Loads and stores experiment settings.

    To create an Idea instance, a user can pass as the 'contents' parameter a:
        1) pathlib file path of a compatible file type;
        2) string containing a a file path to a compatible file type;
                                or,
        3) 2-level nested dict.

    If 'infer_types' is set to True (the default option), str dict values are
    automatically converted to appropriate datatypes (str, list, float, bool,
    and int are currently supported). Because Idea uses ConfigParser for .ini
    files, it stores a 2-level dict: sections and their keys, as listed in
    'Defaults.settings'.

    Args:
        contents (MutableMapping[Hashable, Any]): a dict for storing
            configuration options. Defaults to en empty dict.
        default_factory (Optional[Any]): default value to return when the 'get'
            method is used. Defaults to an empty camina.Dictionary.
        defaults (Optional[Mapping[str, Mapping[str]]]): any default options
            that should be used when a user does not provide the corresponding
            options in their configuration settings. Defaults to an empty dict.
        infer_types (Optional[bool]): whether values in 'contents' are converted
            to other datatypes (True) or left alone (False). Defaults to True.
        parsers (Optional[MutableMapping[Hashable, extensions.Parser]]): keys
            are str names of Parser instances and the values are Parser
            instances. Defaults to None.

    """
    contents: MutableMapping[Hashable, Any] = dataclasses.field(
        default_factory = dict)
    default_factory: Optional[Any] = camina.Dictionary
    defaults: Optional[Mapping[Hashable, Any]] = dataclasses.field(
        default_factory = dict)
    infer_types: Optional[bool] = True
    parsers: Optional[bobbie.Parsers] = None


@dataclasses.dataclass
class ExperimentConfig(object):
    """Validated settings of one experiment.

    Values are read section by section from an Idea (or any 2-level mapping)
    and fall back to 'Defaults.settings'.

    Args:
        mode (str): 'run', 'convergence' or 'verify_inequalities'.
        name (Optional[str]): experiment name.
        seed (int): seed of every random generator.
        verbose (bool): whether to log at DEBUG level.
        theta_min (float): smallest admitted mesh regularity.
        output (Optional[str]): output folder.
        nx (int): cells per row of the structured mesh.
        ny (int): cells per column of the structured mesh.
        bounds (tuple[float, float, float, float]): x0, y0, x1, y1.
        refinements (int): uniform refinements applied to the base mesh.
        mesh_path (Optional[str]): ASCII mesh file replacing the structured
            mesh.
        form (str): 'isentropic' or 'tabulated'.
        gamma (float): adiabatic exponent.
        coefficient (float): pressure coefficient a in p = aϱ^γ.
        mu (float): shear viscosity.
        lambda_ (float): second viscosity.
        densities (Optional[tuple[float, ...]]): table abscissae of a
            tabulated law.
        pressures (Optional[tuple[float, ...]]): table values of a tabulated
            law.
        dt (float): time step.
        final_time (float): final time T.
        picard_tol (float): nonlinear tolerance.
        picard_max_iters (int): nonlinear iteration cap.
        linear_tol (float): iterative solver tolerance.
        dt_backoff_factor (float): factor applied to dt after a failure.
        max_backoffs (int): number of admitted backoffs.
        solver (str): 'direct' or 'iterative'.
        initial (Optional[str]): initial-data selector.
        solution (Optional[str]): manufactured-solution selector.
        quadrature_degree (int): exactness of the analytic quadrature.
        convergence_levels (int): refinement levels of a convergence study.
        dt_factor (float): dt multiplier per level, 1/4 for Δt ∝ h².
        laboratory_levels (int): refinement levels of the probes.
        samples (int): random samples per probe level.
        exponent (float): Lebesgue exponent of the norm probes.
        sobolev_exponent (float): target exponent q of the Sobolev probe.
        needle (bool): whether probes run on a degenerate needle mesh.

    """
    mode: str = 'run'
    name: Optional[str] = None
    seed: int = 20231
    verbose: bool = False
    theta_min: float = 0.1
    output: Optional[str] = None
    nx: int = 8
    ny: int = 8
    bounds: tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    refinements: int = 0
    mesh_path: Optional[str] = None
    form: str = 'isentropic'
    gamma: float = 2.0
    coefficient: float = 1.0
    mu: float = 1.0
    lambda_: float = 0.0
    densities: Optional[tuple[float, ...]] = None
    pressures: Optional[tuple[float, ...]] = None
    dt: float = 0.01
    final_time: float = 0.05
    picard_tol: float = 1e-10
    picard_max_iters: int = 100
    linear_tol: float = 1e-12
    dt_backoff_factor: float = 0.5
    max_backoffs: int = 8
    solver: str = 'direct'
    initial: Optional[str] = 'gaussian_bump'
    solution: Optional[str] = None
    quadrature_degree: int = 6
    convergence_levels: int = 3
    dt_factor: float = 0.25
    laboratory_levels: int = 4
    samples: int = 50
    exponent: float = 2.0
    sobolev_exponent: float = 4.0
    needle: bool = False
    optional: ClassVar[tuple[str, ...]] = (
        'name', 'output', 'mesh_path', 'initial', 'solution', 'densities',
        'pressures')
    sources:ClassVar[dict[str, tuple[str, str, Type[Any]]]] = {
        'mode': ('general', 'mode', str),
        'name': ('general', 'name', str),
        'seed': ('general', 'seed', int),
        'verbose': ('general', 'verbose', bool),
        'theta_min': ('general', 'theta_min', float),
        'output': ('general', 'output', str),
        'nx': ('mesh', 'nx', int),
        'ny': ('mesh', 'ny', int),
        'bounds': ('mesh', 'bounds', tuple),
        'refinements': ('mesh', 'refinements', int),
        'mesh_path': ('mesh', 'path', str),
        'form': ('physics', 'form', str),
        'gamma': ('physics', 'gamma', float),
        'coefficient': ('physics', 'coefficient', float),
        'mu': ('physics', 'mu', float),
        'lambda_': ('physics', 'lambda', float),
        'densities': ('physics', 'densities', tuple),
        'pressures': ('physics', 'pressures', tuple),
        'dt': ('time', 'dt', float),
        'final_time': ('time', 'final_time', float),
        'picard_tol': ('time', 'picard_tol', float),
        'picard_max_iters': ('time', 'picard_max_iters', int),
        'linear_tol': ('time', 'linear_tol', float),
        'dt_backoff_factor': ('time', 'dt_backoff_factor', float),
        'max_backoffs': ('time', 'max_backoffs', int),
        'solver': ('time', 'solver', str),
        'initial': ('data', 'initial', str),
        'solution': ('data', 'solution', str),
        'quadrature_degree': ('data', 'quadrature_degree', int),
        'convergence_levels': ('convergence', 'levels', int),
        'dt_factor': ('convergence', 'dt_factor', float),
        'laboratory_levels': ('laboratory', 'levels', int),
        'samples': ('laboratory', 'samples', int),
        'exponent': ('laboratory', 'exponent', float),
        'sobolev_exponent': ('laboratory', 'sobolev_exponent', float),
        'needle': ('laboratory', 'needle', bool)}

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        self.mode = str(self.mode).replace('-', '_')
        self.validate()

    """ Public Methods """

    @classmethod
    def create(
        cls,
        idea: Optional[Idea | Mapping[Hashable, Any]] = None,
        **overrides: Any) -> ExperimentConfig:
        """Returns an instance from 'idea' with 'overrides' applied.

        Overrides whose value is None are ignored. The 'levels' override sets
        both level counts.

        Args:
            idea (Optional[Idea | Mapping[Hashable, Any]]): settings sections.
                Defaults to None, which uses 'Defaults.settings' alone.

        Raises:
            ConfigurationError: if a value cannot be read or is invalid.

        """
        idea = {} if idea is None else idea
        kwargs = {}
        for attribute, (section, key, kind) in cls.sources.items():
            value = _lookup(idea, section, key)
            try:
                kwargs[attribute] = _coerce(value, kind)
            except (TypeError, ValueError) as error:
                raise errors.ConfigurationError(
                    f'{section}.{key} cannot be read from {value!r}: '
                    f'{error}') from error
            if kwargs[attribute] is None and attribute not in cls.optional:
                raise errors.ConfigurationError(f'{section}.{key} is required')
        levels = overrides.pop('levels', None)
        if levels is not None:
            kwargs['convergence_levels'] = int(levels)
            kwargs['laboratory_levels'] = int(levels)
        kwargs.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**kwargs)

    def validate(self) -> None:
        """Checks values and mode-required keys.

        Raises:
            ConfigurationError: naming the first offending setting.

        """
        checks = [
            (self.mode in Defaults.modes, f'mode must be one of '
                f'{Defaults.modes}, not {self.mode}'),
            (self.dt > 0, f'time.dt must be positive, not {self.dt}'),
            (self.final_time >= 0, f'time.final_time must be nonnegative, '
                f'not {self.final_time}'),
            (self.picard_tol > 0, 'time.picard_tol must be positive'),
            (self.linear_tol > 0, 'time.linear_tol must be positive'),
            (self.picard_max_iters >= 1,
                'time.picard_max_iters must be at least 1'),
            (0 < self.dt_backoff_factor < 1,
                'time.dt_backoff_factor must be in (0, 1)'),
            (self.max_backoffs >= 0, 'time.max_backoffs must be nonnegative'),
            (self.solver in ('direct', 'iterative'),
                f'time.solver must be direct or iterative, not {self.solver}'),
            (self.theta_min >= 0, 'general.theta_min must be nonnegative'),
            (self.nx >= 1 and self.ny >= 1, 'mesh.nx and mesh.ny must be '
                'at least 1'),
            (self.refinements >= 0, 'mesh.refinements must be nonnegative'),
            (len(self.bounds) == 4 and self.bounds[2] > self.bounds[0]
                and self.bounds[3] > self.bounds[1],
                f'mesh.bounds must be x0, y0, x1, y1, not {self.bounds}'),
            (self.form in ('isentropic', 'tabulated'),
                f'physics.form must be isentropic or tabulated, not '
                f'{self.form}'),
            (self.gamma >= 1, f'physics.gamma must be at least 1, not '
                f'{self.gamma}'),
            (self.coefficient > 0, 'physics.coefficient must be positive'),
            (self.mu > 0, f'physics.mu must be positive, not {self.mu}'),
            (self.lambda_ + self.mu >= 0,
                'physics.lambda + physics.mu must be nonnegative'),
            (self.quadrature_degree >= 1,
                'data.quadrature_degree must be at least 1'),
            (0 < self.dt_factor <= 1, 'convergence.dt_factor must be in '
                '(0, 1]'),
            (self.samples >= 1, 'laboratory.samples must be at least 1'),
            (self.exponent >= 1, 'laboratory.exponent must be at least 1'),
            (self.sobolev_exponent >= 1,
                'laboratory.sobolev_exponent must be at least 1')]
        if self.form == 'tabulated':
            checks.append((
                self.densities is not None and self.pressures is not None
                and len(self.densities) == len(self.pressures) >= 2,
                'a tabulated law needs physics.densities and '
                'physics.pressures of equal length'))
        if self.mode == 'run':
            checks.append((
                self.initial not in Defaults.null_nodes
                or self.solution not in Defaults.null_nodes,
                'run mode needs data.initial or data.solution'))
        elif self.mode == 'convergence':
            checks.extend([
                (self.solution not in Defaults.null_nodes,
                    'convergence mode needs data.solution'),
                (self.convergence_levels >= 3,
                    f'convergence mode needs at least 3 levels, not '
                    f'{self.convergence_levels}')])
        else:
            checks.append((
                self.laboratory_levels >= 3,
                f'verify_inequalities mode needs at least 3 levels, not '
                f'{self.laboratory_levels}'))
        for passed, message in checks:
            if not passed:
                raise errors.ConfigurationError(message)
        return


@dataclasses.dataclass
class Resources(ashford.Keystones, abc.ABC):
    """Stores Resource subclasses.

    For each Resource, a class attribute is added with the snakecase name of
    that Resource. In that class attribute, a dict-like object (determined by
    'default_factory') is the value and it stores all Resource subclasses of
    that type (again using snakecase names as keys). Pressure laws, analytic
    solutions, probes and managers are looked up this way.

    Attributes:
        bases (ClassVar[camina.Dictionary]): dictionary of all direct Resource
            subclasses. Keys are snakecase names of the Resource subclass and
            values are the base Resource subclasses.
        defaults (ClassVar[camina.Dictionary]): dictionary of the default class
            for each of the Resource subclasses.
        default_factory (ClassVar[Type[MutableMapping]]): dict-like class used
            to store Resource subclasses. Defaults to camina.Dictionary.

    """
    bases: ClassVar[camina.Dictionary] = camina.Dictionary()
    defaults: ClassVar[camina.Dictionary] = camina.Dictionary()
    default_factory: ClassVar[Type[MutableMapping]] = camina.Dictionary


@dataclasses.dataclass
class Resource(ashford.Keystone, abc.ABC):
    """Mixin for registered base classes."""

    """ Initialization Methods """

    @classmethod
    def __init_subclass__(cls, *args: Any, **kwargs: Any):
        """Automatically registers subclass in Resources."""
        # Because Keystone will be used as a mixin, it is important to call
        # other base class '__init_subclass__' methods, if they exist.
        with contextlib.suppress(AttributeError):
            super().__init_subclass__(*args, **kwargs) # type: ignore
        if Resource in cls.__bases__:
            Resources.add(item = cls)
        else:
            Resources.register(item = cls)


@dataclasses.dataclass
class Project(object):
    """User interface for a relentless experiment.

    Args:
        name (Optional[str]): designates the name of a class instance that is
            used for internal referencing throughout relentless. Defaults to
            None.
        idea (Optional[Idea | Mapping | pathlib.Path | str]): settings for
            the project. Defaults to None.
        manager (Optional[Type[Resource] | Resource | str]): controller of
            the experiment. Defaults to None, which selects the manager named
            by the configured mode.
        identification (Optional[str]): a unique identification name for a
            project, used for its output folder. If it is None, a str is
            created from 'name' and the date and time. Defaults to None.
        automatic (bool): whether to run the experiment on creation. Defaults
            to True.
        overrides (dict[str, Any]): values that replace settings from 'idea',
            such as command-line flags.

    Attributes:
        defaults (ClassVar[Defaults]): a class storing the default project
            options. Defaults to Defaults.
        config (Optional[ExperimentConfig]): validated settings.

    """
    name: Optional[str] = None
    idea: Optional[Idea | Mapping[Hashable, Any] | pathlib.Path | str] = (
        dataclasses.field(default = None, repr = False))
    identification: Optional[str] = dataclasses.field(
        default = None, compare = False)
    automatic: Optional[bool] = dataclasses.field(
        default = True, compare = False)
    manager: Optional[Type[Resource] | Resource | str] = None
    overrides: dict[str, Any] = dataclasses.field(
        default_factory = dict, repr = False)
    config: Optional[ExperimentConfig] = dataclasses.field(
        default = None, repr = False)
    defaults: ClassVar[Type[Defaults]] = Defaults

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        # Removes various python warnings from console output.
        warnings.filterwarnings('ignore')
        # Calls parent and/or mixin initialization method(s).
        with contextlib.suppress(AttributeError):
            super().__post_init__()
        self._validate_idea()
        self._validate_config()
        self._validate_manager()

    """ Public Class Methods """

    @classmethod
    def create(
        cls,
        idea: pathlib.Path | str | Idea | Mapping[Hashable, Any],
        **kwargs) -> Project:
        """Returns a Project instance based on 'idea' and kwargs.

        Args:
            idea (pathlib.Path | str | Idea | Mapping[Hashable, Any]): a path
                to a file containing configuration settings, a python dict,
                or an Idea instance.

        Returns:
            Project: an instance based on 'idea' and kwargs.

        """
        return cls(idea = idea, **kwargs)

    """ Private Methods """

    def _validate_idea(self) -> None:
        """Creates or validates 'idea'."""
        if inspect.isclass(self.idea):
            self.idea = self.idea()
        elif self.idea is None:
            self.idea = {}
        elif not isinstance(self.idea, (Idea, Mapping)):
            self.idea = Idea.create(
                source = self.idea,
                defaults = self.defaults.settings)
        return

    def _validate_config(self) -> None:
        """Creates 'config' from 'idea' and 'overrides'."""
        if self.config is None:
            self.config = ExperimentConfig.create(
                idea = self.idea, **self.overrides)
        return

    def _validate_manager(self) -> None:
        """Creates or validates 'manager'."""
        if self.manager is None:
            self.manager = Resources.manager[self.config.mode]
        elif isinstance(self.manager, str):
            self.manager = Resources.manager[self.manager]
        if inspect.isclass(self.manager):
            self.manager = self.manager.create(project = self)
        else:
            self.manager.project = self
        return

    """ Dunder Methods """

    def __getattr__(self, item: str) -> Any:
        """Checks 'manager' for attribute named 'item'.

        Args:
            item (str): name of attribute to check.

        Returns:
            Any: contents of manager attribute named 'item'.

        """
        if item == 'manager':
            raise AttributeError(item)
        try:
            return getattr(self.manager, item)
        except AttributeError:
            raise AttributeError(
                f'{item} is not in the project or its manager')


def _lookup(
    idea: Idea | Mapping[Hashable, Any],
    section: str,
    key: str) -> Any:
    """Returns idea[section][key] or its default."""
    try:
        value = idea[section][key]
    except (KeyError, TypeError):
        value = Defaults.settings[section][key]
    return value

def _coerce(value: Any, kind: Type[Any]) -> Any:
    """Converts settings values, which may still be strings, to 'kind'."""
    if value in Defaults.null_nodes or value == '':
        return None
    if kind is bool:
        if isinstance(value, str):
            if value.lower() not in ('true', 'false', 'yes', 'no', '1', '0'):
                raise ValueError(f'{value} is not a bool')
            return value.lower() in ('true', 'yes', '1')
        return bool(value)
    if kind is int:
        number = float(value)
        if not number.is_integer():
            raise ValueError(f'{value} is not an integer')
        return int(number)
    if kind is tuple:
        if isinstance(value, str):
            value = value.strip('[]() ').split(',')
        return tuple(float(item) for item in value)
    if kind is float:
        return float(value)
    return str(value)
