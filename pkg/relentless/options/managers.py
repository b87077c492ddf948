"""
managers: controllers of the experiment modes
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
    Run (resources.Manager): marches the configured data, writes snapshots
        and ledgers, and checks the invariant gates.
    Convergence (resources.Manager): runs a manufactured solution on a
        refinement sequence and fits convergence orders.
    VerifyInequalities (resources.Manager): runs every inequality probe.
    mass_table: mass per step beside the mass the forcing accounts for.
    identity_tolerance, mass_tolerance: admitted gate residuals.
    error_constants: the per-level constant of the relative energy bound.

Each manager splits its work into 'draft' (build inputs), 'publish' (run)
and 'execute' (measure and write), which 'complete' calls in order.

To Do:


"""
from __future__ import annotations
import dataclasses
import logging
import math
from typing import Any, Optional

import numpy as np
import pandas as pd

from ..core import errors
from ..core import framework
from ..core import mesh as meshes
from ..core import resources
from ..core import scheme
from ..core import thermo
from . import diagnostics
from . import export
from . import laboratory


_LOGGER = logging.getLogger(__name__)
BOUNDS: tuple[str, ...] = (
    'velocity_bound', 'density_bound', 'momentum_bound', 'density_dissipation')


@dataclasses.dataclass
class Run(resources.Manager):
    """Marches one configured run and checks its invariants.

    The data selector 'data.solution' takes precedence over 'data.initial';
    a manufactured solution also supplies the forcing and the reference for
    the relative energy check.

    Args:
        project (framework.Project): linked Project instance.

    Attributes:
        mesh (Optional[meshes.Mesh]): mesh of the run.
        solution (Optional[resources.Solution]): analytic data.
        sources (Optional[scheme.SourceTerms]): forcing, if any.
        initial (Optional[scheme.State]): projected initial state.
        trajectory (Optional[scheme.Trajectory]): result of the run.

    """
    project: Optional[framework.Project] = dataclasses.field(
        default = None, repr = False, compare = False)
    mesh: Optional[meshes.Mesh] = dataclasses.field(
        default = None, repr = False)
    solution: Optional[resources.Solution] = None
    sources: Optional[scheme.SourceTerms] = dataclasses.field(
        default = None, repr = False)
    initial: Optional[scheme.State] = dataclasses.field(
        default = None, repr = False)
    trajectory: Optional[scheme.Trajectory] = dataclasses.field(
        default = None, repr = False)

    """ Public Methods """

    def complete(self) -> None:
        """Builds, runs and checks the experiment."""
        self.draft()
        self.publish()
        self.execute()
        return

    def draft(self) -> None:
        """Builds the mesh, the analytic data and the initial state."""
        config = self.config
        self.mesh = self.build_mesh()
        self.solution = self.build_solution(config.solution or config.initial)
        if config.solution is not None and self.solution.manufactured:
            self.sources = self.solution.sources(
                self.build_law(),
                self.build_viscosity(),
                degree = config.quadrature_degree)
        self.initial = self.solution.project(
            self.mesh, degree = config.quadrature_degree)
        _LOGGER.info(
            '%s: %s on %d cells, h = %.4f',
            self.project.name,
            self.solution.key,
            self.mesh.n_cells,
            self.mesh.h)
        return

    def publish(self) -> None:
        """Marches the initial state to the final time."""
        self.trajectory = scheme.run_simulation(
            self.initial,
            self.build_scheme(),
            sources = self.sources)
        _LOGGER.info(
            '%s: %d steps of dt = %.3e after %d backoffs',
            self.project.name,
            len(self.trajectory) - 1,
            self.trajectory.config.dt,
            self.trajectory.backoffs)
        return

    def execute(self) -> None:
        """Writes snapshots and ledgers and sets 'exit_code'."""
        trajectory = self.trajectory
        folder = self.folder
        for state in trajectory:
            self.artifacts.append(export.write_vtk(
                folder.joinpath(f'state_{state.time_index:04d}.vtk'),
                state.mesh,
                cell_data = {'density': state.rho},
                velocity = state.u,
                title = f'{self.project.name} t = {state.time:.6e}'))
        ledger = diagnostics.energy_ledger(trajectory)
        self.artifacts.append(export.write_csv(
            ledger.to_frame(), folder.joinpath('energy_ledger.csv')))
        history = mass_table(trajectory)
        self.artifacts.append(export.write_csv(
            history, folder.joinpath('mass_history.csv')))
        monitor = diagnostics.density_dissipation_monitor(trajectory)
        gates = {
            'identity': ledger.max_abs_residual <= identity_tolerance(
                trajectory, ledger.E0),
            'dissipation': ledger.min_dissipation >= -identity_tolerance(
                trajectory, ledger.E0),
            'mass': float(history['drift'].max()) <= mass_tolerance(
                trajectory)}
        summary = {
            'name': self.project.name,
            'data': self.solution.key,
            'cells': self.mesh.n_cells,
            'h': self.mesh.h,
            'dt': trajectory.config.dt,
            'steps': len(trajectory) - 1,
            'backoffs': trajectory.backoffs,
            'failure': trajectory.failure,
            'energy': ledger.summary(),
            'mass_drift': float(history['drift'].max()),
            'density_dissipation': {
                'upper': monitor.upper,
                'lower': monitor.lower,
                'header': monitor.header}}
        if self.sources is not None:
            report = diagnostics.relative_energy_inequality_check(
                trajectory,
                self.solution,
                degree = self.config.quadrature_degree)
            self.artifacts.append(export.write_csv(
                report.to_frame(), folder.joinpath('relative_energy.csv')))
            gates['slack'] = report.passes(
                framework.Defaults.gates['slack'])
            summary['relative_energy'] = report.summary()
        summary['gates'] = gates
        self.artifacts.append(export.write_json(
            summary, folder.joinpath('summary.json')))
        self.results.update(summary)
        if trajectory.failed:
            self.exit_code = 3
        self.enforce([key for key, passed in gates.items() if not passed])
        return


@dataclasses.dataclass
class Convergence(resources.Manager):
    """Measures the error against a manufactured solution under refinement.

    Level k refines the configured mesh k times and multiplies dt by
    'convergence.dt_factor'**k, so the default 1/4 couples Δt to h².

    Args:
        project (framework.Project): linked Project instance.

    Attributes:
        solution (Optional[resources.Solution]): manufactured solution.
        errors (list[diagnostics.StrongError]): errors per level.
        table (Optional[pd.DataFrame]): one row per level.

    """
    project: Optional[framework.Project] = dataclasses.field(
        default = None, repr = False, compare = False)
    solution: Optional[resources.Solution] = None
    errors: list[diagnostics.StrongError] = dataclasses.field(
        default_factory = list, repr = False)
    table: Optional[pd.DataFrame] = dataclasses.field(
        default = None, repr = False)

    """ Public Methods """

    def complete(self) -> None:
        """Runs every level and fits the orders."""
        self.draft()
        self.publish()
        self.execute()
        return

    def draft(self) -> None:
        """Selects the manufactured solution."""
        self.solution = self.build_solution(self.config.solution)
        if not self.solution.manufactured:
            raise errors.ConfigurationError(
                f'{self.solution.key} is not a manufactured solution')
        return

    def publish(self) -> None:
        """Runs the solution on every refinement level."""
        config = self.config
        rows = []
        for level in range(config.convergence_levels):
            mesh = self.build_mesh(level)
            settings = self.build_scheme(
                dt = config.dt * config.dt_factor**level)
            sources = self.solution.sources(
                settings.law,
                settings.viscosity,
                degree = config.quadrature_degree)
            initial = self.solution.project(
                mesh, degree = config.quadrature_degree)
            trajectory = scheme.run_simulation(
                initial, settings, sources = sources)
            if trajectory.failed:
                _LOGGER.error('level %d failed: %s', level, trajectory.failure)
                self.exit_code = 3
                break
            error = diagnostics.error_vs_strong(
                trajectory,
                self.solution,
                degree = config.quadrature_degree)
            bounds = diagnostics.uniform_bounds(trajectory)
            monitor = diagnostics.density_dissipation_monitor(trajectory)
            self.errors.append(error)
            rows.append({
                'level': level,
                'h': mesh.h,
                'dt': trajectory.config.dt,
                'initial_relative_energy': float(error.relative_energy[0]),
                'relative_energy': error.max_relative_energy,
                'gradient_error': error.total_gradient_error,
                'error': error.max_relative_energy + error.total_gradient_error,
                'velocity_bound': bounds.velocity,
                'density_bound': bounds.density,
                'momentum_bound': bounds.momentum,
                'density_dissipation': monitor.total})
            _LOGGER.info(
                'level %d: h = %.4f, dt = %.3e, relative energy = %.4e',
                level, mesh.h, trajectory.config.dt,
                rows[-1]['relative_energy'])
        self.table = pd.DataFrame(rows)
        return

    def execute(self) -> None:
        """Writes the table of errors and orders and sets 'exit_code'.

        The gate is the fitted order of the largest relative energy, which
        must reach the predicted exponent less the order margin.

        """
        folder = self.folder
        table = self.table
        expected = thermo.convergence_exponent(self.config.gamma)
        orders: dict[str, float] = {}
        growth: dict[str, float] = {}
        constants: list[float] = []
        if len(table) > 0:
            table['eoc'] = [math.nan] + diagnostics.eoc(
                list(table['h']), list(table['relative_energy']))
            table['constant'] = error_constants(table, expected)
            constants = list(table['constant'])
            orders = {
                key: diagnostics.fit_order(table['h'], table[key])
                for key in ('relative_energy', 'gradient_error', 'error')}
            growth = {
                key: -diagnostics.fit_order(table['h'], table[key])
                for key in BOUNDS}
        self.artifacts.append(export.write_csv(
            table, folder.joinpath('convergence.csv')))
        order = orders.get('relative_energy', math.nan)
        passed = order >= (
            expected - framework.Defaults.gates['order_margin'])
        summary = {
            'name': self.project.name,
            'solution': self.solution.key,
            'levels': len(table),
            'orders': orders,
            'expected_order': expected,
            'constants': constants,
            'constant_ratios': [
                later / earlier if earlier > 0 else math.nan
                for earlier, later in zip(constants, constants[1:])],
            'bound_growth': growth,
            'passed': bool(passed)}
        self.artifacts.append(export.write_json(
            summary, folder.joinpath('summary.json')))
        self.results.update(summary)
        if not passed:
            _LOGGER.error(
                'relative energy order %.3f is below %.3f', order, expected)
            self.enforce(['relative_energy_order'])
        return


@dataclasses.dataclass
class VerifyInequalities(resources.Manager):
    """Runs every inequality probe and checks their trends.

    On needle meshes the regularity gate is not applied; probes whose
    constants blow up are flagged and do not fail the run.

    Args:
        project (framework.Project): linked Project instance.

    Attributes:
        reports (dict[str, laboratory.ProbeReport]): reports by probe key.

    """
    project: Optional[framework.Project] = dataclasses.field(
        default = None, repr = False, compare = False)
    reports: dict[str, laboratory.ProbeReport] = dataclasses.field(
        default_factory = dict, repr = False)

    """ Public Methods """

    def complete(self) -> None:
        """Runs and checks every probe."""
        self.draft()
        self.publish()
        self.execute()
        return

    def draft(self) -> None:
        config = self.config
        _LOGGER.info(
            '%s: %d probes on %d levels with %d samples',
            self.project.name,
            len(laboratory.PROBES),
            config.laboratory_levels,
            config.samples)
        return

    def publish(self) -> None:
        """Runs every probe."""
        config = self.config
        self.reports = laboratory.probe_all(
            levels = config.laboratory_levels,
            samples = config.samples,
            seed = config.seed,
            exponent = config.exponent,
            sobolev_exponent = config.sobolev_exponent,
            needle = config.needle)
        return

    def execute(self) -> None:
        """Writes one table per probe and sets 'exit_code'."""
        folder = self.folder
        band = framework.Defaults.gates['band']
        margin = framework.Defaults.gates['order_margin']
        summary: dict[str, Any] = {}
        failed = []
        for key, report in self.reports.items():
            self.artifacts.append(export.write_csv(
                report.to_frame(), folder.joinpath(f'{key}.csv')))
            passed = report.within_band(band)
            if report.orders and not report.needle:
                passed = passed and report.orders_within(
                    report.expected, tolerance = margin)
            summary[key] = {
                'slope': report.slope,
                'max_ratio': float(np.nanmax(report.max_ratio)),
                'within_band': report.within_band(band),
                'orders': report.orders,
                'expected_orders': report.expected,
                'bounds': report.bounds,
                'flagged': report.flagged,
                'passed': bool(passed)}
            if not passed and not report.needle:
                failed.append(key)
        self.artifacts.append(export.write_json(
            summary, folder.joinpath('summary.json')))
        self.results.update(summary)
        self.enforce(failed)
        return


def mass_table(trajectory: scheme.Trajectory) -> pd.DataFrame:
    """Returns mass per step beside the mass the forcing accounts for.

    Columns are step, time, mass, expected and drift, the last being
    |mass − expected|/M0.

    """
    dt = trajectory.config.dt
    measures = trajectory.mesh.cell_measures
    mass, _ = diagnostics.mass_history(trajectory)
    added = np.zeros(len(trajectory))
    for n, state in enumerate(trajectory.states[1:], start = 1):
        if state.mass_load is not None:
            added[n] = dt * float(np.sum(measures * state.mass_load))
    expected = mass[0] + np.cumsum(added)
    return pd.DataFrame({
        'step': np.arange(len(trajectory)),
        'time': trajectory.times,
        'mass': mass,
        'expected': expected,
        'drift': np.abs(mass - expected) / abs(mass[0])})

def identity_tolerance(trajectory: scheme.Trajectory, energy: float) -> float:
    """Returns the admitted energy identity residual of 'trajectory'.

    It scales the nonlinear tolerance by the gate factor, the initial
    energy plus one and the number of steps.

    """
    config = trajectory.config
    steps = max(1, len(trajectory) - 1)
    return (
        framework.Defaults.gates['identity']
        * max(config.picard_tol, np.finfo(float).eps)
        * (abs(energy) + 1.0)
        * steps)

def mass_tolerance(trajectory: scheme.Trajectory) -> float:
    """Returns the admitted relative mass drift of 'trajectory'."""
    config = trajectory.config
    floor = framework.Defaults.gates['mass']
    if config.solver == 'iterative':
        floor = max(floor, config.linear_tol)
    return floor * max(1, len(trajectory) - 1)

def error_constants(table: pd.DataFrame, exponent: float) -> list[float]:
    """Returns the constant c of each level in the relative energy bound.

    c = E_max/(E_0 + h^A + Δt^{1/2}), with A the predicted exponent, so a
    bounded column means the estimate holds with a mesh independent c.

    """
    floor = (
        table['initial_relative_energy']
        + table['h']**exponent
        + np.sqrt(table['dt']))
    return list(table['relative_energy'] / floor)
