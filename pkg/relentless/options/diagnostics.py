"""
diagnostics: energy balances, relative energies and error measures of runs
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
    EnergyLedger (object): per-step energy balance of a trajectory.
    RelEnergyReport (object): both sides of the relative energy inequality.
    DissipationMonitor (object): upwind density dissipation sums.
    StrongError (object): distance of a trajectory to a strong solution.
    UniformBounds (object): quantities bounded independently of h and dt.
    energy_ledger: builds the EnergyLedger of a trajectory.
    mass_history: total mass per step and its largest relative drift.
    relative_energy_inequality_check: builds the RelEnergyReport.
    density_dissipation_monitor: builds the DissipationMonitor.
    error_vs_strong: builds the StrongError.
    uniform_bounds: builds the UniformBounds.
    fit_order: least-squares log-log slope.
    eoc: pairwise experimental orders of convergence.

Dissipation terms are evaluated as exact Bregman gaps of H, so every term of
the energy balance is computed without intermediate densities. For a state
that solves the scheme exactly,

    E^m − E^0 + Σ_n (viscous + D_time_u + D_time_rho + D_space_u
        + D_space_rho − source_work) = 0,

and 'identity_residual' is minus the left side.

To Do:


"""
from __future__ import annotations
from collections.abc import Callable, Sequence
import dataclasses
import logging
import math
from typing import Any, Optional

import more_itertools
import numpy as np
from numpy.typing import ArrayLike, NDArray
import pandas as pd

from ..core import errors
from ..core import resources
from ..core import scheme
from ..core import spaces
from ..core import thermo


_LOGGER = logging.getLogger(__name__)

Reference = Callable[[float, NDArray], NDArray]


@dataclasses.dataclass
class EnergyLedger(object):
    """Per-step energy balance of a trajectory.

    Every array has one entry per state. Entries of step-wise quantities
    (viscous and the D terms) at index 0 are zero; 'identity_residual' is
    accumulated up to each step.

    Args:
        times (NDArray): t_n.
        mass (NDArray): Σ|K|ϱ_K.
        kinetic (NDArray): Σ ½|K|ϱ_K|u_K|².
        internal (NDArray): Σ|K|H(ϱ_K).
        viscous (NDArray): Δt(μ‖∇u‖² + (μ+λ)‖div u‖²).
        D_time_u (NDArray): Σ ½|K|ϱ_K^{n−1}|u_K^n − u_K^{n−1}|².
        D_time_rho (NDArray): Σ|K|E(ϱ_K^{n−1}|ϱ_K^n).
        D_space_u (NDArray): Δt Σ_σ ½|σ|ϱ_σ^{up}|u_K − u_L|²|u_σ·n|.
        D_space_rho (NDArray): Δt Σ_σ |σ||u_σ·n|E(ϱ^{up}|ϱ^{down}).
        source_work (NDArray): Δt times the work of the discrete loads.
        identity_residual (NDArray): minus the accumulated balance.
        M0 (float): initial mass.
        E0 (float): initial energy.

    """
    times: NDArray
    mass: NDArray
    kinetic: NDArray
    internal: NDArray
    viscous: NDArray
    D_time_u: NDArray
    D_time_rho: NDArray
    D_space_u: NDArray
    D_space_rho: NDArray
    source_work: NDArray
    identity_residual: NDArray
    M0: float
    E0: float

    """ Public Methods """

    def to_frame(self) -> pd.DataFrame:
        """Returns one row per step with every column of the ledger."""
        return pd.DataFrame({
            'step': np.arange(len(self.times)),
            'time': self.times,
            'mass': self.mass,
            'kinetic': self.kinetic,
            'internal': self.internal,
            'energy': self.energy,
            'viscous': self.viscous,
            'D_time_u': self.D_time_u,
            'D_time_rho': self.D_time_rho,
            'D_space_u': self.D_space_u,
            'D_space_rho': self.D_space_rho,
            'source_work': self.source_work,
            'identity_residual': self.identity_residual})

    def summary(self) -> dict[str, float]:
        return {
            'M0': self.M0,
            'E0': self.E0,
            'max_abs_identity_residual': self.max_abs_residual,
            'min_dissipation_term': self.min_dissipation}

    """ Properties """

    @property
    def energy(self) -> NDArray:
        return self.kinetic + self.internal

    @property
    def dissipation(self) -> NDArray:
        """Returns the sum of the four D terms per step."""
        return self.D_time_u + self.D_time_rho + self.D_space_u + self.D_space_rho

    @property
    def max_abs_residual(self) -> float:
        return float(np.abs(self.identity_residual).max())

    @property
    def min_dissipation(self) -> float:
        """Returns the smallest entry of the four D terms."""
        return float(min(
            self.D_time_u.min(),
            self.D_time_rho.min(),
            self.D_space_u.min(),
            self.D_space_rho.min()))


@dataclasses.dataclass
class RelEnergyReport(object):
    """Both sides of the discrete relative energy inequality.

    'lhs', 'rhs', 'slack' and 'dissipation' are accumulated from step 1 to
    each step m; the term arrays hold Δt times the step-wise sums.

    Args:
        times (NDArray): t_m.
        relative_energy (NDArray): relative energy at each step.
        lhs (NDArray): relative energy at m minus at 0 plus the accumulated
            viscous distance Δt Σ(μ|∇(u − U_h)|² + (μ+λ)|div(u − U_h)|²).
        rhs (NDArray): accumulated T1 to T6 and source terms.
        slack (NDArray): rhs − lhs.
        dissipation (NDArray): accumulated nonnegative terms dropped by the
            inequality, the four D terms plus Σ|K|E(r^n|r^{n−1}). For exact
            discrete solutions it equals 'slack'.
        terms (dict[str, NDArray]): step-wise T1 to T6 and 'source'.
        initial_energy (float): E0 of the trajectory.

    """
    times: NDArray
    relative_energy: NDArray
    lhs: NDArray
    rhs: NDArray
    slack: NDArray
    dissipation: NDArray
    terms: dict[str, NDArray]
    initial_energy: float

    """ Public Methods """

    def passes(self, tolerance: float = 1e-8) -> bool:
        """Returns whether slack ≥ −tolerance(E0 + 1) at every step."""
        return bool(
            self.slack.min() >= -tolerance * (self.initial_energy + 1.0))

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({
            'step': np.arange(len(self.times)),
            'time': self.times,
            'relative_energy': self.relative_energy,
            'lhs': self.lhs,
            'rhs': self.rhs,
            'slack': self.slack,
            'dissipation': self.dissipation})
        for key, values in self.terms.items():
            frame[key] = values
        return frame

    def summary(self) -> dict[str, float]:
        return {
            'min_slack': float(self.slack.min()),
            'max_relative_energy': float(self.relative_energy.max()),
            'max_abs_slack_minus_dissipation': float(
                np.abs(self.slack - self.dissipation).max())}


@dataclasses.dataclass
class DissipationMonitor(object):
    """Upwind density dissipation accumulated over a trajectory.

    For γ ≥ 2 only 'upper' is used: Δt ΣΣ|σ|(ϱ_K − ϱ_L)²/max(ϱ_K, ϱ_L)|u·n|.
    For γ < 2 faces are split by max(ϱ_K, ϱ_L) ≥ 1, which stands in for
    the intermediate density of the continuous estimate; 'upper' weights the
    squared jumps by max^{γ−2} and 'lower' leaves them unweighted.

    Args:
        gamma (float): adiabatic exponent of the law.
        upper (float): first sum.
        lower (float): second sum, 0 when γ ≥ 2.
        header (str): description of the classification used.

    """
    gamma: float
    upper: float
    lower: float
    header: str

    """ Properties """

    @property
    def total(self) -> float:
        return self.upper + self.lower


@dataclasses.dataclass
class StrongError(object):
    """Distance of a trajectory to a strong solution (r, U).

    Args:
        times (NDArray): t_m.
        relative_energy (NDArray): relative energy of (ϱ^m, u^m) with
            respect to (r^m, U_h^m).
        gradient_error (NDArray): Δt Σ_{n≤m} ‖∇_h(u^n − U_h^n)‖², zero at 0.
        density_error (NDArray): essential L² density error squared.
        residual_measure (NDArray): area of cells outside [r̲/2, 2r̄].
        residual_mass (NDArray): Σ over residual cells of |K|ϱ^γ.
        velocity_error (NDArray): Σ|K||u_K − U_K|² on cell averages.

    """
    times: NDArray
    relative_energy: NDArray
    gradient_error: NDArray
    density_error: NDArray
    residual_measure: NDArray
    residual_mass: NDArray
    velocity_error: NDArray

    """ Public Methods """

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({
            'step': np.arange(len(self.times)),
            'time': self.times,
            'relative_energy': self.relative_energy,
            'gradient_error': self.gradient_error,
            'density_error': self.density_error,
            'residual_measure': self.residual_measure,
            'residual_mass': self.residual_mass,
            'velocity_error': self.velocity_error})

    """ Properties """

    @property
    def max_relative_energy(self) -> float:
        return float(self.relative_energy.max())

    @property
    def total_gradient_error(self) -> float:
        return float(self.gradient_error[-1])


@dataclasses.dataclass
class UniformBounds(object):
    """Quantities bounded independently of h and Δt.

    Args:
        velocity (float): (Δt Σ_n ‖∇_h u^n‖²)^{1/2}.
        density (float): max_n ‖ϱ^n‖_{L^γ}.
        momentum (float): max_n Σ|K|ϱ_K|u_K|².
        relative_energy (Optional[float]): max_n relative energy with respect
            to a given (r, U), or None.

    """
    velocity: float
    density: float
    momentum: float
    relative_energy: Optional[float] = None

    def to_dict(self) -> dict[str, Any]:
        return dataclasses.asdict(self)


def energy_ledger(traj: scheme.Trajectory) -> EnergyLedger:
    """Returns the per-step energy balance of 'traj'.

    The density dissipation terms are exact Bregman gaps: per cell
    |K|E(ϱ^{n−1}|ϱ^n) and per internal face |σ||u_σ·n|E(ϱ^{up}|ϱ^{down}).

    """
    law = traj.config.law
    viscosity = traj.config.viscosity
    dt = traj.config.dt
    mesh = traj.mesh
    measures = mesh.cell_measures
    count = len(traj)
    columns = {
        key: np.zeros(count) for key in (
            'viscous', 'D_time_u', 'D_time_rho', 'D_space_u', 'D_space_rho',
            'source_work')}
    mass = np.array([state.mass for state in traj])
    kinetic = np.array([_kinetic(state) for state in traj])
    internal = np.array([
        float(np.sum(measures * law.helmholtz(state.rho.values)))
        for state in traj])
    for n, (previous, current) in enumerate(
            more_itertools.pairwise(traj.states), start = 1):
        rho = current.rho.values
        rho_prev = previous.rho.values
        means = current.u.cell_means
        jumps = means - previous.u.cell_means
        columns['D_time_u'][n] = 0.5 * np.sum(
            measures * rho_prev * np.sum(jumps**2, axis = 1))
        columns['D_time_rho'][n] = float(
            np.sum(measures * law.bregman(rho_prev, rho)))
        owners, neighbors, fluxes, upwind, downwind = _faces(current.u)
        speeds = np.abs(fluxes)
        velocity_jumps = np.sum((means[owners] - means[neighbors])**2, axis = 1)
        columns['D_space_u'][n] = dt * 0.5 * np.sum(
            speeds * rho[upwind] * velocity_jumps)
        columns['D_space_rho'][n] = dt * float(np.sum(
            speeds * law.bregman(rho[upwind], rho[downwind])))
        columns['viscous'][n] = dt * _viscous(current.u, viscosity)
        columns['source_work'][n] = dt * _source_work(current, law)
    balance = (
        kinetic + internal - kinetic[0] - internal[0]
        + np.cumsum(
            columns['viscous'] + columns['D_time_u'] + columns['D_time_rho']
            + columns['D_space_u'] + columns['D_space_rho']
            - columns['source_work']))
    return EnergyLedger(
        times = traj.times,
        mass = mass,
        kinetic = kinetic,
        internal = internal,
        identity_residual = -balance,
        M0 = float(mass[0]),
        E0 = float(kinetic[0] + internal[0]),
        **columns)

def mass_history(traj: scheme.Trajectory) -> tuple[NDArray, float]:
    """Returns Σ|K|ϱ_K per step and the largest relative drift from step 0."""
    mass = np.array([state.mass for state in traj])
    drift = float(np.abs(mass - mass[0]).max() / abs(mass[0]))
    return mass, drift

def relative_energy_inequality_check(
    traj: scheme.Trajectory,
    r: Reference | resources.Solution,
    U: Optional[Reference] = None,
    degree: int = spaces.ANALYTIC_DEGREE) -> RelEnergyReport:
    """Evaluates both sides of the relative energy inequality for (r, U).

    r and U are sampled at every t_n: r^n are cell averages of r(t_n), U_h^n
    the face means of U(t_n) and U_K^n their cell averages.

    Args:
        traj (scheme.Trajectory): run to examine.
        r (Reference | resources.Solution): density r(t, x), or a Solution
            supplying both r and U.
        U (Optional[Reference]): velocity U(t, x), vanishing on the boundary.
        degree (int): exactness of the cell quadrature.

    Raises:
        NonPositiveReferenceField: if r is not positive on some cell.

    """
    r, U = _reference_pair(r, U)
    law = traj.config.law
    viscosity = traj.config.viscosity
    dt = traj.config.dt
    mesh = traj.mesh
    measures = mesh.cell_measures
    references = [_sample_reference(traj, state, r, U, degree) for state in traj]
    count = len(traj)
    keys = ('T1', 'T2', 'T3', 'T4', 'T5', 'T6', 'source')
    terms = {key: np.zeros(count) for key in keys}
    viscous = np.zeros(count)
    dissipation = np.zeros(count)
    relative = np.array([
        _relative_energy(state, density, field, law)
        for state, (density, field) in zip(traj, references)])
    for n in range(1, count):
        previous, current = traj[n - 1], traj[n]
        r_prev, U_prev = references[n - 1]
        r_now, U_now = references[n]
        rho = current.rho.values
        u_prev = previous.u.cell_means
        means_prev = U_prev.cell_means
        means = U_now.cell_means
        difference = U_now - current.u
        gradient = spaces.broken_gradient(U_now)
        gradient_difference = spaces.broken_gradient(difference)
        terms['T1'][n] = dt * np.sum(measures * (
            viscosity.mu * np.einsum(
                'cab,cab->c', gradient.tensors, gradient_difference.tensors)
            + viscosity.bulk * gradient.divergence
            * gradient_difference.divergence))
        terms['T2'][n] = np.sum(
            measures * previous.rho.values * np.einsum(
                'ck,ck->c',
                means - means_prev,
                0.5 * (means_prev + means) - u_prev))
        owners, neighbors, fluxes, upwind, _ = _faces(current.u)
        carried = current.u.cell_means[upwind]
        centred = 0.5 * (means[owners] + means[neighbors])
        mass_fluxes = fluxes * rho[upwind]
        terms['T3'][n] = -dt * np.sum(mass_fluxes * np.einsum(
            'fk,fk->f', centred - carried, means[owners] - means[neighbors]))
        pressure = law.pressure(rho)
        terms['T4'][n] = -dt * np.sum(
            pressure * measures * gradient.divergence)
        derivative = law.helmholtz_derivative(r_now.values)
        derivative_prev = law.helmholtz_derivative(r_prev.values)
        terms['T5'][n] = np.sum(
            measures * (r_now.values - rho) * (derivative - derivative_prev))
        terms['T6'][n] = dt * np.sum(
            mass_fluxes * (derivative_prev[owners] - derivative_prev[neighbors]))
        terms['source'][n] = dt * _relative_source(
            current, U_now, derivative_prev, law)
        viscous[n] = dt * _viscous(difference, viscosity)
        dissipation[n] = _step_dissipation(previous, current, dt, law) + float(
            np.sum(measures * law.bregman(r_now.values, r_prev.values)))
    lhs = relative - relative[0] + np.cumsum(viscous)
    rhs = np.cumsum(sum(terms.values()))
    first = traj[0]
    initial_energy = _kinetic(first) + float(
        np.sum(measures * law.helmholtz(first.rho.values)))
    return RelEnergyReport(
        times = traj.times,
        relative_energy = relative,
        lhs = lhs,
        rhs = rhs,
        slack = rhs - lhs,
        dissipation = np.cumsum(dissipation),
        terms = terms,
        initial_energy = initial_energy)

def density_dissipation_monitor(
    traj: scheme.Trajectory,
    pressure_law: Optional[thermo.PressureLaw] = None) -> DissipationMonitor:
    """Returns the upwind density dissipation sums of 'traj'.

    Raises:
        ValueError: if γ < 2 and the law does not declare alpha and p0.

    """
    law = pressure_law or traj.config.law
    gamma = law.gamma
    if gamma < 2 and (law.alpha is None or law.p0 is None):
        raise ValueError('gamma < 2 needs a law with alpha and p0')
    dt = traj.config.dt
    upper = 0.0
    lower = 0.0
    for state in traj.states[1:]:
        rho = state.rho.values
        owners, neighbors, fluxes, _, _ = _faces(state.u)
        jumps = (rho[owners] - rho[neighbors])**2 * np.abs(fluxes)
        largest = np.maximum(rho[owners], rho[neighbors])
        if gamma >= 2:
            upper += dt * float(np.sum(jumps / largest))
        else:
            heavy = largest >= 1.0
            upper += dt * float(
                np.sum(jumps[heavy] / largest[heavy]**(2.0 - gamma)))
            lower += dt * float(np.sum(jumps[~heavy]))
    if gamma >= 2:
        header = 'squared density jumps over max(rho_K, rho_L)'
    else:
        header = (
            'faces split by max(rho_K, rho_L) >= 1 in place of the '
            'intermediate density; an approximation of the estimate')
    return DissipationMonitor(
        gamma = gamma, upper = upper, lower = lower, header = header)

def error_vs_strong(
    traj: scheme.Trajectory,
    r: Reference | resources.Solution,
    U: Optional[Reference] = None,
    rbar: Optional[tuple[float, float]] = None,
    degree: int = spaces.ANALYTIC_DEGREE) -> StrongError:
    """Returns the relative energy and broken H¹ error against (r, U).

    Args:
        traj (scheme.Trajectory): run to examine.
        r (Reference | resources.Solution): density, or a Solution.
        U (Optional[Reference]): velocity.
        rbar (Optional[tuple[float, float]]): bounds r̲, r̄ of r for the
            essential and residual split. Defaults to the sampled extremes.
        degree (int): exactness of the cell quadrature.

    """
    r, U = _reference_pair(r, U)
    law = traj.config.law
    dt = traj.config.dt
    mesh = traj.mesh
    measures = mesh.cell_measures
    references = [_sample_reference(traj, state, r, U, degree) for state in traj]
    if rbar is None:
        low = min(float(density.values.min()) for density, _ in references)
        high = max(float(density.values.max()) for density, _ in references)
        rbar = (low, high)
    count = len(traj)
    relative = np.zeros(count)
    gradient = np.zeros(count)
    density_error = np.zeros(count)
    residual_measure = np.zeros(count)
    residual_mass = np.zeros(count)
    velocity_error = np.zeros(count)
    for n, (state, (density, field)) in enumerate(zip(traj, references)):
        relative[n] = _relative_energy(state, density, field, law)
        if n > 0:
            gradient[n] = dt * spaces.broken_norm(state.u - field)**2
        split = thermo.essential_residual_split(
            state.rho,
            rbar[0],
            rbar[1],
            gamma = law.gamma,
            reference = density)
        density_error[n] = split.essential_distance
        residual_measure[n] = split.residual_measure
        residual_mass[n] = split.residual_mass
        velocity_error[n] = float(np.sum(
            measures
            * np.sum((state.u.cell_means - field.cell_means)**2, axis = 1)))
    return StrongError(
        times = traj.times,
        relative_energy = relative,
        gradient_error = np.cumsum(gradient),
        density_error = density_error,
        residual_measure = residual_measure,
        residual_mass = residual_mass,
        velocity_error = velocity_error)

def uniform_bounds(
    traj: scheme.Trajectory,
    r: Optional[Reference | resources.Solution] = None,
    U: Optional[Reference] = None) -> UniformBounds:
    """Returns the h- and Δt-uniform quantities of 'traj'.

    The relative energy entry is filled only when a reference is given.

    """
    law = traj.config.law
    dt = traj.config.dt
    measures = traj.mesh.cell_measures
    velocity = math.sqrt(dt * sum(
        spaces.broken_norm(state.u)**2 for state in traj.states[1:]))
    density = max(
        float(np.sum(measures * state.rho.values**law.gamma))**(1 / law.gamma)
        for state in traj)
    momentum = max(2.0 * _kinetic(state) for state in traj)
    relative = None
    if r is not None:
        relative = error_vs_strong(traj, r, U).max_relative_energy
    return UniformBounds(
        velocity = velocity,
        density = density,
        momentum = momentum,
        relative_energy = relative)

def fit_order(hs: ArrayLike, values: ArrayLike) -> float:
    """Returns the least-squares slope of log(values) against log(hs).

    Nonpositive values are skipped; nan is returned when fewer than two
    remain.

    """
    hs = np.asarray(hs, dtype = float)
    values = np.asarray(values, dtype = float)
    usable = values > 0
    if usable.sum() < 2:
        return math.nan
    slope, _ = np.polyfit(np.log(hs[usable]), np.log(values[usable]), 1)
    return float(slope)

def eoc(hs: Sequence[float], values: Sequence[float]) -> list[float]:
    """Returns log(e_{k+1}/e_k)/log(h_{k+1}/h_k) for consecutive levels."""
    orders = []
    for (h0, e0), (h1, e1) in more_itertools.pairwise(zip(hs, values)):
        if e0 > 0 and e1 > 0:
            orders.append(math.log(e1 / e0) / math.log(h1 / h0))
        else:
            orders.append(math.nan)
    return orders

def _faces(
    u: spaces.CRVectorField) -> tuple[NDArray, NDArray, NDArray, NDArray,
                                      NDArray]:
    """Returns owners, neighbors, fluxes, upwind and downwind cells."""
    mesh = u.mesh
    faces = mesh.internal_faces
    owners = mesh.owners[faces]
    neighbors = mesh.neighbors[faces]
    fluxes = scheme.normal_fluxes(u)
    outgoing = fluxes > 0
    upwind = np.where(outgoing, owners, neighbors)
    downwind = np.where(outgoing, neighbors, owners)
    return owners, neighbors, fluxes, upwind, downwind

def _kinetic(state: scheme.State) -> float:
    means = state.u.cell_means
    return 0.5 * float(np.sum(
        state.mesh.cell_measures * state.rho.values * np.sum(means**2, axis = 1)))

def _viscous(
    u: spaces.CRVectorField,
    viscosity: thermo.ViscosityParams) -> float:
    """Returns μ‖∇_h u‖² + (μ+λ)‖div_h u‖²."""
    gradient = spaces.broken_gradient(u)
    measures = u.mesh.cell_measures
    return float(np.sum(measures * (
        viscosity.mu * gradient.magnitude**2
        + viscosity.bulk * gradient.divergence**2)))

def _source_work(state: scheme.State, law: thermo.PressureLaw) -> float:
    """Returns S(u^n) + Σ|K|s_K(H′(ϱ_K) − ½|u_K|²) per unit time."""
    work = 0.0
    if state.momentum_load is not None:
        work += float(np.sum(state.momentum_load * state.u.dofs))
    if state.mass_load is not None:
        work += float(np.sum(
            state.mesh.cell_measures * state.mass_load * (
                law.helmholtz_derivative(state.rho.values)
                - 0.5 * np.sum(state.u.cell_means**2, axis = 1))))
    return work

def _relative_source(
    state: scheme.State,
    U: spaces.CRVectorField,
    derivative_prev: NDArray,
    law: thermo.PressureLaw) -> float:
    """Returns the source term of the relative energy balance per unit time."""
    total = 0.0
    if state.momentum_load is not None:
        total += float(np.sum(state.momentum_load * (state.u.dofs - U.dofs)))
    if state.mass_load is not None:
        measures = state.mesh.cell_measures
        total += float(np.sum(measures * state.mass_load * (
            law.helmholtz_derivative(state.rho.values)
            - 0.5 * np.sum(state.u.cell_means**2, axis = 1)
            + 0.5 * np.sum(U.cell_means**2, axis = 1)
            - derivative_prev)))
    return total

def _step_dissipation(
    previous: scheme.State,
    current: scheme.State,
    dt: float,
    law: thermo.PressureLaw) -> float:
    """Returns the four D terms of one step."""
    measures = current.mesh.cell_measures
    rho = current.rho.values
    rho_prev = previous.rho.values
    means = current.u.cell_means
    total = 0.5 * np.sum(
        measures * rho_prev * np.sum((means - previous.u.cell_means)**2, axis = 1))
    total += np.sum(measures * law.bregman(rho_prev, rho))
    owners, neighbors, fluxes, upwind, downwind = _faces(current.u)
    speeds = np.abs(fluxes)
    total += dt * 0.5 * np.sum(
        speeds * rho[upwind]
        * np.sum((means[owners] - means[neighbors])**2, axis = 1))
    total += dt * np.sum(speeds * law.bregman(rho[upwind], rho[downwind]))
    return float(total)

def _relative_energy(
    state: scheme.State,
    density: spaces.ScalarCellField,
    field: spaces.CRVectorField,
    law: thermo.PressureLaw) -> float:
    return thermo.relative_energy(state, density, field, law)

def _reference_pair(
    r: Reference | resources.Solution,
    U: Optional[Reference]) -> tuple[Reference, Reference]:
    if U is None:
        if not isinstance(r, resources.Solution):
            raise TypeError('a velocity reference or a Solution is required')
        return r.density, r.velocity
    return r, U

def _sample_reference(
    traj: scheme.Trajectory,
    state: scheme.State,
    r: Reference,
    U: Reference,
    degree: int) -> tuple[spaces.ScalarCellField, spaces.CRVectorField]:
    """Returns cell averages of r(t_n) and the projection of U(t_n)."""
    mesh = traj.mesh
    t = state.time
    rule = spaces.triangle_rule(degree)
    samples = np.asarray(r(t, mesh.points(rule.points)))
    if np.any(samples <= 0):
        raise errors.NonPositiveReferenceField(
            f'reference density reaches {samples.min():.3e} at t = {t}')
    density = spaces.cell_average(lambda x: r(t, x), mesh, degree = degree)
    field = spaces.cr_interpolate(lambda x: U(t, x), mesh)
    return density, field
