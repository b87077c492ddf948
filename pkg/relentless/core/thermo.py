"""
thermo: equations of state, Helmholtz functions and relative energies
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
    ViscosityParams (object): shear and bulk viscosity coefficients.
    PressureLaw (framework.Resource): base class for barotropic equations of
        state, with the Helmholtz function H and its Bregman distance.
    Isentropic (PressureLaw): p = aϱ^γ with closed-form H.
    Tabulated (PressureLaw): C² pressure from callables or a spline table
        with H by adaptive quadrature.
    DensitySplit (object): essential and residual cells of a density.
    helmholtz_H: H(ϱ) = ϱ∫₁^ϱ p(z)/z² dz.
    bregman_E: E(ϱ|r) = H(ϱ) − H′(r)(ϱ − r) − H(r).
    relative_energy: discrete relative energy of a state and a reference.
    essential_residual_split: classifies cells against [r̲/2, 2r̄].
    coercivity_constant: fitted lower bound of E against the split
        aggregates.
    convergence_exponent: the exponent A of the error estimate.

To Do:


"""
from __future__ import annotations
import abc
from collections.abc import Callable, Sequence
import dataclasses
import functools
import logging
from typing import Any, ClassVar, Optional, TYPE_CHECKING

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate
from scipy import interpolate

from . import errors
from . import framework
from . import spaces

if TYPE_CHECKING:
    from . import scheme


_LOGGER = logging.getLogger(__name__)


@dataclasses.dataclass
class ViscosityParams(object):
    """Viscosity coefficients of the momentum equation.

    Args:
        mu (float): shear viscosity. Defaults to 1.0.
        lambda_ (float): second viscosity coefficient. Defaults to 0.0.

    Attributes:
        dimension (ClassVar[int]): spatial dimension used by the admissibility
            condition λ + (2/d)μ ≥ 0.

    """
    mu: float = 1.0
    lambda_: float = 0.0
    dimension: ClassVar[int] = 2

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        self.mu = float(self.mu)
        self.lambda_ = float(self.lambda_)
        if not self.mu > 0:
            raise ValueError(f'mu must be positive, not {self.mu}')
        if self.lambda_ + 2.0 * self.mu / self.dimension < 0:
            raise ValueError(
                f'lambda + (2/d)mu must be nonnegative, not '
                f'{self.lambda_ + 2.0 * self.mu / self.dimension}')

    """ Properties """

    @property
    def bulk(self) -> float:
        """Returns μ + λ, the coefficient of the divergence term."""
        return self.mu + self.lambda_


@dataclasses.dataclass
class PressureLaw(framework.Resource, abc.ABC):
    """Base class for barotropic equations of state.

    Subclasses supply p, p′, H and H′; everything else derives from them.

    Args:
        gamma (float): adiabatic exponent. Defaults to 2.0.
        p_infty (Optional[float]): limit of p′(ϱ)/ϱ^{γ−1} at infinity.
        p0 (Optional[float]): lower limit of p′(ϱ)/ϱ^{α+1} at zero, required
            when gamma < 2.
        alpha (Optional[float]): exponent of the behaviour at zero, required
            to be nonpositive when gamma < 2.

    """
    gamma: float = 2.0
    p_infty: Optional[float] = None
    p0: Optional[float] = None
    alpha: Optional[float] = None

    """ Required Subclass Methods """

    @abc.abstractmethod
    def pressure(self, rho: ArrayLike) -> NDArray:
        """Returns p(ϱ)."""

    @abc.abstractmethod
    def derivative(self, rho: ArrayLike) -> NDArray:
        """Returns p′(ϱ)."""

    @abc.abstractmethod
    def _helmholtz(self, rho: NDArray) -> NDArray:
        """Returns H(ϱ) for admissible densities."""

    @abc.abstractmethod
    def _helmholtz_derivative(self, rho: NDArray) -> NDArray:
        """Returns H′(ϱ) for positive densities."""

    """ Public Methods """

    @classmethod
    def create(cls, **kwargs: Any) -> PressureLaw:
        """Returns an instance built from the matching keyword arguments."""
        names = {item.name for item in dataclasses.fields(cls)}
        return cls(**{k: v for k, v in kwargs.items() if k in names})

    def helmholtz(self, rho: ArrayLike) -> float | NDArray:
        """Returns H(ϱ), with H(0) = 0 as a limit.

        Raises:
            NegativeDensity: if any density is negative, or zero while
                gamma is 1.

        """
        values = self._admissible(rho)
        result = self._helmholtz(values)
        return result if np.ndim(rho) else float(result)

    def helmholtz_derivative(self, rho: ArrayLike) -> float | NDArray:
        """Returns H′(ϱ) for positive densities."""
        values = np.asarray(rho, dtype = float)
        if np.any(values <= 0):
            raise errors.NegativeDensity('H′ needs strictly positive density')
        result = self._helmholtz_derivative(values)
        return result if np.ndim(rho) else float(result)

    def helmholtz_second(self, rho: ArrayLike) -> float | NDArray:
        """Returns H″(ϱ) = p′(ϱ)/ϱ."""
        values = np.asarray(rho, dtype = float)
        result = self.derivative(values) / values
        return result if np.ndim(rho) else float(result)

    def bregman(self, rho: ArrayLike, r: ArrayLike) -> float | NDArray:
        """Returns E(ϱ|r) = H(ϱ) − H′(r)(ϱ − r) − H(r).

        Negative values within the round-off of the three terms are set to
        zero. Larger negative values are kept and logged, since they mean H
        is not convex between ϱ and r.

        Raises:
            NonPositiveReference: if any reference density is not positive.
            NegativeDensity: if any density is inadmissible.

        """
        references = np.asarray(r, dtype = float)
        if np.any(references <= 0):
            raise errors.NonPositiveReference(
                f'reference density must be positive, not '
                f'{references.min()}')
        densities = self._admissible(rho)
        energy = self._helmholtz(densities)
        tangent = self._helmholtz_derivative(references) * (
            densities - references)
        anchor = self._helmholtz(references)
        gap = energy - tangent - anchor
        roundoff = 64 * np.finfo(float).eps * (
            np.abs(energy) + np.abs(tangent) + np.abs(anchor) + 1.0)
        result = np.where((gap < 0) & (gap >= -roundoff), 0.0, gap)
        if np.any(result < 0):
            _LOGGER.warning(
                'relative energy %.3e is negative beyond round-off; the law '
                'is not convex between the densities', float(np.min(result)))
        return result if np.ndim(rho) or np.ndim(r) else float(result)

    def validate(self) -> None:
        """Checks p(0) = 0, p′ > 0 and the declared asymptotic exponents.

        Raises:
            ValueError: if any hypothesis on the pressure fails.

        """
        if self.gamma < 1:
            raise ValueError(f'gamma must be at least 1, not {self.gamma}')
        if abs(float(self.pressure(0.0))) > 1e-12:
            raise ValueError(f'p(0) must be 0, not {self.pressure(0.0)}')
        grid = np.geomspace(1e-3, 1e3, 61)
        slopes = self.derivative(grid)
        if not np.all(slopes > 0):
            index = int(np.argmin(slopes))
            raise ValueError(
                f'p′ must be positive, but p′({grid[index]:.3g}) = '
                f'{slopes[index]:.3g}')
        if self.p_infty is not None and not self.p_infty > 0:
            raise ValueError(f'p_infty must be positive, not {self.p_infty}')
        if self.gamma < 2:
            if self.alpha is None or self.p0 is None:
                raise ValueError('alpha and p0 are required when gamma < 2')
            if self.alpha > 0 or not self.p0 > 0:
                raise ValueError(
                    f'gamma < 2 needs alpha <= 0 and p0 > 0, not alpha = '
                    f'{self.alpha} and p0 = {self.p0}')
        return

    """ Private Methods """

    def _admissible(self, rho: ArrayLike) -> NDArray:
        values = np.asarray(rho, dtype = float)
        if np.any(values < 0):
            raise errors.NegativeDensity(
                f'density must be nonnegative, not {values.min()}')
        if self.gamma == 1 and np.any(values == 0):
            raise errors.NegativeDensity(
                'zero density is not admitted when gamma is 1')
        return values


@dataclasses.dataclass
class Isentropic(PressureLaw):
    """Isentropic law p = aϱ^γ.

    The asymptotic parameters follow from a and γ: p_infty = aγ and, when
    γ < 2, alpha = γ − 2 and p0 = aγ.

    Args:
        gamma (float): adiabatic exponent, at least 1. Defaults to 2.0.
        coefficient (float): the constant a > 0. Defaults to 1.0.

    """
    coefficient: float = 1.0

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        self.gamma = float(self.gamma)
        self.coefficient = float(self.coefficient)
        if not self.coefficient > 0:
            raise ValueError(
                f'coefficient must be positive, not {self.coefficient}')
        self.p_infty = self.coefficient * self.gamma
        if self.gamma < 2:
            self.alpha = self.gamma - 2.0
            self.p0 = self.coefficient * self.gamma
        self.validate()

    """ Public Methods """

    def pressure(self, rho: ArrayLike) -> NDArray:
        return self.coefficient * np.power(rho, self.gamma)

    def derivative(self, rho: ArrayLike) -> NDArray:
        rho = np.asarray(rho, dtype = float)
        return self.coefficient * self.gamma * np.power(rho, self.gamma - 1)

    """ Private Methods """

    def _helmholtz(self, rho: NDArray) -> NDArray:
        if self.gamma == 1:
            return self.coefficient * rho * np.log(rho)
        return (
            self.coefficient
            * (np.power(rho, self.gamma) - rho)
            / (self.gamma - 1))

    def _helmholtz_derivative(self, rho: NDArray) -> NDArray:
        if self.gamma == 1:
            return self.coefficient * (np.log(rho) + 1.0)
        return (
            self.coefficient
            * (self.gamma * np.power(rho, self.gamma - 1) - 1.0)
            / (self.gamma - 1))


@dataclasses.dataclass
class Tabulated(PressureLaw):
    """C² pressure law given by callables or by a density/pressure table.

    A table is interpolated by a cubic spline through the origin. H has no
    closed form and is integrated adaptively from the anchor H(1) = 0.

    Args:
        pressure_function (Optional[Callable]): p as a vectorized callable.
        derivative_function (Optional[Callable]): p′ as a vectorized callable.
        densities (Optional[Sequence[float]]): table abscissae.
        pressures (Optional[Sequence[float]]): table values.
        tolerance (float): relative tolerance of the quadrature. Defaults to
            1e-12.

    """
    pressure_function: Optional[Callable[[NDArray], NDArray]] = None
    derivative_function: Optional[Callable[[NDArray], NDArray]] = None
    densities: Optional[Sequence[float]] = None
    pressures: Optional[Sequence[float]] = None
    tolerance: float = 1e-12
    _integral: Callable[[float], float] = dataclasses.field(
        init = False, repr = False, compare = False)

    """ Initialization Methods """

    def __post_init__(self) -> None:
        """Initializes and validates an instance."""
        self.gamma = float(self.gamma)
        if self.pressure_function is None:
            self._fit_table()
        if self.derivative_function is None:
            raise ValueError('a tabulated law needs p′ or a table')
        self._integral = functools.lru_cache(maxsize = 4096)(self._quadrature)
        self.validate()

    """ Public Methods """

    def pressure(self, rho: ArrayLike) -> NDArray:
        return np.asarray(
            self.pressure_function(np.asarray(rho, dtype = float)))

    def derivative(self, rho: ArrayLike) -> NDArray:
        return np.asarray(
            self.derivative_function(np.asarray(rho, dtype = float)))

    """ Private Methods """

    def _fit_table(self) -> None:
        if self.densities is None or self.pressures is None:
            raise ValueError('a tabulated law needs p or a table')
        densities = np.asarray(self.densities, dtype = float)
        pressures = np.asarray(self.pressures, dtype = float)
        if densities[0] > 0:
            densities = np.concatenate([[0.0], densities])
            pressures = np.concatenate([[0.0], pressures])
        spline = interpolate.CubicSpline(densities, pressures)
        self.pressure_function = spline
        self.derivative_function = spline.derivative()
        return

    def _quadrature(self, rho: float) -> float:
        """Returns ∫₁^ϱ p(z)/z² dz."""
        value, _ = integrate.quad(
            lambda z: float(self.pressure(z)) / z**2,
            1.0,
            rho,
            epsabs = 0.0,
            epsrel = self.tolerance,
            limit = 200)
        return value

    def _helmholtz(self, rho: NDArray) -> NDArray:
        flat = [
            0.0 if value == 0 else value * self._integral(float(value))
            for value in np.ravel(rho)]
        return np.reshape(flat, np.shape(rho))

    def _helmholtz_derivative(self, rho: NDArray) -> NDArray:
        flat = [
            self._integral(float(value)) + float(self.pressure(value)) / value
            for value in np.ravel(rho)]
        return np.reshape(flat, np.shape(rho))


@dataclasses.dataclass
class DensitySplit(object):
    """Essential and residual cells of a density field.

    Args:
        essential (NDArray): boolean mask of cells with ϱ in [r̲/2, 2r̄].
        residual (NDArray): complement of 'essential'.
        residual_measure (float): total area of residual cells.
        residual_mass (float): Σ over residual cells of |K|ϱ^γ.
        essential_distance (float): Σ over essential cells of |K|(ϱ − r)².

    """
    essential: NDArray
    residual: NDArray
    residual_measure: float
    residual_mass: float
    essential_distance: float


def helmholtz_H(rho: ArrayLike, law: PressureLaw) -> float | NDArray:
    """Returns H(ϱ) = ϱ∫₁^ϱ p(z)/z² dz for 'law'."""
    return law.helmholtz(rho)

def bregman_E(
    rho: ArrayLike,
    r: ArrayLike,
    law: PressureLaw) -> float | NDArray:
    """Returns E(ϱ|r) = H(ϱ) − H′(r)(ϱ − r) − H(r) for 'law'."""
    return law.bregman(rho, r)

def relative_energy(
    state: scheme.State,
    r: spaces.ScalarCellField,
    U: spaces.CRVectorField | spaces.ScalarCellField,
    law: PressureLaw) -> float:
    """Returns Σ_K |K|(½ϱ_K|u_K − U_K|² + E(ϱ_K|r_K)).

    Args:
        state (scheme.State): discrete density and velocity.
        r (spaces.ScalarCellField): reference density.
        U (spaces.CRVectorField | spaces.ScalarCellField): reference velocity
            or its cell means.
        law (PressureLaw): equation of state.

    """
    mesh = state.rho.mesh
    means = spaces.cell_average(U).values
    kinetic = 0.5 * state.rho.values * np.sum(
        (state.u.cell_means - means)**2, axis = 1)
    energy = kinetic + law.bregman(state.rho.values, r.values)
    return float(np.sum(mesh.cell_measures * energy))

def essential_residual_split(
    rho: spaces.ScalarCellField,
    rbar_low: float,
    rbar_high: float,
    gamma: float = 2.0,
    reference: Optional[spaces.ScalarCellField | float] = None
    ) -> DensitySplit:
    """Splits cells into essential and residual ones.

    Args:
        rho (spaces.ScalarCellField): density.
        rbar_low (float): lower bound r̲ of the reference density.
        rbar_high (float): upper bound r̄ of the reference density.
        gamma (float): exponent of the residual mass. Defaults to 2.0.
        reference (Optional[spaces.ScalarCellField | float]): reference
            density r. Defaults to None, which measures the distance to the
            interval [r̲, r̄].

    Raises:
        ValueError: unless 0 < rbar_low <= rbar_high.

    """
    if not 0 < rbar_low <= rbar_high:
        raise ValueError(
            f'bounds must satisfy 0 < low <= high, not {rbar_low} and '
            f'{rbar_high}')
    values = rho.values
    measures = rho.mesh.cell_measures
    essential = (values >= 0.5 * rbar_low) & (values <= 2.0 * rbar_high)
    residual = ~essential
    if reference is None:
        target = np.clip(values, rbar_low, rbar_high)
    elif isinstance(reference, spaces.ScalarCellField):
        target = reference.values
    else:
        target = np.full_like(values, float(reference))
    return DensitySplit(
        essential = essential,
        residual = residual,
        residual_measure = float(measures[residual].sum()),
        residual_mass = float(
            np.sum(measures[residual] * values[residual]**gamma)),
        essential_distance = float(np.sum(
            measures[essential] * (values[essential] - target[essential])**2)))

def coercivity_constant(
    law: PressureLaw,
    rbar_low: float,
    rbar_high: float,
    densities: Optional[ArrayLike] = None,
    references: Optional[ArrayLike] = None) -> float:
    """Returns the smallest sampled ratio of E(ϱ|r) to the split weight.

    The weight is 1 + ϱ^γ on residual densities and (ϱ − r)² on essential
    ones. Samples with a zero weight are skipped.

    Args:
        law (PressureLaw): equation of state.
        rbar_low (float): lower bound of the references.
        rbar_high (float): upper bound of the references.
        densities (Optional[ArrayLike]): sampled densities. Defaults to a log
            grid over [1e-3, 1e3].
        references (Optional[ArrayLike]): sampled references. Defaults to a
            grid over [rbar_low, rbar_high].

    """
    if densities is None:
        densities = np.geomspace(1e-3, 1e3, 301)
    if references is None:
        references = np.linspace(rbar_low, rbar_high, 11)
    rho, r = np.meshgrid(
        np.asarray(densities, dtype = float),
        np.asarray(references, dtype = float))
    essential = (rho >= 0.5 * rbar_low) & (rho <= 2.0 * rbar_high)
    weight = np.where(essential, (rho - r)**2, 1.0 + rho**law.gamma)
    usable = weight > 0
    ratios = law.bregman(rho[usable], r[usable]) / weight[usable]
    return float(ratios.min())

def convergence_exponent(gamma: float) -> float:
    """Returns A = (2γ − 2)/γ for γ in (1, 2] and 1 for γ > 2."""
    if gamma <= 1:
        raise ValueError(f'the error estimate needs gamma > 1, not {gamma}')
    return min(1.0, (2.0 * gamma - 2.0) / gamma)
