"""
laboratory: numerical probes of discrete functional inequalities
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
    ProbeReport (object): per-level constants of one inequality.
    SobolevVh (resources.Probe): ‖v‖_{L^q} against |v|_{V²_h}.
    JumpBound (resources.Probe): face jumps against |v|²_{V²_h}.
    NormEquivalence (resources.Probe): discrete face norm against ‖v‖_{L^p}.
    ProjectionOrders (resources.Probe): interpolation errors and stability of
        the face-mean projection.
    Poincare (resources.Probe): ‖v − v̂‖_{L^p} against h‖∇_h v‖_{L^p}.
    random_fields: random velocity fields for sampling.
    probe_sobolev_Vh, probe_jump_bound, probe_norm_equivalence,
        probe_projection_orders, probe_poincare: run one probe.
    probe_all: runs every probe.

A probe is h-uniform when the log-log slope of its largest observed ratio
against h stays inside a band around zero.

To Do:


"""
from __future__ import annotations
import collections
from collections.abc import Callable
import dataclasses
import logging
from typing import Any, ClassVar, Optional

import numpy as np
from numpy.typing import NDArray
import pandas as pd

from ..core import framework
from ..core import mesh as meshes
from ..core import resources
from ..core import spaces
from . import diagnostics


_LOGGER = logging.getLogger(__name__)

Measure = Callable[[meshes.Mesh, np.random.Generator], NDArray]


@dataclasses.dataclass
class ProbeReport(object):
    """Per-level constants of one discrete inequality.

    Args:
        name (str): key of the probe.
        levels (list[int]): refinement level indices.
        h (list[float]): mesh sizes.
        theta (list[float]): mesh regularities.
        max_ratio (list[float]): largest observed ratio per level.
        samples (int): samples per level.
        min_ratio (Optional[list[float]]): smallest observed ratio per level,
            kept by two-sided probes.
        orders (dict[str, float]): fitted convergence orders, kept by the
            projection probe.
        expected (dict[str, float]): orders the fitted ones should reach.
        bounds (dict[str, list[float]]): first-order error constants per
            level, kept by the projection probe.
        needle (bool): whether the meshes were degenerate needles.

    """
    name: str
    levels: list[int]
    h: list[float]
    theta: list[float]
    max_ratio: list[float]
    samples: int
    min_ratio: Optional[list[float]] = None
    orders: dict[str, float] = dataclasses.field(default_factory = dict)
    expected: dict[str, float] = dataclasses.field(default_factory = dict)
    bounds: dict[str, list[float]] = dataclasses.field(default_factory = dict)
    needle: bool = False

    """ Public Methods """

    def within_band(self, band: float = 0.15) -> bool:
        """Returns whether ratios are finite and every slope is within band."""
        if not np.all(np.isfinite(self.max_ratio)):
            return False
        slopes = [self.slope]
        if self.min_ratio is not None:
            if not np.all(np.isfinite(self.min_ratio)):
                return False
            slopes.append(self.min_slope)
        return all(abs(slope) <= band for slope in slopes)

    def orders_within(
        self,
        expected: dict[str, float],
        tolerance: float = 0.2) -> bool:
        """Returns whether each fitted order is within tolerance of expected."""
        return all(
            abs(self.orders.get(key, np.nan) - value) <= tolerance
            for key, value in expected.items())

    def to_frame(self) -> pd.DataFrame:
        """Returns one row per level: level, h, theta, max_ratio.

        Two-sided probes add min_ratio and the projection probe adds one
        column per first-order constant.

        """
        frame = pd.DataFrame({
            'level': self.levels,
            'h': self.h,
            'theta': self.theta,
            'max_ratio': self.max_ratio})
        if self.min_ratio is not None:
            frame['min_ratio'] = self.min_ratio
        for key, values in self.bounds.items():
            frame[f'{key}_bound'] = values
        return frame

    """ Properties """

    @property
    def slope(self) -> float:
        """Returns the log-log slope of 'max_ratio' against h."""
        return diagnostics.fit_order(self.h, self.max_ratio)

    @property
    def min_slope(self) -> float:
        return diagnostics.fit_order(self.h, self.min_ratio)

    @property
    def flagged(self) -> bool:
        """Returns whether a needle run shows constant blow-up."""
        return self.needle and not self.within_band()


@dataclasses.dataclass
class SobolevVh(resources.Probe):
    """Largest ‖v‖_{L^q}/|v|_{V²_h} over random fields.

    Args:
        exponent (float): target exponent q. Defaults to 4.0.
        smooth (bool): whether to sample smooth modes; plain noise gives
            ratios of order h. Defaults to True.

    """
    exponent: float = 4.0
    smooth: bool = True

    def run(self) -> ProbeReport:
        return survey(self, self.ratios)

    def ratios(self, mesh: meshes.Mesh, rng: np.random.Generator) -> NDArray:
        return np.array([
            spaces.lp_norm(field, p = self.exponent) / spaces.broken_norm(field)
            for field in _fields(mesh, rng, self.samples, self.smooth)])


@dataclasses.dataclass
class JumpBound(resources.Probe):
    """Largest Σ_σ (1/h)∫_σ|[v]|² / |v|²_{V²_h} over random fields."""

    def run(self) -> ProbeReport:
        return survey(self, self.ratios)

    def ratios(self, mesh: meshes.Mesh, rng: np.random.Generator) -> NDArray:
        return np.array([
            spaces.face_jump_mean_square(field) / spaces.broken_norm(field)**2
            for field in _fields(mesh, rng, self.samples, self.smooth)])


@dataclasses.dataclass
class NormEquivalence(resources.Probe):
    """Two-sided ratios of (Σ|σ|h|v_σ|^p)^{1/p} to ‖v‖_{L^p}.

    Args:
        exponent (float): Lebesgue exponent p. Defaults to 2.0.

    """
    exponent: float = 2.0
    two_sided: ClassVar[bool] = True

    def run(self) -> ProbeReport:
        return survey(self, self.ratios)

    def ratios(self, mesh: meshes.Mesh, rng: np.random.Generator) -> NDArray:
        return np.array([
            spaces.discrete_lp_norm(field, p = self.exponent)
            / spaces.lp_norm(field, p = self.exponent)
            for field in _fields(mesh, rng, self.samples, self.smooth)])


@dataclasses.dataclass
class ProjectionOrders(resources.Probe):
    """Errors and stability of the face-mean projection of smooth fields.

    The ratio is |v_h|_{V^p_h}/‖∇v‖_{L^p}; the orders are fitted to
    ‖v − v_h‖_{L^p} and ‖∇v − ∇_h v_h‖_{L^p}. By default two fields on the
    bounding box of the mesh are measured: sin(πs) sin(πt)(1, 1) and the
    non-separable s(1 − s)t(1 − t)(1 + st)(1, 1), in box coordinates s, t.
    The first-order constants ‖v − v_h‖/(h‖∇v‖) and ‖∇v − ∇_h v_h‖/‖∇v‖
    of the first field are kept per level in 'bounds'.

    Args:
        exponent (float): Lebesgue exponent p. Defaults to 2.0.
        field (Optional[Callable]): analytic field, vanishing on the
            boundary, replacing both defaults. Defaults to None.
        gradient (Optional[Callable]): its gradient, shaped (..., 2, 2).
            Defaults to None.

    """
    exponent: float = 2.0
    field: Optional[Callable[[NDArray], NDArray]] = None
    gradient: Optional[Callable[[NDArray], NDArray]] = None

    def run(self) -> ProbeReport:
        errors: dict[str, list[float]] = collections.defaultdict(list)
        bounds: dict[str, list[float]] = collections.defaultdict(list)

        def measure(mesh: meshes.Mesh, _: np.random.Generator) -> NDArray:
            ratio = None
            for suffix, (field, gradient) in self._pairs(mesh).items():
                projection = spaces.cr_interpolate(field, mesh)
                value = spaces.lp_norm(
                    projection, p = self.exponent, reference = field)
                slope = spaces.gradient_error(
                    gradient, projection, p = self.exponent)
                exact = spaces.gradient_error(
                    gradient,
                    spaces.CRVectorField.zeros(mesh),
                    p = self.exponent)
                errors[f'value{suffix}'].append(value)
                errors[f'gradient{suffix}'].append(slope)
                if ratio is None:
                    bounds['value'].append(value / (mesh.h * exact))
                    bounds['gradient'].append(slope / exact)
                    ratio = spaces.broken_norm(
                        projection, p = self.exponent) / exact
            return np.array([ratio])

        report = survey(self, measure)
        report.orders = {
            key: diagnostics.fit_order(report.h, values)
            for key, values in errors.items()}
        report.bounds = dict(bounds)
        report.expected = {
            key: 2.0 if key.startswith('value') else 1.0
            for key in report.orders}
        return report

    def _pairs(self, mesh: meshes.Mesh) -> dict[str, tuple[Callable, Callable]]:
        if self.field is not None and self.gradient is not None:
            return {'': (self.field, self.gradient)}
        (x0, y0), (lx, ly) = _box(mesh)

        def unit(x: NDArray) -> tuple[NDArray, NDArray]:
            return (x[..., 0] - x0) / lx, (x[..., 1] - y0) / ly

        def bump(x: NDArray) -> NDArray:
            s, t = unit(x)
            values = np.sin(np.pi * s) * np.sin(np.pi * t)
            return np.stack([values, values], axis = -1)

        def bump_gradient(x: NDArray) -> NDArray:
            s, t = unit(x)
            row = np.stack([
                np.pi / lx * np.cos(np.pi * s) * np.sin(np.pi * t),
                np.pi / ly * np.sin(np.pi * s) * np.cos(np.pi * t)],
                axis = -1)
            return np.stack([row, row], axis = -2)

        def product(x: NDArray) -> NDArray:
            s, t = unit(x)
            values = s * (1 - s) * t * (1 - t) * (1 + s * t)
            return np.stack([values, values], axis = -1)

        def product_gradient(x: NDArray) -> NDArray:
            s, t = unit(x)
            p, q, r = s * (1 - s), t * (1 - t), 1 + s * t
            row = np.stack([
                ((1 - 2 * s) * q * r + p * q * t) / lx,
                (p * (1 - 2 * t) * r + p * q * s) / ly],
                axis = -1)
            return np.stack([row, row], axis = -2)

        return {
            '': (bump, bump_gradient),
            '_nonseparable': (product, product_gradient)}


@dataclasses.dataclass
class Poincare(resources.Probe):
    """Largest ‖v − v̂‖_{L^p}/(h‖∇_h v‖_{L^p}) over random fields.

    Args:
        exponent (float): Lebesgue exponent p. Defaults to 2.0.

    """
    exponent: float = 2.0

    def run(self) -> ProbeReport:
        return survey(self, self.ratios)

    def ratios(self, mesh: meshes.Mesh, rng: np.random.Generator) -> NDArray:
        values = []
        for field in _fields(mesh, rng, self.samples, self.smooth):
            means = spaces.cell_average(field)
            values.append(
                spaces.lp_norm(field, p = self.exponent, reference = means)
                / (mesh.h * spaces.broken_norm(field, p = self.exponent)))
        return np.array(values)


PROBES: tuple[str, ...] = (
    'sobolev_vh',
    'jump_bound',
    'norm_equivalence',
    'projection_orders',
    'poincare')


def survey(
    probe: resources.Probe,
    measure: Measure) -> ProbeReport:
    """Runs 'measure' on every mesh of 'probe' and gathers a ProbeReport.

    Every level gets a fresh generator from 'probe.generator()', so the
    random coefficients of the smooth modes agree across levels.

    """
    levels, hs, thetas, highs, lows = [], [], [], [], []
    for level, mesh in enumerate(probe.meshes()):
        ratios = np.asarray(
            measure(mesh, probe.generator()),
            dtype = float)
        ratios = ratios[np.isfinite(ratios)]
        levels.append(level)
        hs.append(mesh.h)
        thetas.append(meshes.quality(mesh).theta)
        highs.append(float(ratios.max()) if ratios.size else np.nan)
        lows.append(float(ratios.min()) if ratios.size else np.nan)
        _LOGGER.debug(
            '%s level %d: h %.4f, ratios in [%.4g, %.4g]',
            probe.key, level, mesh.h, lows[-1], highs[-1])
    report = ProbeReport(
        name = probe.key,
        levels = levels,
        h = hs,
        theta = thetas,
        max_ratio = highs,
        samples = probe.samples,
        min_ratio = lows if getattr(probe, 'two_sided', False) else None,
        needle = probe.needle)
    if report.flagged:
        _LOGGER.warning(
            '%s on needle meshes: constant trend slope %.3f', report.name,
            report.slope)
    return report

def random_fields(
    mesh: meshes.Mesh,
    rng: np.random.Generator,
    samples: int,
    smooth: bool = False,
    modes: int = 2) -> NDArray:
    """Returns (samples, n_dofs, 2) random velocity unknowns.

    By default every unknown is drawn independently from the standard
    normal distribution. With 'smooth', each sample is instead the
    projection of a random combination of the first 'modes'² sine modes of
    the bounding box plus standard-normal noise of size h.

    """
    if not smooth:
        return rng.standard_normal((samples, mesh.n_dofs, 2))
    (x0, y0), (lx, ly) = _box(mesh)
    basis = []
    for k in range(1, modes + 1):
        for l in range(1, modes + 1):
            means = spaces.face_means(
                lambda x, k = k, l = l: (
                    np.sin(k * np.pi * (x[..., 0] - x0) / lx)
                    * np.sin(l * np.pi * (x[..., 1] - y0) / ly)),
                mesh)
            basis.append(means[mesh.internal_faces])
    basis = np.array(basis)
    weights = rng.standard_normal((samples, basis.shape[0], 2))
    modal = np.einsum('smk,md->sdk', weights, basis)
    noise = mesh.h * rng.standard_normal((samples, mesh.n_dofs, 2))
    return modal + noise

def probe_sobolev_Vh(
    levels: int = 4,
    samples: int = 50,
    **kwargs: Any) -> ProbeReport:
    """Runs the Sobolev probe."""
    return _probe('sobolev_vh', levels, samples, **kwargs)

def probe_jump_bound(
    levels: int = 4,
    samples: int = 50,
    **kwargs: Any) -> ProbeReport:
    """Runs the face-jump probe."""
    return _probe('jump_bound', levels, samples, **kwargs)

def probe_norm_equivalence(
    levels: int = 4,
    samples: int = 50,
    **kwargs: Any) -> ProbeReport:
    """Runs the norm-equivalence probe."""
    return _probe('norm_equivalence', levels, samples, **kwargs)

def probe_projection_orders(levels: int = 4, **kwargs: Any) -> ProbeReport:
    """Runs the projection probe."""
    return _probe('projection_orders', levels, 1, **kwargs)

def probe_poincare(
    levels: int = 4,
    samples: int = 50,
    **kwargs: Any) -> ProbeReport:
    """Runs the Poincaré probe."""
    return _probe('poincare', levels, samples, **kwargs)

def probe_all(
    levels: int = 4,
    samples: int = 50,
    seed: int = 0,
    exponent: float = 2.0,
    sobolev_exponent: float = 4.0,
    **kwargs: Any) -> dict[str, ProbeReport]:
    """Runs every probe with one seed and returns reports by probe key.

    The Sobolev probe uses 'sobolev_exponent' as its target exponent; the
    other probes use 'exponent'.

    """
    reports = {}
    for key in PROBES:
        power = sobolev_exponent if key == 'sobolev_vh' else exponent
        reports[key] = _probe(
            key, levels, samples, seed = seed, exponent = power, **kwargs)
    return reports

def _probe(key: str, levels: int, samples: int, **kwargs: Any) -> ProbeReport:
    probe = framework.Resources.probe[key].create(
        levels = levels, samples = samples, **kwargs)
    return probe.run()

def _fields(
    mesh: meshes.Mesh,
    rng: np.random.Generator,
    samples: int,
    smooth: bool = False) -> list[spaces.CRVectorField]:
    return [
        spaces.CRVectorField(mesh = mesh, dofs = dofs)
        for dofs in random_fields(mesh, rng, samples, smooth = smooth)]

def _box(mesh: meshes.Mesh) -> tuple[NDArray, NDArray]:
    low = mesh.vertices.min(axis = 0)
    return low, mesh.vertices.max(axis = 0) - low
