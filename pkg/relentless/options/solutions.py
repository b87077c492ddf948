"""
solutions: analytic initial data and manufactured strong solutions
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
    Rest (resources.Solution): constant density at rest, an exact solution
        of the unforced system.
    GaussianBump (resources.Solution): density bump at rest.
    Shock (resources.Solution): density step with a boundary-vanishing
        velocity.
    Drift (resources.Solution): smooth density carried by a boundary-vanishing
        stream.
    Vortex (resources.Solution): divergence-free vortex with a decaying
        density wave, manufactured on the unit square.

Every field is written for the unit square and vanishes on its boundary.

To Do:


"""
from __future__ import annotations
import dataclasses

import numpy as np
from numpy.typing import NDArray

from ..core import resources


@dataclasses.dataclass
class Rest(resources.Solution):
    """Constant density r = 'value' with U = 0."""
    value: float = 1.0
    manufactured = True

    def density(self, t: float, x: NDArray) -> NDArray:
        return np.full(np.shape(x)[:-1], self.value)

    def velocity(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x))

    def density_time(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x)[:-1])

    def density_gradient(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x))

    def velocity_time(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x))

    def velocity_gradient(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x) + (2,))

    def velocity_laplacian(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x))

    def velocity_grad_div(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x))


@dataclasses.dataclass
class GaussianBump(resources.Solution):
    """Density 1 + a·exp(−|x − c|²/(2w²)) at rest.

    Args:
        amplitude (float): height a of the bump. Defaults to 0.5.
        width (float): standard deviation w. Defaults to 0.1.
        center (tuple[float, float]): center c. Defaults to the middle of the
            unit square.

    """
    amplitude: float = 0.5
    width: float = 0.1
    center: tuple[float, float] = (0.5, 0.5)

    def density(self, t: float, x: NDArray) -> NDArray:
        offset = np.asarray(x) - np.asarray(self.center)
        return 1.0 + self.amplitude * np.exp(
            -np.sum(offset**2, axis = -1) / (2.0 * self.width**2))

    def velocity(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x))


@dataclasses.dataclass
class Shock(resources.Solution):
    """Density jump at x = 'position' with a horizontal boundary-vanishing jet.

    Args:
        left (float): density left of the jump. Defaults to 2.0.
        right (float): density right of the jump. Defaults to 0.5.
        position (float): abscissa of the jump. Defaults to 0.5.
        speed (float): peak speed of the jet. Defaults to 1.0.

    """
    left: float = 2.0
    right: float = 0.5
    position: float = 0.5
    speed: float = 1.0

    def density(self, t: float, x: NDArray) -> NDArray:
        x = np.asarray(x)
        return np.where(x[..., 0] < self.position, self.left, self.right)

    def velocity(self, t: float, x: NDArray) -> NDArray:
        x = np.asarray(x)
        profile = (
            self.speed
            * np.sin(np.pi * x[..., 0])
            * np.sin(np.pi * x[..., 1]))
        return np.stack([profile, np.zeros_like(profile)], axis = -1)


@dataclasses.dataclass
class Drift(resources.Solution):
    """Smooth density wave carried by a diagonal boundary-vanishing stream.

    Args:
        speed (float): peak speed. Defaults to 0.5.
        amplitude (float): amplitude of the density wave. Defaults to 0.2.

    """
    speed: float = 0.5
    amplitude: float = 0.2

    def density(self, t: float, x: NDArray) -> NDArray:
        x = np.asarray(x)
        return 1.0 + self.amplitude * np.cos(np.pi * x[..., 0]) * np.cos(
            np.pi * x[..., 1])

    def velocity(self, t: float, x: NDArray) -> NDArray:
        x = np.asarray(x)
        bubble = 16.0 * self.speed * (
            x[..., 0] * (1.0 - x[..., 0]) * x[..., 1] * (1.0 - x[..., 1]))
        return np.stack([bubble, bubble], axis = -1)


@dataclasses.dataclass
class Vortex(resources.Solution):
    """Manufactured pair on the unit square.

    U(t, x) = cos t · π(sin²(πx) sin(2πy), −sin(2πx) sin²(πy)) is
    divergence free and vanishes on the boundary, and
    r(t, x) = 1 + a·e^{−t} cos(πx) cos(πy) stays positive for a < 1.

    Args:
        amplitude (float): amplitude a of the density wave. Defaults to 0.25.

    """
    amplitude: float = 0.25
    manufactured = True

    """ Public Methods """

    def density(self, t: float, x: NDArray) -> NDArray:
        cx, cy = np.cos(np.pi * x[..., 0]), np.cos(np.pi * x[..., 1])
        return 1.0 + self.amplitude * np.exp(-t) * cx * cy

    def velocity(self, t: float, x: NDArray) -> NDArray:
        return np.cos(t) * self._shape(x)

    def density_time(self, t: float, x: NDArray) -> NDArray:
        cx, cy = np.cos(np.pi * x[..., 0]), np.cos(np.pi * x[..., 1])
        return -self.amplitude * np.exp(-t) * cx * cy

    def density_gradient(self, t: float, x: NDArray) -> NDArray:
        sx, sy = np.sin(np.pi * x[..., 0]), np.sin(np.pi * x[..., 1])
        cx, cy = np.cos(np.pi * x[..., 0]), np.cos(np.pi * x[..., 1])
        scale = -np.pi * self.amplitude * np.exp(-t)
        return np.stack([scale * sx * cy, scale * cx * sy], axis = -1)

    def velocity_time(self, t: float, x: NDArray) -> NDArray:
        return -np.sin(t) * self._shape(x)

    def velocity_gradient(self, t: float, x: NDArray) -> NDArray:
        sx, sy = np.sin(np.pi * x[..., 0]), np.sin(np.pi * x[..., 1])
        s2x, s2y = np.sin(2 * np.pi * x[..., 0]), np.sin(2 * np.pi * x[..., 1])
        c2x, c2y = np.cos(2 * np.pi * x[..., 0]), np.cos(2 * np.pi * x[..., 1])
        square = np.pi**2
        rows = [
            np.stack([square * s2x * s2y, 2 * square * sx**2 * c2y], axis = -1),
            np.stack([-2 * square * c2x * sy**2, -square * s2x * s2y], axis = -1)]
        return np.cos(t) * np.stack(rows, axis = -2)

    def velocity_laplacian(self, t: float, x: NDArray) -> NDArray:
        sx, sy = np.sin(np.pi * x[..., 0]), np.sin(np.pi * x[..., 1])
        s2x, s2y = np.sin(2 * np.pi * x[..., 0]), np.sin(2 * np.pi * x[..., 1])
        cube = 2 * np.pi**3
        return np.cos(t) * np.stack(
            [cube * s2y * (1 - 4 * sx**2), cube * s2x * (4 * sy**2 - 1)],
            axis = -1)

    def velocity_grad_div(self, t: float, x: NDArray) -> NDArray:
        return np.zeros(np.shape(x))

    """ Private Methods """

    def _shape(self, x: NDArray) -> NDArray:
        sx, sy = np.sin(np.pi * x[..., 0]), np.sin(np.pi * x[..., 1])
        s2x, s2y = np.sin(2 * np.pi * x[..., 0]), np.sin(2 * np.pi * x[..., 1])
        return np.pi * np.stack([sx**2 * s2y, -s2x * sy**2], axis = -1)
