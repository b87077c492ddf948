"""
errors: exceptions raised by relentless
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
    RelentlessError: base class for every exception in the package.
    ConfigurationError
    NonConforming
    DegenerateCell
    DuplicateCell
    MeshQualityError
    QuadratureDegreeTooLow
    NegativeDensity
    NonPositiveReference
    NonPositiveReferenceField
    NonPositiveInitialDensity
    BoundaryFace
    LinearSolveFailure
    NonlinearDivergence
    InvariantGateFailure

To Do:


"""
from __future__ import annotations


class RelentlessError(Exception):
    """Base class for errors raised by relentless."""


class ConfigurationError(RelentlessError, ValueError):
    """Raised when experiment settings are missing or invalid."""


class NonConforming(RelentlessError, ValueError):
    """Raised when cells meet in anything but a vertex or a full face."""


class DegenerateCell(RelentlessError, ValueError):
    """Raised when a cell has zero area."""


class DuplicateCell(RelentlessError, ValueError):
    """Raised when two cells share the same three vertices."""


class MeshQualityError(RelentlessError, ValueError):
    """Raised when a mesh is less regular than the configured minimum."""


class QuadratureDegreeTooLow(RelentlessError, ValueError):
    """Raised when a quadrature rule cannot deliver the requested exactness."""


class NegativeDensity(RelentlessError, ValueError):
    """Raised when a density outside the admitted range reaches thermo."""


class NonPositiveReference(RelentlessError, ValueError):
    """Raised when a reference density is not strictly positive."""


class NonPositiveReferenceField(RelentlessError, ValueError):
    """Raised when a reference density field is not strictly positive."""


class NonPositiveInitialDensity(RelentlessError, ValueError):
    """Raised when initial density data is not strictly positive."""


class BoundaryFace(RelentlessError, KeyError):
    """Raised when an internal-face operation receives a boundary face."""


class LinearSolveFailure(RelentlessError, ArithmeticError):
    """Raised when a sparse linear solve fails or returns non-finite values."""


class NonlinearDivergence(RelentlessError, ArithmeticError):
    """Raised when Picard iteration does not reach its tolerance."""


class InvariantGateFailure(RelentlessError, AssertionError):
    """Raised when an experiment violates one of its invariant gates."""
