"""
export: functions to export meshes, fields and ledgers to other formats
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
    to_vtk: converts a mesh and fields to a legacy-VTK ASCII str.
    write_vtk: writes a legacy-VTK ASCII file.
    write_csv: writes a DataFrame with a fixed float format.
    write_json: writes a summary dict as sorted JSON.

To Do:


"""
from __future__ import annotations
from collections.abc import Mapping
import json
import logging
import pathlib
from typing import Any, Optional

import numpy as np
import pandas as pd

from ..core import mesh as meshes
from ..core import spaces


_LOGGER = logging.getLogger(__name__)
_LINE_BREAK = '\n'
_FLOAT_FORMAT = '%.12e'
_TRIANGLE = 5

def to_vtk(
    mesh: meshes.Mesh,
    cell_data: Optional[Mapping[str, Any]] = None,
    velocity: Optional[spaces.CRVectorField] = None,
    title: Optional[str] = None) -> str:
    """Converts 'mesh' and fields on it to a legacy-VTK unstructured grid.

    Without 'velocity' the grid uses the mesh vertices. With it, each cell
    gets its own three points so the cell-wise affine velocity is written
    as point data without averaging across faces.

    Args:
        mesh (meshes.Mesh): mesh to convert.
        cell_data (Optional[Mapping[str, Any]]): named cell fields, each a
            ScalarCellField or an array of shape (n_cells,) or (n_cells, 2).
            Defaults to None.
        velocity (Optional[spaces.CRVectorField]): velocity to sample at the
            cell vertices. Defaults to None.
        title (Optional[str]): header line. Defaults to None.

    Returns:
        str: mesh and fields in legacy-VTK ASCII format.

    """
    title = title or 'relentless'
    if velocity is None:
        points = mesh.vertices
        connectivity = mesh.cells
    else:
        points = mesh.vertices[mesh.cells].reshape(-1, 2)
        connectivity = np.arange(3 * mesh.n_cells).reshape(-1, 3)
    lines = [
        '# vtk DataFile Version 3.0',
        title.replace(_LINE_BREAK, ' '),
        'ASCII',
        'DATASET UNSTRUCTURED_GRID',
        f'POINTS {len(points)} double']
    lines.extend(f'{x:.12e} {y:.12e} 0.0' for x, y in points)
    lines.append(f'CELLS {mesh.n_cells} {4 * mesh.n_cells}')
    lines.extend(f'3 {a} {b} {c}' for a, b, c in connectivity)
    lines.append(f'CELL_TYPES {mesh.n_cells}')
    lines.extend([str(_TRIANGLE)] * mesh.n_cells)
    if cell_data:
        lines.append(f'CELL_DATA {mesh.n_cells}')
        for name, values in cell_data.items():
            lines.extend(_data_lines(name, _cell_values(values, mesh)))
    if velocity is not None:
        values = velocity.at(np.eye(3)).reshape(-1, 2)
        lines.append(f'POINT_DATA {len(points)}')
        lines.extend(_data_lines('velocity', values))
    return _LINE_BREAK.join(lines) + _LINE_BREAK

def write_vtk(
    path: str | pathlib.Path,
    mesh: meshes.Mesh,
    cell_data: Optional[Mapping[str, Any]] = None,
    velocity: Optional[spaces.CRVectorField] = None,
    title: Optional[str] = None) -> pathlib.Path:
    """Writes 'mesh' and fields on it to 'path' and returns the path."""
    path = pathlib.Path(path)
    path.write_text(to_vtk(
        mesh,
        cell_data = cell_data,
        velocity = velocity,
        title = title))
    _LOGGER.debug('wrote %s', path)
    return path

def write_csv(frame: pd.DataFrame, path: str | pathlib.Path) -> pathlib.Path:
    """Writes 'frame' without its index and with a fixed float format."""
    path = pathlib.Path(path)
    frame.to_csv(path, index = False, float_format = _FLOAT_FORMAT)
    _LOGGER.info('wrote %s', path)
    return path

def write_json(
    summary: Mapping[str, Any],
    path: str | pathlib.Path) -> pathlib.Path:
    """Writes 'summary' as indented JSON with sorted keys."""
    path = pathlib.Path(path)
    with open(path, 'w') as a_file:
        json.dump(
            summary,
            a_file,
            indent = 2,
            sort_keys = True,
            default = _jsonify)
    _LOGGER.info('wrote %s', path)
    return path

def _cell_values(values: Any, mesh: meshes.Mesh) -> np.ndarray:
    if isinstance(values, spaces.ScalarCellField):
        values = values.values
    values = np.asarray(values, dtype = float)
    if values.shape[0] != mesh.n_cells:
        raise ValueError(
            f'cell data needs {mesh.n_cells} rows, not {values.shape[0]}')
    return values

def _data_lines(name: str, values: np.ndarray) -> list[str]:
    if values.ndim == 1:
        lines = [f'SCALARS {name} double 1', 'LOOKUP_TABLE default']
        lines.extend(f'{value:.12e}' for value in values)
    else:
        lines = [f'VECTORS {name} double']
        lines.extend(f'{x:.12e} {y:.12e} 0.0' for x, y in values)
    return lines

def _jsonify(item: Any) -> Any:
    if isinstance(item, np.generic):
        return item.item()
    elif isinstance(item, np.ndarray):
        return item.tolist()
    elif isinstance(item, pathlib.Path):
        return str(item)
    raise TypeError(f'{type(item).__name__} is not JSON serializable')
