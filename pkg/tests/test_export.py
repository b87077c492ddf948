"""
test_export: tests VTK, CSV and JSON output
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


To Do:


"""
from __future__ import annotations
import json

import numpy as np
import pandas as pd
import pytest

import relentless


def test_to_vtk():
    mesh = relentless.structured_triangulation(2, 2)
    density = relentless.ScalarCellField.constant(mesh, 1.5)
    text = relentless.to_vtk(mesh, cell_data = {'density': density})
    lines = text.splitlines()
    assert lines[0] == '# vtk DataFile Version 3.0'
    assert 'POINTS 9 double' in lines
    assert 'CELLS 8 32' in lines
    assert 'CELL_DATA 8' in lines
    assert 'SCALARS density double 1' in lines
    velocity = relentless.CRVectorField.zeros(mesh)
    text = relentless.to_vtk(mesh, velocity = velocity, title = 'a\nb')
    lines = text.splitlines()
    assert lines[1] == 'a b'
    assert 'POINTS 24 double' in lines
    assert 'POINT_DATA 24' in lines
    assert 'VECTORS velocity double' in lines
    with pytest.raises(ValueError):
        relentless.to_vtk(mesh, cell_data = {'bad': np.ones(3)})
    return

def test_tables(tmp_path):
    frame = pd.DataFrame({'step': [0, 1], 'value': [0.5, 0.25]})
    path = relentless.write_csv(frame, tmp_path / 'table.csv')
    np.testing.assert_allclose(pd.read_csv(path)['value'], [0.5, 0.25])
    summary = {'b': np.float64(2.0), 'a': np.arange(2), 'path': tmp_path}
    path = relentless.write_json(summary, tmp_path / 'summary.json')
    loaded = json.loads(path.read_text())
    assert loaded == {'a': [0, 1], 'b': 2.0, 'path': str(tmp_path)}
    assert path.read_text().index('"a"') < path.read_text().index('"b"')
    return


if __name__ == '__main__':
    test_to_vtk()
