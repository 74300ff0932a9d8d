"""
Artifact writers: CSV tables with '#' header comments, JSON documents and
gnuplot nonuniform matrices

Floats are written in their shortest round-trip form so identical runs give
byte-identical files. Every file is written to a temporary sibling and renamed
into place, so a failed run leaves no partial output behind.
"""
import json
import logging
import os
import tempfile
from typing import Iterable, Optional

import numpy as np
import pandas as pd

logger = logging.getLogger(__name__)

FORMATS = ('csv', 'json')


def format_float(value) -> str:
    return repr(float(value))


def _cell(value) -> str:
    if value is None:
        return ''
    if isinstance(value, (bool, np.bool_)):
        return 'true' if value else 'false'
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format_float(value)
    return str(value)


def _plain(value):
    """Convert numpy scalars/arrays to JSON-native values"""
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple, np.ndarray)):
        return [_plain(v) for v in value]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def atomic_write(path: str, text: str) -> None:
    """Write text to path via a temporary file in the same directory"""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(prefix='.ringwalk-', suffix='.tmp', dir=directory)
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    logger.info(f"Wrote {path}")


def _header(resolved: dict, meta: Optional[dict] = None) -> str:
    lines = [f"# config: {json.dumps(_plain(resolved), sort_keys=True)}"]
    for key, value in (meta or {}).items():
        lines.append(f"# {key}: {json.dumps(_plain(value), sort_keys=True)}")
    return '\n'.join(lines) + '\n'


def _json_document(resolved: dict, body: dict) -> str:
    document = {'config': _plain(resolved)}
    document.update(_plain(body))
    return json.dumps(document, indent=2, sort_keys=True) + '\n'


def records_frame(records: Iterable[dict], columns: list[str]) -> pd.DataFrame:
    """Build a string-formatted frame with a fixed column order"""
    rows = [{column: _cell(record.get(column)) for column in columns} for record in records]
    return pd.DataFrame(rows, columns=columns, dtype=object)


def write_records(
    path: str,
    records: list[dict],
    columns: list[str],
    resolved: dict,
    fmt: str = 'csv',
    meta: Optional[dict] = None,
) -> None:
    """Tabular artifact: one row per record"""
    if fmt == 'json':
        body = dict(meta or {})
        body['columns'] = columns
        body['records'] = [{column: record.get(column) for column in columns} for record in records]
        atomic_write(path, _json_document(resolved, body))
        return
    frame = records_frame(records, columns)
    atomic_write(path, _header(resolved, meta) + frame.to_csv(index=False, lineterminator='\n'))


def write_grid(path: str, grid, resolved: dict, fmt: str = 'csv', gnuplot: bool = False) -> None:
    """
    Sweep grid artifact

    CSV: first column holds axis1 values, one column per axis2 value.
    JSON: axes plus row-major values. gnuplot: nonuniform matrix (first row
    holds the column count and axis2 values, later rows start with the axis1
    value).
    """
    meta = {
        'axis1': grid.axis1_name,
        'axis2': grid.axis2_name,
        'metric': grid.metric,
        'fixed': grid.fixed,
    }
    if gnuplot:
        lines = [_header(resolved, meta).rstrip('\n')]
        lines.append(' '.join([str(len(grid.axis2_values))] + [format_float(v) for v in grid.axis2_values]))
        for value, row in zip(grid.axis1_values, grid.values):
            lines.append(' '.join([format_float(value)] + [format_float(v) for v in row]))
        atomic_write(path, '\n'.join(lines) + '\n')
        return
    if fmt == 'json':
        body = {
            'axis1': {'name': grid.axis1_name, 'values': grid.axis1_values},
            'axis2': {'name': grid.axis2_name, 'values': grid.axis2_values},
            'metric': grid.metric,
            'fixed': grid.fixed,
            'values': grid.values,
        }
        atomic_write(path, _json_document(resolved, body))
        return
    columns = [grid.axis1_name] + [f"{grid.axis2_name}={format_float(v)}" for v in grid.axis2_values]
    records = [
        dict(zip(columns, [value] + list(row)))
        for value, row in zip(grid.axis1_values, grid.values)
    ]
    frame = records_frame(records, columns)
    atomic_write(path, _header(resolved, meta) + frame.to_csv(index=False, lineterminator='\n'))


def read_table(path: str) -> pd.DataFrame:
    """Read a CSV artifact back, skipping '#' header lines"""
    return pd.read_csv(path, comment='#')


def read_header_config(path: str) -> dict:
    """Resolved config embedded in a CSV artifact"""
    with open(path, encoding='utf-8') as f:
        for line in f:
            if line.startswith('# config: '):
                return json.loads(line[len('# config: '):])
            if not line.startswith('#'):
                break
    return {}
