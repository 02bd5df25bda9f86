# Utility functions
"""Deterministic JSON reports and CSV exports."""

import csv
import dataclasses
import json
import math
from fractions import Fraction
from pathlib import Path
from typing import Any, Iterable, List, Optional, Sequence

import numpy as np

from . import __version__

MATRIX_FORMAT = 'symtop-matrix'
MATRIX_VERSION = 1


def to_plain(value: Any) -> Any:
    """
    Reduce a report value to JSON-compatible types.

    Complex numbers become [re, im]; objects with to_dict() and dataclasses
    are expanded; Fractions become "p/q" strings.
    """
    if hasattr(value, 'to_dict') and callable(value.to_dict):
        return to_plain(value.to_dict())
    if dataclasses.is_dataclass(value) and not isinstance(value, type):
        return to_plain(dataclasses.asdict(value))
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, (float, np.floating)):
        return float(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, Path):
        return value.as_posix()
    return value


def format_float(x: float, digits: int = 17) -> str:
    if math.isnan(x):
        return '"NaN"'
    if math.isinf(x):
        return '"Infinity"' if x > 0 else '"-Infinity"'
    text = format(x, f'.{digits}g')
    if 'e' in text and digits >= 17:
        # shortest mantissa that still round-trips
        text = repr(float(x))
    if 'e' not in text and '.' not in text and 'n' not in text:
        text += '.0'
    return text


def _encode(value: Any, digits: int, indent: int, level: int) -> str:
    pad = ' ' * (indent * (level + 1))
    close = ' ' * (indent * level)
    if value is None:
        return 'null'
    if value is True:
        return 'true'
    if value is False:
        return 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format_float(value, digits)
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=False)
    if isinstance(value, list):
        if not value:
            return '[]'
        if all(not isinstance(v, (list, dict)) for v in value):
            return '[' + ', '.join(_encode(v, digits, indent, level + 1) for v in value) + ']'
        items = (_encode(v, digits, indent, level + 1) for v in value)
        return '[\n' + ',\n'.join(pad + item for item in items) + '\n' + close + ']'
    if isinstance(value, dict):
        if not value:
            return '{}'
        items = (
            f"{_encode(key, digits, indent, level + 1)}: {_encode(value[key], digits, indent, level + 1)}"
            for key in sorted(value)
        )
        return '{\n' + ',\n'.join(pad + item for item in items) + '\n' + close + '}'
    raise TypeError(f"Cannot encode {type(value).__name__} in a report")


def dumps(obj: Any, digits: Optional[int] = None, indent: int = 2) -> str:
    """Canonical JSON text: sorted keys, floats at a fixed number of significant digits."""
    if digits is None:
        from .config import get_config
        digits = get_config().float_digits
    return _encode(to_plain(obj), digits, indent, 0) + '\n'


def dump_json(obj: Any, path: Path, digits: Optional[int] = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(dumps(obj, digits), encoding='utf-8')
    return path


def report_header(config, task: Optional[str] = None) -> dict:
    """Metadata embedded in every report."""
    return {
        'toolkit_version': __version__,
        'task': task or config.task,
        'config_hash': config.config_hash(),
        'tolerances': dict(sorted(config.tolerances.items())),
        'j_max': config.j_max,
        'seed': config.seed,
    }


def write_population_csv(path: Path, times: Sequence[float], labels: Sequence[str], populations: np.ndarray) -> Path:
    """Long-format population trace: t, index, population."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['t', 'index', 'population'])
        for t, row in zip(times, populations):
            for label, p in zip(labels, row):
                writer.writerow([format(float(t), '.17g'), label, format(float(p), '.17g')])
    return path


def write_series_csv(path: Path, times: Sequence[float], series: dict) -> Path:
    """Wide-format CSV with one column per named series."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    names = list(series)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['t', *names])
        for i, t in enumerate(times):
            writer.writerow([format(float(t), '.17g'), *(format(float(series[n][i]), '.17g') for n in names)])
    return path


def write_trajectory_csv(path: Path, times: Sequence[float], states: np.ndarray) -> Path:
    """Columns t, q0..q3, P1..P3 and the P3 drift from the first sample."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    states = np.asarray(states, dtype=float)
    with open(path, 'w', newline='', encoding='utf-8') as f:
        writer = csv.writer(f)
        writer.writerow(['t', 'q0', 'q1', 'q2', 'q3', 'P1', 'P2', 'P3', 'P3_drift'])
        for t, row in zip(times, states):
            values = [*row, row[6] - states[0, 6]]
            writer.writerow([format(float(v), '.17g') for v in (t, *values)])
    return path


def matrix_document(matrix: np.ndarray, labels: Optional[Iterable[str]] = None, name: str = '') -> dict:
    """Column-major [re, im] pairs with shape and labels."""
    matrix = np.asarray(matrix, dtype=complex)
    rows, cols = matrix.shape
    data: List[List[float]] = [[float(z.real), float(z.imag)] for z in matrix.flatten(order='F')]
    return {
        'format': MATRIX_FORMAT,
        'version': MATRIX_VERSION,
        'name': name,
        'shape': [rows, cols],
        'labels': list(labels) if labels is not None else [],
        'data': data,
    }


def write_matrix_json(path: Path, matrix: np.ndarray, labels: Optional[Iterable[str]] = None, name: str = '') -> Path:
    return dump_json(matrix_document(matrix, labels, name), path)
