# Unit tests for utils module
"""Tests for deterministic reports and CSV exports."""

import csv
import json

import numpy as np
import pytest
from fractions import Fraction
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from common import __version__
from common.config import reference_config
from common.utils import (
    MATRIX_FORMAT,
    dump_json,
    dumps,
    format_float,
    matrix_document,
    report_header,
    to_plain,
    write_population_csv,
    write_series_csv,
    write_trajectory_csv,
)


def read_csv(path: Path) -> list:
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.reader(f))


class TestFormatFloat:
    """Tests for fixed-precision float formatting."""

    def test_seventeen_digits(self):
        """Test that 17 significant digits round-trip a double."""
        assert format_float(0.1) == '0.10000000000000001'
        assert float(format_float(1.0 / 3.0)) == 1.0 / 3.0

    def test_integral_value(self):
        """Test that integral floats keep a decimal point."""
        assert format_float(1.0) == '1.0'
        assert format_float(-2.0, 6) == '-2.0'

    def test_exponent(self):
        """Test that small values use exponent notation."""
        assert format_float(1e-20) == '1e-20'

    @pytest.mark.parametrize('x', [1e-20, 2.5e-300, 6.02e23, -1.2345678901234567e-30])
    def test_exponent_round_trip(self, x):
        """Test that exponent output is the shortest text that reads back exactly."""
        text = format_float(x)
        assert float(text) == x
        assert text == repr(x)

    def test_non_finite(self):
        """Test that non-finite values are quoted."""
        assert format_float(float('nan')) == '"NaN"'
        assert format_float(float('-inf')) == '"-Infinity"'


class TestToPlain:
    """Tests for report value reduction."""

    def test_complex_and_fraction(self):
        """Test complex numbers and fractions."""
        assert to_plain(1 + 2j) == [1.0, 2.0]
        assert to_plain(Fraction(1, 2)) == '1/2'

    def test_numpy_values(self):
        """Test numpy arrays and scalars."""
        assert to_plain(np.array([1, 2])) == [1, 2]
        assert to_plain(np.float64(0.5)) == 0.5
        assert to_plain(np.bool_(True)) is True

    def test_to_dict_objects(self):
        """Test that objects exposing to_dict are expanded."""
        class Item:
            def to_dict(self):
                return {'value': 3}

        assert to_plain({'item': Item()}) == {'item': {'value': 3}}


class TestDumps:
    """Tests for canonical JSON."""

    def test_sorted_keys(self):
        """Test that keys are sorted at every level."""
        text = dumps({'b': 1, 'a': {'d': 1.5, 'c': 2}}, digits=17)
        assert text.index('"a"') < text.index('"b"')
        assert text.index('"c"') < text.index('"d"')
        assert json.loads(text) == {'a': {'c': 2, 'd': 1.5}, 'b': 1}

    def test_deterministic(self):
        """Test that the same object gives identical text."""
        obj = {'x': [0.1, 0.2], 'y': {'z': 1 / 3}}
        assert dumps(obj, digits=17) == dumps(dict(reversed(list(obj.items()))), digits=17)

    def test_digits(self):
        """Test that the digit count is honoured."""
        assert json.loads(dumps({'x': 1 / 3}, digits=4))['x'] == 0.3333

    def test_unencodable(self):
        """Test that unknown objects are rejected."""
        with pytest.raises(TypeError):
            dumps({'x': object()}, digits=17)

    def test_dump_json_creates_parent(self, tmp_path):
        """Test that dump_json creates missing directories."""
        path = dump_json({'a': 1}, tmp_path / 'nested' / 'r.json', digits=17)
        assert path.exists()
        assert json.loads(path.read_text()) == {'a': 1}


class TestReportHeader:
    """Tests for report metadata."""

    def test_fields(self):
        """Test that every report carries version, hash, tolerances and seed."""
        config = reference_config()
        header = report_header(config)
        assert header['toolkit_version'] == __version__
        assert header['task'] == 'verify-quantum'
        assert header['config_hash'] == config.config_hash()
        assert header['j_max'] == 2
        assert header['seed'] == 0
        assert set(header['tolerances']) == {'rank', 'closure', 'unitarity'}


class TestMatrixDocument:
    """Tests for matrix exports."""

    def test_column_major(self):
        """Test [re, im] pairs in column-major order."""
        doc = matrix_document(np.array([[1, 2j], [3, 4]]), ['a', 'b'], name='M')
        assert doc['format'] == MATRIX_FORMAT
        assert doc['shape'] == [2, 2]
        assert doc['labels'] == ['a', 'b']
        assert doc['data'] == [[1.0, 0.0], [3.0, 0.0], [0.0, 2.0], [4.0, 0.0]]


class TestCsvExports:
    """Tests for CSV writers."""

    def test_population_long_format(self, tmp_path):
        """Test one row per time and label."""
        path = write_population_csv(
            tmp_path / 'p.csv', [0.0, 1.0], ['(0,0,0)', '(1,0,0)'], np.array([[1.0, 0.0], [0.5, 0.5]])
        )
        rows = read_csv(path)
        assert rows[0] == ['t', 'index', 'population']
        assert len(rows) == 5
        assert rows[3] == ['1', '(0,0,0)', '0.5']

    def test_series_wide_format(self, tmp_path):
        """Test one column per series."""
        path = write_series_csv(tmp_path / 's.csv', [0.0, 0.5], {'a': [1.0, 0.0], 'b': [0.0, 1.0]})
        rows = read_csv(path)
        assert rows[0] == ['t', 'a', 'b']
        assert rows[2] == ['0.5', '0', '1']

    def test_trajectory_drift_column(self, tmp_path):
        """Test the P3 drift relative to the first sample."""
        states = np.array([
            [1.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.3],
            [1.0, 0.0, 0.0, 0.0, 0.1, 0.2, 0.5],
        ])
        rows = read_csv(write_trajectory_csv(tmp_path / 't.csv', [0.0, 1.0], states))
        assert rows[0][-1] == 'P3_drift'
        assert float(rows[1][-1]) == 0.0
        assert float(rows[2][-1]) == pytest.approx(0.2)


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
