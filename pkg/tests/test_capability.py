# Unit tests for capability module
"""Tests for installation checks."""

import pytest
from pathlib import Path

import sys
sys.path.insert(0, str(Path(__file__).parent.parent))

from common import capability
from common.capability import REQUIRED_PACKAGES, _version_tuple, get_package_version, validate_installation


class TestVersionTuple:
    """Tests for _version_tuple."""

    def test_plain(self):
        """Test dotted numeric versions."""
        assert _version_tuple('1.22.4') == (1, 22, 4)

    def test_suffix(self):
        """Test that pre-release suffixes are dropped."""
        assert _version_tuple('1.11rc1') == (1, 11)
        assert _version_tuple('2.0.dev') == (2, 0)

    def test_ordering(self):
        """Test comparison against a minimum."""
        assert _version_tuple('1.8.1') >= _version_tuple('1.8')
        assert _version_tuple('1.7') < _version_tuple('1.8')


class TestGetPackageVersion:
    """Tests for get_package_version."""

    def test_installed(self):
        """Test that an installed distribution reports a version."""
        assert get_package_version('pytest')

    def test_missing(self):
        """Test that an absent distribution gives None."""
        assert get_package_version('symtop-no-such-dist') is None


class TestValidateInstallation:
    """Tests for validate_installation."""

    def test_keys(self):
        """Test the reported fields."""
        result = validate_installation()
        assert set(result['packages']) == set(REQUIRED_PACKAGES)
        assert result['cpu_count'] >= 1
        assert result['workers'] >= 1
        assert isinstance(result['errors'], list)

    def test_missing_package(self, monkeypatch):
        """Test that a missing package fails validation."""
        monkeypatch.setattr(capability, 'get_package_version', lambda name: None if name == 'sympy' else '99.0')
        result = validate_installation()
        assert not result['packages_ok']
        assert "sympy is not installed" in result['errors']

    def test_old_package(self, monkeypatch):
        """Test that an outdated package fails validation."""
        monkeypatch.setattr(capability, 'get_package_version', lambda name: '1.0' if name == 'numpy' else '99.0')
        result = validate_installation()
        assert not result['packages_ok']
        assert any(err.startswith("numpy 1.0") for err in result['errors'])


if __name__ == '__main__':
    pytest.main([__file__, '-v'])
