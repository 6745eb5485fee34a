"""Tests for version information."""

import re

import pytest

from leolink import VERSION, __version__, get_version, get_version_info, version_info
from leolink._version import __version__ as version_module_version
from leolink.cli.main import create_parser
from leolink.cli.output import RunManifest


class TestVersionManagement:
    """Test version management."""

    def test_version_string_format(self):
        """Test the version string is major.minor.patch."""
        assert isinstance(__version__, str)
        assert re.match(r"^\d+\.\d+\.\d+$", __version__)

    def test_version_consistency(self):
        """Test every access path reports the same version."""
        assert __version__ == version_module_version
        assert get_version() == __version__
        assert __version__ == ".".join(str(v) for v in VERSION)

    def test_version_tuple(self):
        """Test the version tuple."""
        assert isinstance(VERSION, tuple)
        assert len(VERSION) == 3
        assert all(isinstance(v, int) for v in VERSION)
        assert version_info == VERSION
        assert get_version_info() == VERSION

    def test_cli_version_flag(self, capsys):
        """Test --version prints the package version."""
        with pytest.raises(SystemExit) as exc_info:
            create_parser().parse_args(["--version"])
        assert exc_info.value.code == 0
        assert __version__ in capsys.readouterr().out

    def test_manifest_records_version(self):
        """Test run manifests carry the producing version."""
        manifest = RunManifest(command="simulate", config={}, seed=0)
        assert manifest.version == __version__
        assert manifest.to_dict()["version"] == __version__
