"""Version information for leolink.

The string is the single source; run manifests record it so a replay can
report which release produced the original results.
"""

from __future__ import annotations

__version__ = "0.2.0"

_major, _minor, _patch = (int(part) for part in __version__.split("."))
VERSION: tuple[int, int, int] = (_major, _minor, _patch)

version_info = VERSION


def get_version() -> str:
    """Return the version string, e.g. ``'0.2.0'``."""
    return __version__


def get_version_info() -> tuple[int, int, int]:
    return VERSION
