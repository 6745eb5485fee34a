"""leolink command-line interface."""

from __future__ import annotations

__all__ = ["main"]

from .main import main
