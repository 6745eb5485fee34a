"""CLI commands package."""

from __future__ import annotations

from leolink.events import EventManager
from leolink.logging import RunLoggingHook


def scenario_events(command: str) -> EventManager:
    """Event manager with run logging attached for ``command``."""
    manager = EventManager()
    RunLoggingHook(command=command).attach(manager)
    return manager
