"""leolink logging system with structured output and run tracking.

Provides text and JSON log formatting, a cached logger factory rooted at the
``leolink`` logger, and a hook that traces scenario runs through the event
system with a short run id and wall-clock timing.
"""

from __future__ import annotations

import json
import logging
import sys
import time
import uuid
from datetime import datetime
from typing import TYPE_CHECKING, Any

from . import events

if TYPE_CHECKING:
    from .events import EventContext, EventManager

_EXTRA_FIELDS = ("run_id", "command", "epoch", "sim_time", "window", "elapsed")
_TEXT_FORMAT = "[%(asctime)s] %(levelname)s in %(name)s: %(message)s"


def _run_fields(record: logging.LogRecord) -> dict[str, Any]:
    return {
        name: getattr(record, name)
        for name in _EXTRA_FIELDS
        if getattr(record, name, None) is not None
    }


class LeoLinkFormatter(logging.Formatter):
    """Text lines for terminals, one JSON object per record for log pipelines.

    In text mode the run id and simulation time, when set on the record, are
    appended as ``(run=abc12345 t=5.890s)``. JSON records carry timestamp,
    level, logger, message, module, function and line plus every run field
    that is set.
    """

    def __init__(self, use_json: bool = False) -> None:
        self.use_json = use_json
        super().__init__(None if use_json else _TEXT_FORMAT, datefmt="%Y-%m-%d %H:%M:%S")

    def format(self, record: logging.LogRecord) -> str:
        run = _run_fields(record)
        if not self.use_json:
            line = super().format(record)
            tags = []
            if "run_id" in run:
                tags.append(f"run={run['run_id']}")
            if isinstance(run.get("sim_time"), (int, float)):
                tags.append(f"t={run['sim_time']:.3f}s")
            return f"{line} ({' '.join(tags)})" if tags else line

        entry: dict[str, Any] = {
            "timestamp": datetime.fromtimestamp(record.created).isoformat(),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }
        entry.update(run)
        if record.exc_info:
            entry["exception"] = self.formatException(record.exc_info)
        return json.dumps(entry, default=str)


class LeoLinkLogger:
    """Owns the ``leolink`` logger tree: one handler, one format, set once."""

    _loggers: dict[str, logging.Logger] = {}
    _configured: bool = False

    @classmethod
    def configure(
        cls,
        level: str = "INFO",
        format_type: str = "text",
        output: str | None = None,
        force: bool = False,
    ) -> None:
        """Install the handler on the ``leolink`` logger.

        Args:
            level: DEBUG, INFO, WARNING, ERROR or CRITICAL
            format_type: "text" or "json"
            output: Log file path; stdout when None
            force: Replace an earlier configuration; the CLI passes this to
                honour --log-level and --log-format
        """
        if cls._configured and not force:
            return

        tree = logging.getLogger("leolink")
        tree.setLevel(getattr(logging, level.upper()))
        for old in list(tree.handlers):
            tree.removeHandler(old)
            old.close()

        handler: logging.Handler = (
            logging.FileHandler(output) if output else logging.StreamHandler(sys.stdout)
        )
        handler.setFormatter(LeoLinkFormatter(use_json=format_type == "json"))
        tree.addHandler(handler)
        tree.propagate = False
        cls._configured = True

    @classmethod
    def get_logger(cls, name: str) -> logging.Logger:
        """Cached ``leolink.<name>`` logger, configuring defaults on first use.

        Example:
            ```python
            log = LeoLinkLogger.get_logger("scenario")
            log.info("Window opened", extra={"sim_time": 12.5})
            ```
        """
        if not cls._configured:
            cls.configure()
        return cls._loggers.setdefault(name, logging.getLogger(f"leolink.{name}"))


scenario_logger = LeoLinkLogger.get_logger("scenario")
cli_logger = LeoLinkLogger.get_logger("cli")


class RunLoggingHook:
    """Traces scenario runs through the event system.

    Assigns a short run id at ``scenario_start``, logs each visibility window
    as it opens and closes, and logs completion with the elapsed wall time.

    Args:
        logger: Custom logger instance (defaults to scenario_logger)
        command: CLI command name added to every record (optional)

    Example:
        ```python
        events = EventManager()
        RunLoggingHook(command="simulate").attach(events)
        run_scenario(cfg, events=events)
        ```
    """

    def __init__(
        self, logger: logging.Logger | None = None, command: str | None = None
    ) -> None:
        self.logger = logger or scenario_logger
        self.command = command
        self.run_id: str | None = None
        self._start_time = 0.0

    def attach(self, manager: EventManager) -> None:
        """Subscribe the hook to the scenario events of ``manager``."""
        manager.add_handler(events.SCENARIO_START, self.on_start)
        manager.add_handler(events.WINDOW_OPEN, self.on_window_open)
        manager.add_handler(events.WINDOW_CLOSE, self.on_window_close)
        manager.add_handler(events.SCENARIO_END, self.on_end)

    def _extra(self, **fields: Any) -> dict[str, Any]:
        extra: dict[str, Any] = {"run_id": self.run_id}
        if self.command:
            extra["command"] = self.command
        extra.update(fields)
        return extra

    def on_start(self, context: EventContext) -> None:
        self.run_id = str(uuid.uuid4())[:8]
        self._start_time = time.perf_counter()
        self.logger.info(
            f"Scenario started ({context.metadata.get('epochs', '?')} epochs)",
            extra=self._extra(),
        )

    def on_window_open(self, context: EventContext) -> None:
        self.logger.info(
            "Visibility window opened",
            extra=self._extra(
                epoch=context.metadata.get("epoch"), sim_time=context.data
            ),
        )

    def on_window_close(self, context: EventContext) -> None:
        self.logger.info(
            "Visibility window closed",
            extra=self._extra(
                epoch=context.metadata.get("epoch"), sim_time=context.data
            ),
        )

    def on_end(self, context: EventContext) -> None:
        elapsed = round((time.perf_counter() - self._start_time) * 1000, 2)
        self.logger.info(
            "Scenario completed",
            extra=self._extra(elapsed=f"{elapsed}ms", window=context.data),
        )
