"""Event handling for scenario runs.

The scenario loop emits lifecycle events (start, window open/close, rejected
updates, end); callers subscribe handlers to observe a run without touching
the loop. Dispatch is synchronous and in priority order.
"""

from __future__ import annotations

import inspect
import logging
from collections import defaultdict
from dataclasses import dataclass, field
from datetime import datetime
from typing import Any, Callable, Literal

logger = logging.getLogger(__name__)

SCENARIO_START = "scenario_start"
SCENARIO_END = "scenario_end"
WINDOW_OPEN = "window_open"
WINDOW_CLOSE = "window_close"
FILTER_REJECTED = "filter_rejected"

CallStyle = Literal["bare", "context", "data"]


@dataclass
class EventContext:
    """What a handler or middleware sees of one emitted event.

    ``metadata`` holds the keyword arguments given to ``emit_event``, for the
    scenario loop typically ``epoch`` and ``run``.
    """

    name: str
    data: Any = None
    timestamp: datetime = field(default_factory=datetime.now)
    source: str | None = None
    metadata: dict[str, Any] = field(default_factory=dict)


def _call_style(handler: Callable[..., Any]) -> CallStyle:
    try:
        params = list(inspect.signature(handler).parameters.values())
    except (TypeError, ValueError):
        return "data"
    if not params:
        return "bare"
    first = params[0]
    if first.annotation in (EventContext, "EventContext") or "context" in first.name:
        return "context"
    return "data"


@dataclass
class EventHandler:
    """A registered callback with its priority and optional data predicate."""

    handler: Callable[..., Any]
    priority: int = 0
    condition: Callable[..., bool] | None = None
    style: CallStyle = field(init=False)

    def __post_init__(self) -> None:
        if not callable(self.handler):
            msg = f"Event handler must be callable, got {type(self.handler).__name__}"  # type: ignore[unreachable]
            raise TypeError(msg)
        self.style = _call_style(self.handler)

    def wants(self, data: Any) -> bool:
        return self.condition is None or bool(self.condition(data))

    def __call__(self, context: EventContext) -> None:
        if self.style == "bare":
            self.handler()
        elif self.style == "context":
            self.handler(context)
        else:
            self.handler(context.data)


class EventManager:
    """Registry and dispatcher for scenario events.

    Handlers run highest priority first; equal priorities keep registration
    order. A handler with no parameters is called bare, one whose first
    parameter is named ``*context*`` or annotated ``EventContext`` receives
    the context, and any other handler receives the event data. Middleware
    sees every event before its handlers. Exceptions from handlers and
    middleware are logged and never reach the emitting loop.

    Example:
        ```python
        events = EventManager()
        events.add_handler(WINDOW_OPEN, lambda t: print(f"rise at {t:.2f} s"))
        run_scenario(cfg, events=events)
        ```
    """

    def __init__(self) -> None:
        self.handlers: dict[str, list[EventHandler]] = defaultdict(list)
        self.event_middleware: list[Callable[[EventContext], Any]] = []

    def add_handler(
        self,
        event_name: str,
        handler: Callable[..., Any],
        priority: int = 0,
        condition: Callable[..., bool] | None = None,
    ) -> None:
        """Subscribe ``handler`` to ``event_name``.

        Args:
            event_name: Event to subscribe to, e.g. :data:`WINDOW_OPEN`
            handler: Callback, see the class docstring for how it is called
            priority: Higher runs first
            condition: Predicate on the event data; the handler is skipped
                when it returns false
        """
        registered = self.handlers[event_name]
        registered.append(EventHandler(handler, priority, condition))
        registered.sort(key=lambda h: -h.priority)
        logger.debug(f"Subscribed to '{event_name}' (priority {priority})")

    def remove_handler(self, event_name: str, handler: Callable[..., Any]) -> bool:
        """Unsubscribe the first registration of ``handler``; False if absent."""
        registered = self.handlers.get(event_name, [])
        for entry in registered:
            if entry.handler == handler:
                registered.remove(entry)
                return True
        return False

    def add_event_middleware(self, middleware: Callable[[EventContext], Any]) -> None:
        self.event_middleware.append(middleware)

    def emit_event(
        self,
        event_name: str,
        data: Any = None,
        source: str | None = None,
        **metadata: Any,
    ) -> None:
        """Dispatch one event to the middleware and then to its handlers.

        Args:
            event_name: Event being emitted
            data: Payload; window events carry the epoch time in seconds
            source: Emitter name, ``"scenario"`` for the scenario loop
            **metadata: Stored on the context, e.g. ``epoch=k``
        """
        context = EventContext(
            name=event_name, data=data, source=source, metadata=metadata
        )
        for middleware in self.event_middleware:
            try:
                middleware(context)
            except Exception as e:  # noqa: PERF203
                logger.error(f"Middleware failed on '{event_name}': {e}")

        for entry in list(self.handlers.get(event_name, [])):
            try:
                if entry.wants(data):
                    entry(context)
            except Exception as e:  # noqa: PERF203
                logger.error(f"Handler {entry.handler!r} failed on '{event_name}': {e}")

    def get_handlers(self, event_name: str) -> list[EventHandler]:
        """Handlers for ``event_name`` in dispatch order (a copy)."""
        return list(self.handlers.get(event_name, []))

    def list_events(self) -> list[str]:
        return list(self.handlers)

    def clear_handlers(self, event_name: str | None = None) -> None:
        """Drop the handlers of one event, or of every event when ``None``."""
        if event_name is None:
            self.handlers.clear()
        else:
            self.handlers.pop(event_name, None)
