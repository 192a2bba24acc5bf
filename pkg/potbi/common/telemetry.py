"""Telemetry and instrumentation."""

from __future__ import annotations

import logging
import threading
import time
from collections import Counter, defaultdict
from contextlib import contextmanager


class Telemetry:
    """Records events and timings for observability."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._events: Counter[str] = Counter()
        self._durations: dict[str, list[float]] = defaultdict(list)
        self.logger = logging.getLogger(self.__class__.__name__)

    def record_event(self, name: str, **fields) -> None:
        """Record a named event with fields."""
        with self._lock:
            self._events[name] += 1
        rendered = " ".join(f"{k}={v}" for k, v in sorted(fields.items()))
        self.logger.debug(f"event={name} {rendered}".rstrip())

    @contextmanager
    def time_block(self, name: str):
        """Time a code block and keep its duration under `name`."""
        start = time.perf_counter()
        try:
            yield
        finally:
            elapsed_ms = (time.perf_counter() - start) * 1000.0
            with self._lock:
                self._durations[name].append(elapsed_ms)
            self.logger.debug(f"timing={name} elapsed_ms={elapsed_ms:.1f}")

    def snapshot(self) -> dict:
        """Return event counts and total durations recorded so far."""
        with self._lock:
            return {
                "events": dict(self._events),
                "timings_ms": {k: round(sum(v), 3) for k, v in self._durations.items()},
            }
