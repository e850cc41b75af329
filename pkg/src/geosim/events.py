"""Future event list and the single-threaded run loop."""

from __future__ import annotations

import enum
import hashlib
import heapq
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, TextIO

__all__ = ["EventKind", "Event", "EventQueue", "Engine", "SchedulingError", "INFINITY"]

log = logging.getLogger(__name__)

INFINITY = float("inf")


class EventKind(enum.Enum):
    REQUEST_ORIGINATION = "RequestOrigination"
    ARRIVE_AT_DATA_CENTER = "ArriveAtDataCenter"
    SERVICE_COMPLETION = "ServiceCompletion"
    RESPONSE_ARRIVAL = "ResponseArrival"
    PERIODIC_SAMPLE = "PeriodicSample"
    SIMULATION_END = "SimulationEnd"


class SchedulingError(RuntimeError):
    """An event was scheduled before the current clock."""


@dataclass(eq=False)
class Event:
    time: float
    seq: int
    kind: EventKind
    payload: Any = None
    cancelled: bool = field(default=False, repr=False)

    def digest(self) -> str:
        return hashlib.blake2b(repr(self.payload).encode(), digest_size=6).hexdigest()


class EventQueue:
    """Binary heap of events ordered by ``(time, seq)``.

    ``seq`` comes from a counter owned by the queue, so equal-time events pop
    in insertion order. Cancelled events stay in the heap and are skipped on
    pop.
    """

    def __init__(self):
        self._heap: list[tuple[float, int, Event]] = []
        self._seq = 0
        self._live = 0
        self.last = 0.0

    def __len__(self):
        return self._live

    def __bool__(self):
        return self._live > 0

    def push(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        if time < self.last or time != time:
            raise SchedulingError(f"cannot schedule {kind.value} at t={time!r}; clock is at {self.last!r}")
        ev = Event(time, self._seq, kind, payload)
        self._seq += 1
        self._live += 1
        heapq.heappush(self._heap, (time, ev.seq, ev))
        return ev

    def cancel(self, ev: Event) -> None:
        if not ev.cancelled:
            ev.cancelled = True
            self._live -= 1

    def peek_time(self) -> float:
        self._drop_cancelled()
        return self._heap[0][0] if self._heap else INFINITY

    def pop(self) -> Event:
        self._drop_cancelled()
        if not self._heap:
            raise IndexError("pop from an empty event queue")
        ev = heapq.heappop(self._heap)[2]
        self._live -= 1
        self.last = ev.time
        return ev

    def _drop_cancelled(self):
        heap = self._heap
        while heap and heap[0][2].cancelled:
            heapq.heappop(heap)


Handler = Callable[[Event], None]


class Engine:
    """Simulation clock plus dispatch of popped events to per-kind handlers.

    Handlers may schedule further events; scheduling before ``now`` raises
    :class:`SchedulingError`.
    """

    def __init__(self, start: float = 0.0, trace: TextIO | None = None):
        self.queue = EventQueue()
        self.queue.last = start
        self.now = start
        self.processed = 0
        self.counts = {kind: 0 for kind in EventKind}
        self._handlers: dict[EventKind, Handler] = {}
        self._trace = trace

    def on(self, kind: EventKind, handler: Handler) -> None:
        self._handlers[kind] = handler

    def schedule(self, time: float, kind: EventKind, payload: Any = None) -> Event:
        return self.queue.push(time, kind, payload)

    def cancel(self, ev: Event) -> None:
        self.queue.cancel(ev)

    def run(self, until: float = INFINITY) -> bool:
        """Process events in order until the queue empties or the next event lies past ``until``.

        Returns True if the queue drained completely.
        """
        queue = self.queue
        handlers = self._handlers
        counts = self.counts
        trace = self._trace
        while queue:
            if queue.peek_time() > until:
                log.warning("stopping at t=%s with %d events pending", self.now, len(queue))
                return False
            ev = queue.pop()
            self.now = ev.time
            self.processed += 1
            counts[ev.kind] += 1
            if trace is not None:
                trace.write(f"{ev.time!r}\t{ev.seq}\t{ev.kind.value}\t{ev.digest()}\n")
            handler = handlers.get(ev.kind)
            if handler is not None:
                handler(ev)
        return True
