"""Future-event list with integer clock and cancellable events.

Events are ordered by ``(fire_time, seq)`` where ``seq`` is the issue order,
so same-tick events fire in the order they were scheduled. Cancellation is
lazy: a cancelled entry stays in the heap and is skipped on pop.
"""

from __future__ import annotations

import enum
import heapq
from typing import Any

from mlosim.errors import SimulationError

MAX_TICK = 2**63 - 1


class EventKind(enum.IntEnum):
    PACKET_ARRIVAL = 0
    BACKOFF_EXPIRY = 1
    TX_END = 2
    CHANNEL_IDLE = 3
    SIM_END = 4
    # resolves all RTS seizures issued on one channel at one tick
    SEIZE_RESOLVE = 5


class CancelResult(enum.Enum):
    CANCELLED = "cancelled"
    ALREADY_DEAD = "already_dead"


class Event:
    __slots__ = ("fire_time", "seq", "kind", "target", "payload", "alive")

    def __init__(self, fire_time: int, seq: int, kind: EventKind, target: Any, payload: Any = None):
        self.fire_time = fire_time
        self.seq = seq
        self.kind = kind
        self.target = target
        self.payload = payload
        self.alive = True

    def __lt__(self, other: "Event") -> bool:
        if self.fire_time != other.fire_time:
            return self.fire_time < other.fire_time
        return self.seq < other.seq

    def __repr__(self):
        return f"Event(t={self.fire_time}, seq={self.seq}, {self.kind.name}, target={self.target!r})"


# An Event doubles as its own handle.
EventHandle = Event


class EventQueue:
    def __init__(self):
        self._heap: list[tuple[int, int, Event]] = []
        self._seq = 0
        self.now = 0
        self.live = 0

    def __len__(self):
        return self.live

    def schedule(self, delay: int, kind: EventKind, target: Any = None, payload: Any = None) -> Event:
        if delay < 0:
            raise ValueError(f"negative delay {delay}")
        fire_time = self.now + delay
        if fire_time > MAX_TICK:
            raise SimulationError(f"tick overflow scheduling {kind.name} at now={self.now} + {delay}")
        ev = Event(fire_time, self._seq, kind, target, payload)
        heapq.heappush(self._heap, (fire_time, self._seq, ev))
        self._seq += 1
        self.live += 1
        return ev

    def schedule_at(self, time: int, kind: EventKind, target: Any = None, payload: Any = None) -> Event:
        return self.schedule(time - self.now, kind, target, payload)

    def cancel(self, handle: Event) -> CancelResult:
        if handle is None or not handle.alive:
            return CancelResult.ALREADY_DEAD
        handle.alive = False
        self.live -= 1
        return CancelResult.CANCELLED

    def next(self) -> Event | None:
        """Pop the earliest live event and advance the clock, or None when empty."""
        heap = self._heap
        while heap:
            _, _, ev = heapq.heappop(heap)
            if ev.alive:
                ev.alive = False
                self.live -= 1
                self.now = ev.fire_time
                return ev
        return None

    def peek_time(self) -> int | None:
        heap = self._heap
        while heap and not heap[0][2].alive:
            heapq.heappop(heap)
        return heap[0][0] if heap else None
