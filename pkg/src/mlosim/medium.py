"""Orthogonal 20 MHz channels: occupancy, carrier sense and RTS collisions.

A seizure is not resolved immediately. All RTSs issued on one channel at the
same tick are collected and resolved together by a zero-delay SEIZE_RESOLVE
event: one seizer gets the channel for the whole exchange, two or more
collide and the channel carries a collision burst (RTS + DIFS). Until the
resolve fires the channel still senses idle, which is what makes same-slot
expiries collide instead of being serialized by event order.

Busy intervals are end-exclusive: the channel is idle at exactly ``start +
duration`` and ``idle_since`` is set to that tick.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Any, Protocol

from mlosim.engine import EventKind, EventQueue
from mlosim.errors import ProtocolViolation


class Sense(enum.Enum):
    IDLE = "idle"
    BUSY = "busy"


class Outcome(enum.Enum):
    DELIVERED = "delivered"
    COLLIDED = "collided"


class OccupancyKind(enum.Enum):
    EXCHANGE = "exchange"
    COLLISION_BURST = "collision"


@dataclass(slots=True)
class OccupancyRecord:
    channel: int
    transmitters: tuple[Any, ...]
    start: int
    duration: int
    kind: OccupancyKind
    n_mpdu: int = 0

    @property
    def end(self) -> int:
        return self.start + self.duration


class Listener(Protocol):
    def on_channel_busy(self, now: int) -> None: ...

    def on_channel_idle(self, now: int) -> None: ...


class Seizer(Listener, Protocol):
    def on_exchange_end(self, outcome: Outcome) -> None: ...


@dataclass(eq=False)
class Channel:
    id: int
    busy: bool = False
    idle_since: int = 0
    current: OccupancyRecord | None = None
    listeners: list = field(default_factory=list)
    pending: list = field(default_factory=list)  # (seizer, n_mpdu) at the current tick
    records: list = field(default_factory=list)

    def __repr__(self):
        return f"Channel({self.id})"


class Medium:
    """Owns the channels of one simulation run.

    ``exchange_ticks[n]`` is the channel time of a successful RTS/CTS/DATA/BACK
    exchange carrying ``n`` MPDUs; ``collision_ticks`` is the burst left by
    colliding RTSs.
    """

    def __init__(self, queue: EventQueue, channel_ids, exchange_ticks: list[int], collision_ticks: int,
                 keep_records: bool = True):
        self.queue = queue
        self.channels = {cid: Channel(cid) for cid in channel_ids}
        self.exchange_ticks = exchange_ticks
        self.collision_ticks = collision_ticks
        self.keep_records = keep_records
        self.collisions = 0

    def channel(self, cid: int) -> Channel:
        try:
            return self.channels[cid]
        except KeyError:
            raise ValueError(f"unknown channel id {cid}") from None

    def sense(self, cid: int) -> Sense:
        return Sense.BUSY if self.channel(cid).busy else Sense.IDLE

    def subscribe(self, cid: int, listener: Listener) -> None:
        ch = self.channel(cid)
        if listener not in ch.listeners:
            ch.listeners.append(listener)

    def unsubscribe(self, cid: int, listener: Listener) -> None:
        ch = self.channel(cid)
        if listener in ch.listeners:
            ch.listeners.remove(listener)

    def seize(self, cid: int, who: Seizer, n_mpdu: int) -> None:
        """Issue an RTS on an idle channel; the outcome arrives via ``who.on_exchange_end``."""
        ch = self.channel(cid)
        if ch.busy:
            raise ProtocolViolation(f"seize of busy channel {cid}", time=self.queue.now,
                                    interface=who, state="busy")
        if not ch.pending:
            self.queue.schedule(0, EventKind.SEIZE_RESOLVE, ch)
        ch.pending.append((who, n_mpdu))

    def resolve(self, ch: Channel) -> Outcome:
        now = self.queue.now
        pending = ch.pending
        ch.pending = []
        if len(pending) == 1:
            who, n = pending[0]
            rec = OccupancyRecord(ch.id, (who,), now, self.exchange_ticks[n], OccupancyKind.EXCHANGE, n)
            outcome = Outcome.DELIVERED
            end_kind = EventKind.TX_END
        else:
            rec = OccupancyRecord(ch.id, tuple(w for w, _ in pending), now, self.collision_ticks,
                                  OccupancyKind.COLLISION_BURST)
            outcome = Outcome.COLLIDED
            end_kind = EventKind.CHANNEL_IDLE
            self.collisions += 1
        ch.busy = True
        ch.current = rec
        if self.keep_records:
            ch.records.append(rec)
        self.queue.schedule(rec.duration, end_kind, ch, outcome)
        for listener in ch.listeners:
            listener.on_channel_busy(now)
        return outcome

    def end_occupancy(self, ch: Channel, outcome: Outcome) -> None:
        now = self.queue.now
        rec = ch.current
        ch.busy = False
        ch.current = None
        ch.idle_since = now
        for who in rec.transmitters:
            who.on_exchange_end(outcome)
        for listener in ch.listeners:
            listener.on_channel_idle(now)

    def busy_ticks(self, cid: int, start: int, end: int) -> int:
        """Occupied time of channel ``cid`` inside ``[start, end)``."""
        total = 0
        for rec in self.channel(cid).records:
            lo = max(rec.start, start)
            hi = min(rec.end, end)
            if hi > lo:
                total += hi - lo
        return total
