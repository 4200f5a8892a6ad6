"""Per-interface DCF state machines and the SL / MLSR / MLMR access policies.

Backoff counting is event-driven: an interface in ``BACKOFF`` has a single
pending BACKOFF_EXPIRY event. When its channel turns busy the event is
cancelled and the idle slots already counted are subtracted; when the
channel idles again the countdown restarts after DIFS from where it stopped.
Slot boundaries are anchored at ``idle_since + DIFS`` of the channel so that
contenders on the same channel count on the same grid and can pick the same
slot, which is how RTS collisions arise.

When an MLSR interface wins, its siblings are locked out for the exchange.
With ``mlsr_resume`` they keep the residual count and continue from it once
released; otherwise their backoff is discarded and redrawn.
"""

from __future__ import annotations

import enum
from array import array

from mlosim.engine import EventKind, EventQueue
from mlosim.errors import ProtocolViolation
from mlosim.medium import Medium, Outcome
from mlosim.traffic import RandomStream, TrafficMode, TrafficSource, TxBuffer, draw_backoff

CW_MAX = 1023


class AccessPolicy(enum.Enum):
    SL = "SL"
    MLSR = "MLSR"
    MLMR = "MLMR"


class IfState(enum.Enum):
    IDLE = "idle"
    BACKOFF = "backoff"
    FROZEN = "frozen"
    TRANSMITTING = "transmitting"
    LOCKED_OUT = "locked_out"


class Interface:
    """One radio of a BSS bound to one channel."""

    def __init__(self, bss: "Bss", index: int, channel: int):
        self.bss = bss
        self.index = index
        self.channel = channel
        self.state = IfState.IDLE
        self.backoff_remaining = 0
        self.count_start = 0
        self.expiry = None
        self.batch: list[tuple[int, int]] | None = None
        self.retries = 0
        self.resume_pending = False
        self.tx_count = 0
        self.collisions = 0

    @property
    def name(self) -> str:
        return f"{self.bss.name}/ch{self.channel}"

    def __repr__(self):
        return f"Interface({self.name}, {self.state.value})"

    @property
    def pending_difs(self) -> bool:
        """True while the countdown is armed but still inside the DIFS wait."""
        return self.state is IfState.BACKOFF and self.bss.queue.now < self.count_start

    # medium callbacks
    def on_channel_busy(self, now: int) -> None:
        if self.state is IfState.BACKOFF:
            self.bss.freeze(self, now)

    def on_channel_idle(self, now: int) -> None:
        if self.state is IfState.FROZEN:
            self.bss.resume_countdown(self)

    def on_exchange_end(self, outcome: Outcome) -> None:
        self.bss.on_exchange_end(self, outcome)


class Bss:
    """An AP with one or more interfaces sharing a single FIFO buffer."""

    def __init__(self, name: str, index: int, policy: AccessPolicy, channels: list[int],
                 queue: EventQueue, medium: Medium, source: TrafficSource, backoff_rng: RandomStream,
                 buffer_capacity: int, max_ampdu: int, cw_min: int, slot_ticks: int, difs_ticks: int,
                 exponential_backoff: bool = False, mlsr_resume: bool = False):
        if policy is AccessPolicy.SL and len(channels) != 1:
            raise ValueError(f"SL BSS {name} must have exactly one interface, got {len(channels)}")
        if len(set(channels)) != len(channels):
            raise ValueError(f"BSS {name} binds two interfaces to one channel")
        self.name = name
        self.index = index
        self.policy = policy
        self.queue = queue
        self.medium = medium
        self.source = source
        self.rng = backoff_rng
        self.buffer = TxBuffer(buffer_capacity)
        self.max_ampdu = max_ampdu
        self.cw_min = cw_min
        self.slot = slot_ticks
        self.difs = difs_ticks
        self.exponential_backoff = exponential_backoff
        self.mlsr_resume = mlsr_resume
        self.interfaces = [Interface(self, i, ch) for i, ch in enumerate(channels)]
        for iface in self.interfaces:
            medium.subscribe(iface.channel, iface)
        self.wakeup = None
        self.active_tx = 0
        self.max_active_tx = 0
        self.in_flight = 0
        # delivery trace, parallel arrays
        self.rec_pid = array("q")
        self.rec_arrival = array("q")
        self.rec_delivery = array("q")

    def __repr__(self):
        return f"Bss({self.name}, {self.policy.value}, channels={[i.channel for i in self.interfaces]})"

    @property
    def channels(self) -> list[int]:
        return [i.channel for i in self.interfaces]

    # traffic
    def start(self) -> None:
        """Arm the first arrival (or start contending right away for full buffer)."""
        self.sync()
        if self.buffer.queue:
            self.on_buffer_nonempty()
        else:
            self.ensure_wakeup()

    def sync(self) -> None:
        self.source.pull(self.queue.now, self.buffer)

    def ensure_wakeup(self) -> None:
        if self.wakeup is not None and self.wakeup.alive:
            return
        if self.source.mode is TrafficMode.POISSON:
            self.wakeup = self.queue.schedule_at(self.source.next_arrival, EventKind.PACKET_ARRIVAL, self)

    def on_packet_arrival(self) -> None:
        self.wakeup = None
        self.sync()
        if self.buffer.queue:
            self.on_buffer_nonempty()
        else:
            self.ensure_wakeup()

    # channel access
    def on_buffer_nonempty(self) -> None:
        if not self.buffer.queue:
            raise ProtocolViolation("on_buffer_nonempty with empty buffer", time=self.queue.now, bss=self.name)
        if self.policy is AccessPolicy.MLSR and self.active_tx:
            return
        for iface in self.interfaces:
            if iface.state is IfState.IDLE:
                self.start_backoff(iface)

    def _cw(self, iface: Interface) -> int:
        if not self.exponential_backoff:
            return self.cw_min
        return min((self.cw_min + 1) * (1 << iface.retries) - 1, CW_MAX)

    def start_backoff(self, iface: Interface) -> None:
        iface.backoff_remaining = draw_backoff(self.rng, self._cw(iface))
        if self.medium.channels[iface.channel].busy:
            iface.state = IfState.FROZEN
        else:
            self.resume_countdown(iface)

    def _continue_backoff(self, iface: Interface) -> None:
        """Restart counting from the residual ``backoff_remaining`` (MLSR resume mode)."""
        if self.medium.channels[iface.channel].busy:
            iface.state = IfState.FROZEN
        else:
            self.resume_countdown(iface)

    def resume_countdown(self, iface: Interface) -> None:
        now = self.queue.now
        origin = self.medium.channels[iface.channel].idle_since + self.difs
        if now > origin:
            origin += -(-(now - origin) // self.slot) * self.slot
        iface.count_start = origin
        iface.state = IfState.BACKOFF
        iface.expiry = self.queue.schedule_at(origin + iface.backoff_remaining * self.slot,
                                              EventKind.BACKOFF_EXPIRY, iface)

    def freeze(self, iface: Interface, now: int) -> None:
        self.queue.cancel(iface.expiry)
        iface.expiry = None
        if now > iface.count_start:
            elapsed = (now - iface.count_start) // self.slot
            iface.backoff_remaining = max(0, iface.backoff_remaining - elapsed)
        iface.state = IfState.FROZEN

    def on_backoff_expired(self, iface: Interface) -> None:
        now = self.queue.now
        if iface.state is not IfState.BACKOFF:
            raise ProtocolViolation("backoff expiry outside BACKOFF", time=now, bss=self.name,
                                    interface=iface.name, state=iface.state.value)
        iface.expiry = None
        if self.medium.channels[iface.channel].busy:
            raise ProtocolViolation("backoff expired on a busy channel", time=now, bss=self.name,
                                    interface=iface.name, state=iface.state.value)
        self.sync()
        if not self.buffer.queue:
            iface.state = IfState.IDLE
            self.ensure_wakeup()
            return
        batch = self.select_ampdu()
        iface.batch = batch
        iface.state = IfState.TRANSMITTING
        iface.backoff_remaining = 0
        self.in_flight += len(batch)
        self.active_tx += 1
        if self.active_tx > self.max_active_tx:
            self.max_active_tx = self.active_tx
        if self.policy is AccessPolicy.MLSR:
            if self.active_tx > 1:
                raise ProtocolViolation("second concurrent MLSR transmission", time=now, bss=self.name,
                                        interface=iface.name, state=iface.state.value)
            for other in self.interfaces:
                if other is iface:
                    continue
                if self.mlsr_resume and other.state in (IfState.BACKOFF, IfState.FROZEN):
                    if other.state is IfState.BACKOFF:
                        self.freeze(other, now)
                    other.resume_pending = True
                elif other.expiry is not None:
                    self.queue.cancel(other.expiry)
                    other.expiry = None
                other.state = IfState.LOCKED_OUT
        # the RTS names the link, so an MLSR receiver retunes within SIFS
        self.medium.seize(iface.channel, iface, len(batch))

    def select_ampdu(self) -> list[tuple[int, int]]:
        return self.buffer.take(self.max_ampdu)

    def on_exchange_end(self, iface: Interface, outcome: Outcome) -> None:
        now = self.queue.now
        batch = iface.batch
        if iface.state is not IfState.TRANSMITTING or batch is None:
            raise ProtocolViolation("exchange end on a non-transmitting interface", time=now,
                                    bss=self.name, interface=iface.name, state=iface.state.value)
        iface.batch = None
        self.in_flight -= len(batch)
        self.active_tx -= 1
        if outcome is Outcome.DELIVERED:
            iface.tx_count += 1
            iface.retries = 0
            for pid, arrival in batch:
                self.rec_pid.append(pid)
                self.rec_arrival.append(arrival)
            self.rec_delivery.extend([now] * len(batch))
        else:
            iface.collisions += 1
            iface.retries += 1
            self.buffer.restore(batch)
        iface.state = IfState.IDLE
        self.sync()
        if self.policy is AccessPolicy.MLSR:
            for other in self.interfaces:
                if other.state is IfState.LOCKED_OUT:
                    other.state = IfState.IDLE
                    if other.resume_pending:
                        other.resume_pending = False
                        if self.buffer.queue:
                            self._continue_backoff(other)
        if self.buffer.queue:
            self.on_buffer_nonempty()
        else:
            self.ensure_wakeup()
