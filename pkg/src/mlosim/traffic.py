"""Random streams, Poisson packet sources and the AP transmit buffer."""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass

import numpy as np

from mlosim.phy import TICKS_PER_S

# sub-stream purposes, part of the seed derivation
PURPOSE_TRAFFIC = 0
PURPOSE_BACKOFF = 1

_BLOCK = 4096


class RandomStream:
    """Block-buffered uniform draws from a numpy PCG64 stream.

    Each stream is keyed by ``(master_seed, bss_index, purpose)`` through
    ``SeedSequence.spawn_key``, so streams are independent of each other and
    adding a BSS never changes another BSS's draws.
    """

    def __init__(self, master_seed: int, *key: int):
        ss = np.random.SeedSequence(entropy=master_seed, spawn_key=tuple(key))
        self._gen = np.random.Generator(np.random.PCG64(ss))
        self._block: list[float] = []
        self._i = 0
        self.draws = 0

    def uniform(self) -> float:
        """One draw in [0, 1)."""
        if self._i >= len(self._block):
            self._block = self._gen.random(_BLOCK).tolist()
            self._i = 0
        u = self._block[self._i]
        self._i += 1
        self.draws += 1
        return u


def draw_backoff(rng: RandomStream, cw_min: int) -> int:
    """Uniform integer backoff in [0, cw_min] slots; one draw."""
    return int(rng.uniform() * (cw_min + 1))


def next_interarrival(rng: RandomStream, rate: float) -> int:
    """Exponential interarrival with mean 1/rate seconds, floored to ticks (min 1)."""
    u = 1.0 - rng.uniform()  # (0, 1]
    ticks = int(-math.log(u) / rate * TICKS_PER_S)
    return ticks if ticks > 0 else 1


def load_to_rate(fraction: float, reference_throughput: float, frame_bits: int) -> float:
    """Packets per second for a load given as a fraction of ``reference_throughput`` [bit/s]."""
    if not 0 < fraction <= 1.5:
        raise ValueError(f"load fraction {fraction} outside (0, 1.5]")
    return fraction * reference_throughput / frame_bits


class TrafficMode(enum.Enum):
    POISSON = "poisson"
    FULL_BUFFER = "full"


class Admission(enum.Enum):
    ENQUEUED = "enqueued"
    DROPPED = "dropped"


class TxBuffer:
    """Shared FIFO of ``(packet_id, arrival_tick)``; overflow drops the arriving packet."""

    def __init__(self, capacity: int):
        self.capacity = capacity
        self.queue: deque[tuple[int, int]] = deque()
        self.drops = 0
        self.drop_ticks: list[int] = []

    def __len__(self):
        return len(self.queue)

    def admit(self, packet: tuple[int, int]) -> Admission:
        if len(self.queue) < self.capacity:
            self.queue.append(packet)
            return Admission.ENQUEUED
        self.drops += 1
        self.drop_ticks.append(packet[1])
        return Admission.DROPPED

    def take(self, n: int) -> list[tuple[int, int]]:
        q = self.queue
        if not q:
            raise AssertionError("select from an empty buffer")
        n = min(n, len(q))
        return [q.popleft() for _ in range(n)]

    def restore(self, batch: list[tuple[int, int]]) -> None:
        """Put a failed batch back at the head, order preserved."""
        self.queue.extendleft(reversed(batch))


def admit(buffer: TxBuffer, packet: tuple[int, int]) -> Admission:
    return buffer.admit(packet)


@dataclass
class TrafficSource:
    """Downlink packet source of one BSS.

    Arrivals are generated lazily: ``pull(now)`` admits every packet that
    arrived in ``(last pull, now]`` into the buffer in arrival order. Between
    two pulls nothing leaves the buffer, so admission decisions are the same
    as if each arrival had been its own event.
    """

    mode: TrafficMode
    rate: float  # packets per second, Poisson only
    rng: RandomStream | None = None
    next_arrival: int = 0
    generated: int = 0

    def __post_init__(self):
        if self.mode is TrafficMode.POISSON:
            if not self.rate > 0:
                raise ValueError("Poisson source needs a positive rate")
            self.next_arrival = next_interarrival(self.rng, self.rate)

    def pull(self, now: int, buffer: TxBuffer) -> None:
        if self.mode is TrafficMode.FULL_BUFFER:
            while len(buffer.queue) < buffer.capacity:
                buffer.queue.append((self.generated, now))
                self.generated += 1
            return
        t = self.next_arrival
        if t > now:
            return
        q = buffer.queue
        cap = buffer.capacity
        rng, rate = self.rng, self.rate
        pid = self.generated
        while t <= now:
            if len(q) < cap:
                q.append((pid, t))
            else:
                buffer.drops += 1
                buffer.drop_ticks.append(t)
            pid += 1
            t += next_interarrival(rng, rate)
        self.generated = pid
        self.next_arrival = t
