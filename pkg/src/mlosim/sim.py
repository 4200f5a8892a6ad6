"""Wire a scenario config into BSSs, channels and sources, and run the event loop."""

from __future__ import annotations

import hashlib
from dataclasses import replace

from mlosim.config import ScenarioConfig
from mlosim.engine import EventKind, EventQueue
from mlosim.errors import MloSimError, ProtocolViolation
from mlosim.mac import AccessPolicy, Bss
from mlosim.medium import Medium
from mlosim.phy import TICKS_PER_S, collision_duration, exchange_table, us_to_ticks
from mlosim.stats import RunReport, finalize
from mlosim.traffic import (PURPOSE_BACKOFF, PURPOSE_TRAFFIC, RandomStream, TrafficMode, TrafficSource,
                            load_to_rate)


def seconds_to_ticks(s: float) -> int:
    return round(s * TICKS_PER_S)


def derive_seed(master_seed: int, point: int, replication: int) -> int:
    """Seed of one sweep run: first 8 bytes of sha256("master:point:replication")."""
    digest = hashlib.sha256(f"{master_seed}:{point}:{replication}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


class Simulation:
    def __init__(self, config: ScenarioConfig, seed: int | None = None):
        self.config = config
        self.seed = config.seed if seed is None else seed
        p = config.phy
        self.queue = EventQueue()
        channel_ids = sorted({c for b in config.bss for c in b.channels} | {1, 2, 3})
        self.medium = Medium(self.queue, channel_ids,
                             [us_to_ticks(d) for d in exchange_table(p)],
                             us_to_ticks(collision_duration(p)))
        self.end_ticks = seconds_to_ticks(config.duration_s)
        self.warmup_ticks = seconds_to_ticks(config.warmup_s)
        reference_bps = config.reference_mbps * 1e6
        self.bsss: list[Bss] = []
        for index, spec in enumerate(config.bss):
            if spec.traffic == "full":
                source = TrafficSource(TrafficMode.FULL_BUFFER, 0.0)
            else:
                rate = load_to_rate(spec.load, reference_bps, p.frame_bits)
                source = TrafficSource(TrafficMode.POISSON, rate, RandomStream(self.seed, index, PURPOSE_TRAFFIC))
            self.bsss.append(Bss(
                spec.name, index, AccessPolicy(spec.policy), list(spec.channels), self.queue, self.medium,
                source, RandomStream(self.seed, index, PURPOSE_BACKOFF),
                buffer_capacity=p.buffer_capacity, max_ampdu=p.max_ampdu, cw_min=p.cw_min,
                slot_ticks=us_to_ticks(p.slot), difs_ticks=us_to_ticks(p.difs),
                exponential_backoff=config.exponential_backoff,
                mlsr_resume=config.mlsr_backoff == "resume",
            ))
        self.finished = False

    def run(self) -> RunReport:
        self.queue.schedule_at(self.end_ticks, EventKind.SIM_END)
        for bss in self.bsss:
            bss.start()
        run_events(self.queue, self.medium)
        for bss in self.bsss:
            bss.sync()
        self.finished = True
        return finalize(self)

    # post-run checks, used by the test suite and the CLI --check flag
    def conservation(self) -> dict[str, tuple[int, int]]:
        """Per BSS: (generated, delivered + dropped + buffered + in flight)."""
        out = {}
        for bss in self.bsss:
            accounted = len(bss.rec_delivery) + bss.buffer.drops + len(bss.buffer) + bss.in_flight
            out[bss.name] = (bss.source.generated, accounted)
        return out


def run_events(queue: EventQueue, medium: Medium, until: int | None = None) -> int:
    """Dispatch events until SIM_END, an empty queue, or the clock would pass ``until``.

    Returns the number of events handled.
    """
    handled = 0
    K_EXP, K_ARR, K_RES = EventKind.BACKOFF_EXPIRY, EventKind.PACKET_ARRIVAL, EventKind.SEIZE_RESOLVE
    K_END = EventKind.SIM_END
    while True:
        if until is not None:
            t = queue.peek_time()
            if t is None or t > until:
                break
        ev = queue.next()
        if ev is None or ev.kind is K_END:
            break
        kind = ev.kind
        handled += 1
        try:
            if kind is K_EXP:
                ev.target.bss.on_backoff_expired(ev.target)
            elif kind is K_RES:
                medium.resolve(ev.target)
            elif kind is K_ARR:
                ev.target.on_packet_arrival()
            else:  # TX_END, CHANNEL_IDLE
                medium.end_occupancy(ev.target, ev.payload)
        except MloSimError:
            raise
        except Exception as exc:
            raise ProtocolViolation(f"{type(exc).__name__}: {exc} while handling {ev!r}", time=queue.now,
                                    bss=getattr(ev.target, "bss", ev.target), interface=ev.target) from exc
    return handled


def build_scenario(cfg: ScenarioConfig, seed: int | None = None) -> Simulation:
    return Simulation(cfg, seed)


def run(cfg: ScenarioConfig, seed: int | None = None) -> RunReport:
    return Simulation(cfg, seed).run()


def run_point(args) -> RunReport:
    """Picklable entry point for worker processes: (cfg, seed)."""
    cfg, seed = args
    return Simulation(replace(cfg, seed=seed)).run()
