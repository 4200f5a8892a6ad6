"""Throughput, delay percentiles, drops and channel utilization of a finished run."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

import numpy as np

from mlosim.phy import TICKS_PER_S

log = logging.getLogger(__name__)

MIN_TRACE_RECORDS = 150_000
TICKS_PER_MS = 1_000_000


def percentile(sorted_values: Sequence[float], p: float) -> float | None:
    """Nearest-rank percentile of an ascending sample; None for an empty one."""
    n = len(sorted_values)
    if n == 0:
        return None
    if not 0 <= p <= 1:
        raise ValueError(f"percentile p={p} outside [0, 1]")
    k = math.ceil(Fraction(str(p)) * n) - 1
    return sorted_values[max(k, 0)]


@dataclass
class BssReport:
    name: str
    policy: str
    links: int
    channels: tuple[int, ...]
    load_fraction: float | None  # None = full buffer
    offered_mbps: float | None
    throughput_mbps: float
    delivered: int
    delay_mean_ms: float | None
    delay_p1_ms: float | None
    delay_p50_ms: float | None
    delay_p99_ms: float | None
    delay_min_ms: float | None
    delay_max_ms: float | None
    drops: int
    collisions: int


@dataclass
class RunReport:
    scenario: str
    seed: int
    duration_s: float
    warmup_s: float
    config_hash: str
    bss: list[BssReport]
    channel_util: dict[int, float]
    trace_records: int
    warnings: list[str] = field(default_factory=list)

    @property
    def total_throughput_mbps(self) -> float:
        return sum(b.throughput_mbps for b in self.bss)

    def by_name(self, name: str) -> BssReport:
        for b in self.bss:
            if b.name == name:
                return b
        raise KeyError(name)


def delay_summary(delays_ticks: np.ndarray) -> dict[str, float | None]:
    if delays_ticks.size == 0:
        return dict(mean=None, p1=None, p50=None, p99=None, min=None, max=None)
    d = np.sort(delays_ticks)
    ms = lambda v: float(v) / TICKS_PER_MS  # noqa: E731
    return dict(
        mean=float(d.mean()) / TICKS_PER_MS,
        p1=ms(percentile(d, 0.01)),
        p50=ms(percentile(d, 0.50)),
        p99=ms(percentile(d, 0.99)),
        min=ms(d[0]),
        max=ms(d[-1]),
    )


def finalize(sim) -> RunReport:
    """Reduce the record streams of a finished :class:`~mlosim.sim.Simulation`."""
    cfg = sim.config
    start, end = sim.warmup_ticks, sim.end_ticks
    window_s = (end - start) / TICKS_PER_S
    frame_bits = cfg.phy.frame_bits
    reports = []
    trace_records = 0
    for bss, spec in zip(sim.bsss, cfg.bss):
        arrival = np.frombuffer(bss.rec_arrival, dtype=np.int64)
        delivery = np.frombuffer(bss.rec_delivery, dtype=np.int64)
        trace_records += delivery.size
        in_window = (delivery >= start) & (delivery <= end)
        bits = int(np.count_nonzero(in_window)) * frame_bits
        throughput = bits / window_s / 1e6 if window_s > 0 else 0.0
        measured = (arrival >= start) & (delivery <= end)
        ds = delay_summary(delivery[measured] - arrival[measured])
        drops = sum(1 for t in bss.buffer.drop_ticks if t >= start)
        load = spec.load if spec.traffic == "poisson" else None
        offered = load * cfg.reference_mbps if load is not None else None
        reports.append(BssReport(
            name=bss.name,
            policy=bss.policy.value,
            links=len(bss.interfaces),
            channels=tuple(bss.channels),
            load_fraction=load,
            offered_mbps=offered,
            throughput_mbps=throughput,
            delivered=int(np.count_nonzero(measured)),
            delay_mean_ms=ds["mean"],
            delay_p1_ms=ds["p1"],
            delay_p50_ms=ds["p50"],
            delay_p99_ms=ds["p99"],
            delay_min_ms=ds["min"],
            delay_max_ms=ds["max"],
            drops=drops,
            collisions=sum(i.collisions for i in bss.interfaces),
        ))
    util = {}
    for cid in sorted(sim.medium.channels):
        busy = sim.medium.busy_ticks(cid, start, end)
        util[cid] = busy / (end - start) if end > start else 0.0
    warnings = []
    if trace_records < MIN_TRACE_RECORDS:
        msg = f"small sample: {trace_records} delivery records (< {MIN_TRACE_RECORDS})"
        warnings.append(msg)
        log.info(msg)
    return RunReport(
        scenario=cfg.preset,
        seed=sim.seed,
        duration_s=cfg.duration_s,
        warmup_s=cfg.warmup_s,
        config_hash=cfg.digest(),
        bss=reports,
        channel_util=util,
        trace_records=trace_records,
        warnings=warnings,
    )
