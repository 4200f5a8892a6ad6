"""Load sweeps with replications.

Run ``(point i, replication r)`` uses seed ``derive_seed(master_seed, i, r)``
so any single run can be reproduced on its own with ``simulate --seed``.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from statistics import fmean

from mlosim.config import ScenarioConfig
from mlosim.errors import ConfigError
from mlosim.sim import derive_seed, run_point
from mlosim.stats import RunReport


@dataclass(frozen=True)
class SweepSpec:
    loads: tuple  # each entry: float for every BSS, or a tuple with one value per BSS
    reps: int = 1

    def __post_init__(self):
        if not self.loads:
            raise ConfigError("sweep needs at least one load point", key="--loads")
        if self.reps < 1:
            raise ConfigError("replications must be >= 1", key="--reps")


def parse_loads(text: str) -> tuple:
    """``0.1,0.3,0.5`` or per-BSS triples ``0.9/0.7/0.1,50%/70%/50%``."""

    def one(tok: str) -> float:
        tok = tok.strip()
        if tok.endswith("%"):
            return float(tok[:-1]) / 100
        return float(tok)

    points = []
    try:
        for item in text.split(","):
            item = item.strip()
            if not item:
                continue
            if "/" in item:
                points.append(tuple(one(t) for t in item.split("/")))
            else:
                points.append(one(item))
    except ValueError as exc:
        raise ConfigError(f"bad load list {text!r}: {exc}", key="--loads") from None
    if not points:
        raise ConfigError("empty load list", key="--loads")
    return tuple(points)


@dataclass
class SweepPoint:
    index: int
    loads: object
    config: ScenarioConfig
    seeds: list[int]
    reports: list[RunReport] = field(default_factory=list)

    def aggregate(self, bss_name: str, attr: str) -> tuple[float, float, float] | None:
        """(mean, min, max) of one BssReport attribute across replications."""
        values = [getattr(r.by_name(bss_name), attr) for r in self.reports]
        values = [v for v in values if v is not None]
        if not values:
            return None
        return fmean(values), min(values), max(values)

    def mean_report(self) -> RunReport:
        """Replication-averaged report (absent values stay absent)."""
        first = self.reports[0]
        if len(self.reports) == 1:
            return first
        bss = []
        for b in first.bss:
            fields_ = {}
            for attr in ("throughput_mbps", "delay_mean_ms", "delay_p1_ms", "delay_p50_ms", "delay_p99_ms",
                         "delay_min_ms", "delay_max_ms", "drops", "delivered", "collisions"):
                agg = self.aggregate(b.name, attr)
                fields_[attr] = None if agg is None else agg[0]
            bss.append(replace(b, **fields_))
        util = {cid: fmean(r.channel_util[cid] for r in self.reports) for cid in first.channel_util}
        return replace(first, bss=bss, channel_util=util,
                       trace_records=sum(r.trace_records for r in self.reports) // len(self.reports))


def sweep(cfg: ScenarioConfig, spec: SweepSpec, workers: int = 1) -> list[SweepPoint]:
    points = []
    jobs = []
    for i, loads in enumerate(spec.loads):
        pcfg = cfg.with_loads(loads)
        seeds = [derive_seed(cfg.seed, i, r) for r in range(spec.reps)]
        points.append(SweepPoint(i, loads, pcfg, seeds))
        jobs.extend((pcfg, s) for s in seeds)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            reports = list(pool.map(run_point, jobs))
    else:
        reports = [run_point(j) for j in jobs]
    it = iter(reports)
    for p in points:
        p.reports = [next(it) for _ in p.seeds]
    return points
