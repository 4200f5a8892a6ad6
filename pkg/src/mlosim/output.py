"""CSV, delivery-trace and plain-text summary output."""

from __future__ import annotations

import csv
import io
from pathlib import Path
from typing import Iterable

from mlosim.stats import RunReport

CSV_COLUMNS = (
    "scenario", "policy", "bss", "links", "load_fraction", "offered_mbps", "throughput_mbps",
    "delay_mean_ms", "delay_p1_ms", "delay_p99_ms", "drops", "ch1_util", "ch2_util", "ch3_util",
    "seed", "duration_s",
)
TRACE_COLUMNS = ("packet_id", "bss", "bits", "arrival_ns", "delivery_ns")


def _num(v, digits=6) -> str:
    if v is None:
        return ""
    if isinstance(v, int):
        return str(v)
    return f"{v:.{digits}f}"


def report_rows(report: RunReport) -> list[list[str]]:
    rows = []
    for b in report.bss:
        rows.append([
            report.scenario,
            b.policy,
            b.name,
            str(b.links),
            "full" if b.load_fraction is None else _num(b.load_fraction, 4),
            _num(b.offered_mbps, 3),
            _num(b.throughput_mbps, 3),
            _num(b.delay_mean_ms),
            _num(b.delay_p1_ms),
            _num(b.delay_p99_ms),
            _num(round(b.drops) if b.drops is not None else None),
            *(_num(report.channel_util.get(c, 0.0)) for c in (1, 2, 3)),
            str(report.seed),
            _num(report.duration_s, 3),
        ])
    return rows


def to_csv(reports: Iterable[RunReport]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in reports:
        w.writerows(report_rows(r))
    return buf.getvalue()


def write_text(path, text: str) -> Path:
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None
    return path


def write_trace(path, sim) -> int:
    """Write every DeliveryRecord of a finished simulation; returns the row count."""
    path = Path(path)
    bits = sim.config.phy.frame_bits
    n = 0
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(TRACE_COLUMNS)
            for bss in sim.bsss:
                for pid, arr, dlv in zip(bss.rec_pid, bss.rec_arrival, bss.rec_delivery):
                    w.writerow((pid, bss.name, bits, arr, dlv))
                    n += 1
    except OSError as exc:
        raise OSError(exc.errno, f"cannot write {path}: {exc.strerror}") from None
    return n


def _ms(v) -> str:
    return "-" if v is None else f"{v:.2f}"


def summary(report: RunReport) -> str:
    lines = [
        f"scenario {report.scenario}  seed {report.seed}  duration {report.duration_s:g} s "
        f"(warm-up {report.warmup_s:g} s)  config {report.config_hash}",
        f"{'BSS':<4}{'policy':<7}{'links':>5}{'load':>7}{'thr[Mbps]':>11}{'mean[ms]':>10}"
        f"{'p1[ms]':>9}{'p99[ms]':>9}{'drops':>8}",
    ]
    for b in report.bss:
        load = "full" if b.load_fraction is None else f"{b.load_fraction * 100:.0f}%"
        lines.append(
            f"{b.name:<4}{b.policy:<7}{b.links:>5}{load:>7}{b.throughput_mbps:>11.1f}"
            f"{_ms(b.delay_mean_ms):>10}{_ms(b.delay_p1_ms):>9}{_ms(b.delay_p99_ms):>9}{round(b.drops):>8}"
        )
    util = "  ".join(f"ch{c} {u * 100:.1f}%" for c, u in report.channel_util.items())
    lines.append(f"channel utilization: {util}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    return "\n".join(lines) + "\n"


def sweep_summary(points) -> str:
    lines = []
    for p in points:
        loads = p.loads if isinstance(p.loads, tuple) else (p.loads,)
        head = "/".join(f"{x * 100:.0f}%" for x in loads)
        lines.append(f"point {p.index}: load {head}  ({len(p.reports)} rep(s))")
        for b in p.reports[0].bss:
            thr = p.aggregate(b.name, "throughput_mbps")
            p99 = p.aggregate(b.name, "delay_p99_ms")
            mean = p.aggregate(b.name, "delay_mean_ms")
            txt = f"  {b.name} {b.policy:<5} thr {thr[0]:.1f} Mbps [{thr[1]:.1f}, {thr[2]:.1f}]"
            if mean is not None:
                txt += f"  mean {mean[0]:.2f} ms  p99 {p99[0]:.2f} ms [{p99[1]:.2f}, {p99[2]:.2f}]"
            lines.append(txt)
    return "\n".join(lines) + "\n"
