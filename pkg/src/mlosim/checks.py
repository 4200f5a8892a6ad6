"""Post-run invariant checks over a finished Simulation.

Each check returns a list of human-readable violations; empty means OK.
"""

from __future__ import annotations

from mlosim.mac import AccessPolicy
from mlosim.medium import OccupancyKind
from mlosim.phy import TICKS_PER_US


def packet_conservation(sim) -> list[str]:
    out = []
    for name, (generated, accounted) in sim.conservation().items():
        if generated != accounted:
            out.append(f"BSS {name}: {generated} generated but {accounted} accounted for")
    return out


def channel_non_overlap(sim) -> list[str]:
    out = []
    for cid, ch in sim.medium.channels.items():
        prev = None
        for rec in ch.records:
            if rec.duration <= 0:
                out.append(f"ch{cid}: non-positive duration at {rec.start}")
            if prev is not None and rec.start < prev.end:
                out.append(f"ch{cid}: record at {rec.start} overlaps previous ending {prev.end}")
            prev = rec
    return out


def busy_time_conservation(sim) -> list[str]:
    """Busy time of each channel equals the sum of its exchange and collision durations."""
    out = []
    ex = sim.medium.exchange_ticks
    coll = sim.medium.collision_ticks
    for cid, ch in sim.medium.channels.items():
        expected = sum(ex[r.n_mpdu] if r.kind is OccupancyKind.EXCHANGE else coll for r in ch.records)
        total = sum(r.duration for r in ch.records)
        if expected != total:
            out.append(f"ch{cid}: busy {total} != expected {expected}")
    return out


def _transmissions(sim):
    per_bss = {b.name: [] for b in sim.bsss}
    for ch in sim.medium.channels.values():
        for rec in ch.records:
            for who in rec.transmitters:
                per_bss[who.bss.name].append((rec.start, rec.end))
    return per_bss


def mlsr_single_transmission(sim) -> list[str]:
    """At most one interface of an MLSR BSS occupies the medium at any instant."""
    out = []
    per_bss = _transmissions(sim)
    for bss in sim.bsss:
        if bss.policy is not AccessPolicy.MLSR:
            continue
        if bss.max_active_tx > 1:
            out.append(f"BSS {bss.name}: {bss.max_active_tx} concurrent transmissions")
        ivs = sorted(per_bss[bss.name])
        for (s0, e0), (s1, _) in zip(ivs, ivs[1:]):
            if s1 < e0:
                out.append(f"BSS {bss.name}: transmissions at {s0} and {s1} overlap")
                break
    return out


def mlmr_concurrency_bound(sim) -> list[str]:
    out = []
    for bss in sim.bsss:
        if bss.max_active_tx > len(bss.interfaces):
            out.append(f"BSS {bss.name}: {bss.max_active_tx} transmissions on {len(bss.interfaces)} links")
    return out


def fifo_delivery(sim) -> list[str]:
    """SL/MLSR: delivery time is non-decreasing in packet (arrival) order."""
    out = []
    for bss in sim.bsss:
        if bss.policy is AccessPolicy.MLMR:
            continue
        pairs = sorted(zip(bss.rec_pid, bss.rec_delivery))
        last = -1
        for pid, dlv in pairs:
            if dlv < last:
                out.append(f"BSS {bss.name}: packet {pid} delivered before an earlier packet")
                break
            last = dlv
    return out


def positive_delays(sim) -> list[str]:
    out = []
    floor = sim.medium.exchange_ticks[1]
    for bss in sim.bsss:
        for arr, dlv in zip(bss.rec_arrival, bss.rec_delivery):
            if dlv - arr < floor:
                out.append(f"BSS {bss.name}: delay {dlv - arr} ns below one exchange ({floor} ns)")
                break
    return out


def exchange_envelope(sim, lo_us: int = 200, hi_us: int = 3600) -> list[str]:
    out = []
    lo, hi = lo_us * TICKS_PER_US, hi_us * TICKS_PER_US
    for cid, ch in sim.medium.channels.items():
        for rec in ch.records:
            if rec.kind is OccupancyKind.EXCHANGE and not lo <= rec.duration <= hi:
                out.append(f"ch{cid}: exchange of {rec.duration} ns outside [{lo}, {hi}]")
                break
    return out


ALL_CHECKS = {
    "packet_conservation": packet_conservation,
    "channel_non_overlap": channel_non_overlap,
    "busy_time_conservation": busy_time_conservation,
    "mlsr_single_transmission": mlsr_single_transmission,
    "mlmr_concurrency_bound": mlmr_concurrency_bound,
    "fifo_delivery": fifo_delivery,
    "positive_delays": positive_delays,
    "exchange_envelope": exchange_envelope,
}


def run_all(sim) -> dict[str, list[str]]:
    return {name: fn(sim) for name, fn in ALL_CHECKS.items()}
