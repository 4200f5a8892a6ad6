"""PHY/MAC constants and airtime of data PPDUs, control frames and full exchanges.

All durations are returned as integer microseconds. The simulator runs on
nanosecond ticks; use :func:`us_to_ticks` to convert.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from fractions import Fraction

from mlosim.errors import ConfigError

TICKS_PER_US = 1000
TICKS_PER_S = 1_000_000_000


def us_to_ticks(us: int) -> int:
    return us * TICKS_PER_US


@dataclass(frozen=True)
class PhyMacParams:
    # PHY: 20 MHz, 1024-QAM 5/6, 2 spatial streams (HE numerology, 234 data tones)
    channel_width: int = 20  # [MHz]
    bits_per_qam_symbol: int = 10
    coding_rate: Fraction = Fraction(5, 6)
    spatial_streams: int = 2
    data_subcarriers: int = 234
    legacy_preamble: int = 20  # [us]
    he_su_preamble: int = 52  # [us]
    ofdm_symbol: int = 16  # [us]
    legacy_symbol: int = 4  # [us]
    # MAC
    sifs: int = 16  # [us]
    difs: int = 34  # [us]
    slot: int = 9  # [us]
    service_bits: int = 32
    mac_header_bits: int = 272
    tail_bits: int = 6
    delimiter_bits: int = 32
    ack_bits: int = 112
    back_bits: int = 256
    rts_bits: int = 160
    cts_bits: int = 112
    frame_bits: int = 12000
    max_ampdu: int = 64
    cw_min: int = 15
    buffer_capacity: int = 1000  # [packets]
    legacy_control_rate: int = 96  # [bits per legacy symbol], i.e. 24 Mbps

    def __post_init__(self):
        if not isinstance(self.coding_rate, Fraction):
            object.__setattr__(self, "coding_rate", Fraction(self.coding_rate))
        if self.coding_rate <= 0:
            raise ConfigError("coding_rate must be positive", key="phy.coding_rate")
        for f in fields(self):
            if f.name == "coding_rate":
                continue
            value = getattr(self, f.name)
            if not isinstance(value, int) or isinstance(value, bool):
                raise ConfigError(f"{f.name} must be an integer", key=f"phy.{f.name}")
            if value <= 0:
                raise ConfigError(f"{f.name} must be positive", key=f"phy.{f.name}")


def bits_per_ofdm_symbol(p: PhyMacParams) -> int:
    product = p.data_subcarriers * p.bits_per_qam_symbol * p.coding_rate * p.spatial_streams
    if Fraction(product).denominator != 1:
        raise ConfigError(
            f"data bits per OFDM symbol is not an integer ({product}); "
            "check data_subcarriers, bits_per_qam_symbol, coding_rate"
        )
    return int(product)


def _check_n_mpdu(n_mpdu: int, p: PhyMacParams) -> None:
    if not 1 <= n_mpdu <= p.max_ampdu:
        raise ValueError(f"n_mpdu={n_mpdu} outside [1, {p.max_ampdu}]")


def data_ppdu_duration(n_mpdu: int, p: PhyMacParams) -> int:
    """Airtime [us] of an A-MPDU carrying ``n_mpdu`` frames."""
    _check_n_mpdu(n_mpdu, p)
    payload = p.service_bits + n_mpdu * (p.delimiter_bits + p.mac_header_bits + p.frame_bits) + p.tail_bits
    n_sym = -(-payload // bits_per_ofdm_symbol(p))
    return p.legacy_preamble + p.he_su_preamble + n_sym * p.ofdm_symbol


def control_frame_duration(bits: int, p: PhyMacParams) -> int:
    if bits <= 0:
        raise ValueError("control frame must carry a positive number of bits")
    return p.legacy_preamble + -(-bits // p.legacy_control_rate) * p.legacy_symbol


def exchange_duration(n_mpdu: int, p: PhyMacParams) -> int:
    """RTS + SIFS + CTS + SIFS + DATA + SIFS + BACK, in microseconds."""
    data = data_ppdu_duration(n_mpdu, p)
    return (
        control_frame_duration(p.rts_bits, p)
        + p.sifs
        + control_frame_duration(p.cts_bits, p)
        + p.sifs
        + data
        + p.sifs
        + control_frame_duration(p.back_bits, p)
    )


def collision_duration(p: PhyMacParams) -> int:
    """Channel time lost to an RTS collision: one RTS plus DIFS."""
    return control_frame_duration(p.rts_bits, p) + p.difs


def saturation_throughput_oracle(p: PhyMacParams) -> float:
    """Closed-form contention-free full-buffer throughput in bits per second.

    One cycle is DIFS, the mean backoff and a full-size exchange. Only used
    to cross-check the simulator.
    """
    cycle_us = p.difs + Fraction(p.cw_min, 2) * p.slot + exchange_duration(p.max_ampdu, p)
    return float(Fraction(p.max_ampdu * p.frame_bits) / cycle_us * 1_000_000)


def exchange_table(p: PhyMacParams) -> list[int]:
    """exchange_duration for every A-MPDU size, index 0 unused."""
    return [0] + [exchange_duration(n, p) for n in range(1, p.max_ampdu + 1)]
