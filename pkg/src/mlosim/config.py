"""Scenario configuration: flat ``section.key = value`` text with ``#`` comments.

Schema (every key optional unless noted)::

    scenario.preset          I | II | III | custom            (default I)
    scenario.policy          SL | MLSR | MLMR                 policy of the MLO BSS(s)
    scenario.links           1..3                             interfaces of the MLO BSS(s)
    scenario.traffic         poisson | full                   default traffic of every BSS
    scenario.load            float in (0, 1.5]                default load, fraction of reference_mbps
    scenario.reference_mbps  float                            load normalisation (default 218)
    sim.duration_s           float > 0                        (default 100)
    sim.warmup_s             float >= 0, < duration           (default 1)
    sim.seed                 int >= 0                         (default 1)
    sim.replications         int >= 1                         (default 1)
    mac.exponential_backoff  true | false                     (default false)
    mac.mlsr_backoff         resume | restart                 sibling backoff after an MLSR
                                                              transmission (default resume)
    phy.<field>              any PhyMacParams field           (default: table values)
    bss.<NAME>.policy        SL | MLSR | MLMR
    bss.<NAME>.channels      comma separated channel ids, e.g. 1,2
    bss.<NAME>.traffic       poisson | full
    bss.<NAME>.load          float in (0, 1.5]

Presets expand into BSS definitions (I: A; II: A, B; III: A, B, C) which
``bss.*`` keys may then override; the preset topology rules are checked
after the overrides. The fixed MCS corresponds to a 5 m link at 20 dBm with
65.40 dB residential path loss (-45.4 dBm received); no channel model is run.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field, fields, replace
from fractions import Fraction
from pathlib import Path

from mlosim.errors import ConfigError
from mlosim.phy import PhyMacParams

PRESETS = ("I", "II", "III", "custom")
POLICIES = ("SL", "MLSR", "MLMR")
TRAFFIC = ("poisson", "full")
CHANNEL_IDS = (1, 2, 3)
MAX_LINKS = 3


@dataclass(frozen=True)
class BssSpec:
    name: str
    policy: str
    channels: tuple[int, ...]
    traffic: str = "poisson"
    load: float = 0.5

    @property
    def links(self) -> int:
        return len(self.channels)


@dataclass(frozen=True)
class ScenarioConfig:
    preset: str = "I"
    policy: str = "SL"
    links: int = 1
    traffic: str = "poisson"
    load: float = 0.5
    reference_mbps: float = 218.0
    duration_s: float = 100.0
    warmup_s: float = 1.0
    seed: int = 1
    replications: int = 1
    exponential_backoff: bool = False
    mlsr_backoff: str = "resume"
    phy: PhyMacParams = field(default_factory=PhyMacParams)
    bss: tuple[BssSpec, ...] = ()

    def digest(self) -> str:
        return hashlib.sha256(emit_config(self).encode()).hexdigest()[:12]

    def with_loads(self, loads) -> "ScenarioConfig":
        """Copy with new Poisson loads: a scalar for every BSS, or one value per BSS."""
        if isinstance(loads, (int, float)):
            loads = [float(loads)] * len(self.bss)
        loads = list(loads)
        if len(loads) != len(self.bss):
            raise ConfigError(f"{len(loads)} loads given for {len(self.bss)} BSSs")
        for x in loads:
            _check_load(x, "load")
        new_bss = tuple(replace(b, load=float(x), traffic="poisson") for b, x in zip(self.bss, loads))
        return replace(self, bss=new_bss)

    def with_traffic(self, traffic: str) -> "ScenarioConfig":
        return replace(self, bss=tuple(replace(b, traffic=traffic) for b in self.bss))


def _check_load(x: float, key: str, line=None) -> None:
    if not 0 < x <= 1.5:
        raise ConfigError(f"load {x} outside (0, 1.5]", key=key, line=line)


def _parse_bool(text: str) -> bool:
    t = text.lower()
    if t in ("true", "yes", "1", "on"):
        return True
    if t in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


def _parse_channels(text: str) -> tuple[int, ...]:
    return tuple(int(c) for c in text.replace(" ", "").split(",") if c)


def _parse_choice(choices):
    def parse(text: str) -> str:
        for c in choices:
            if text.lower() == c.lower():
                return c
        raise ValueError(f"expected one of {', '.join(choices)}, got {text!r}")
    return parse


def _parse_fraction(text: str) -> Fraction:
    return Fraction(text)


_SCALAR_KEYS = {
    "scenario.preset": ("preset", _parse_choice(PRESETS)),
    "scenario.policy": ("policy", _parse_choice(POLICIES)),
    "scenario.links": ("links", int),
    "scenario.traffic": ("traffic", _parse_choice(TRAFFIC)),
    "scenario.load": ("load", float),
    "scenario.reference_mbps": ("reference_mbps", float),
    "sim.duration_s": ("duration_s", float),
    "sim.warmup_s": ("warmup_s", float),
    "sim.seed": ("seed", int),
    "sim.replications": ("replications", int),
    "mac.exponential_backoff": ("exponential_backoff", _parse_bool),
    "mac.mlsr_backoff": ("mlsr_backoff", _parse_choice(("resume", "restart"))),
}

_BSS_KEYS = {
    "policy": _parse_choice(POLICIES),
    "channels": _parse_channels,
    "traffic": _parse_choice(TRAFFIC),
    "load": float,
}

_PHY_FIELDS = {f.name for f in fields(PhyMacParams)}


def parse_config(text: str) -> ScenarioConfig:
    """Parse and validate a configuration text; unset PHY/MAC fields keep table defaults."""
    top: dict = {}
    phy: dict = {}
    bss_over: dict[str, dict] = {}
    bss_order: list[str] = []
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError("expected 'section.key = value'", line=lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if not value:
            raise ConfigError("missing value", key=key, line=lineno)
        if key in lines:
            raise ConfigError("duplicate key", key=key, line=lineno)
        lines[key] = lineno
        try:
            if key in _SCALAR_KEYS:
                attr, conv = _SCALAR_KEYS[key]
                top[attr] = conv(value)
            elif key.startswith("phy."):
                name = key[4:]
                if name not in _PHY_FIELDS:
                    raise ConfigError("unknown key", key=key, line=lineno)
                phy[name] = _parse_fraction(value) if name == "coding_rate" else int(value)
            elif key.startswith("bss."):
                parts = key.split(".")
                if len(parts) != 3 or parts[2] not in _BSS_KEYS or not parts[1]:
                    raise ConfigError("unknown key", key=key, line=lineno)
                name, attr = parts[1], parts[2]
                if name not in bss_over:
                    bss_over[name] = {}
                    bss_order.append(name)
                bss_over[name][attr] = _BSS_KEYS[attr](value)
            else:
                raise ConfigError("unknown key", key=key, line=lineno)
        except ConfigError:
            raise
        except (ValueError, ZeroDivisionError) as exc:
            raise ConfigError(f"bad value {value!r}: {exc}", key=key, line=lineno) from None
    try:
        phy_params = PhyMacParams(**phy)
    except ConfigError as exc:
        raise ConfigError(str(exc), line=lines.get(exc.key)) from None
    cfg = ScenarioConfig(**top, phy=phy_params)
    return _expand(cfg, bss_over, bss_order, lines)


def _preset_bss(cfg: ScenarioConfig) -> list[BssSpec]:
    mlo = tuple(range(1, cfg.links + 1))
    common = dict(traffic=cfg.traffic, load=cfg.load)
    if cfg.preset == "I":
        return [BssSpec("A", cfg.policy, mlo, **common)]
    if cfg.preset == "II":
        return [BssSpec("A", cfg.policy, mlo, **common), BssSpec("B", cfg.policy, mlo, **common)]
    if cfg.preset == "III":
        return [
            BssSpec("A", "SL", (1,), **common),
            BssSpec("B", cfg.policy, (1, 2), **common),
            BssSpec("C", "SL", (2,), **common),
        ]
    return []


def _expand(cfg: ScenarioConfig, overrides: dict, order: list[str], lines: dict) -> ScenarioConfig:
    def err(msg, key):
        return ConfigError(msg, key=key, line=lines.get(key))

    if cfg.duration_s <= 0:
        raise err("duration must be positive", "sim.duration_s")
    if not 0 <= cfg.warmup_s < cfg.duration_s:
        raise err("warm-up must lie in [0, duration)", "sim.warmup_s")
    if cfg.seed < 0:
        raise err("seed must be non-negative", "sim.seed")
    if cfg.replications < 1:
        raise err("replications must be >= 1", "sim.replications")
    if cfg.reference_mbps <= 0:
        raise err("reference throughput must be positive", "scenario.reference_mbps")
    if not 1 <= cfg.links <= MAX_LINKS:
        raise err(f"links must be in 1..{MAX_LINKS}", "scenario.links")
    _check_load(cfg.load, "scenario.load", lines.get("scenario.load"))

    specs = {b.name: b for b in _preset_bss(cfg)}
    names = list(specs)
    for name in order:
        over = overrides[name]
        if name in specs:
            specs[name] = replace(specs[name], **over)
            continue
        if cfg.preset != "custom":
            raise err(f"BSS {name} is not part of scenario {cfg.preset}", f"bss.{name}.{next(iter(over))}")
        missing = {"policy", "channels"} - set(over)
        if missing:
            raise err(f"BSS {name} needs {' and '.join(sorted(missing))}", f"bss.{name}.{sorted(missing)[0]}")
        specs[name] = BssSpec(name, **{"traffic": cfg.traffic, "load": cfg.load, **over})
        names.append(name)
    bss = tuple(specs[n] for n in names)
    if not bss:
        raise err("custom scenario defines no BSS", "scenario.preset")

    for b in bss:
        _check_load(b.load, f"bss.{b.name}.load", lines.get(f"bss.{b.name}.load"))
        ch_key = f"bss.{b.name}.channels"
        if not b.channels:
            raise err(f"BSS {b.name} has no channel", ch_key)
        if len(set(b.channels)) != len(b.channels):
            raise err(f"BSS {b.name} lists a channel twice", ch_key)
        for c in b.channels:
            if c not in CHANNEL_IDS:
                raise err(f"channel {c} does not exist (valid: 1..{len(CHANNEL_IDS)})", ch_key)
        if b.policy == "SL" and len(b.channels) != 1:
            raise err(f"SL BSS {b.name} must use exactly one channel", ch_key)
    _check_preset(cfg.preset, cfg.policy, cfg.links, bss, err)
    return replace(cfg, bss=bss)


def _check_preset(preset, policy, links, bss, err) -> None:
    by = {b.name: b for b in bss}
    if preset == "I":
        a = by["A"]
        if a.channels != tuple(range(1, len(a.channels) + 1)):
            raise err("scenario I uses channels {1}, {1,2} or {1,2,3}", "bss.A.channels")
        if policy == "SL" and links != 1:
            raise err("SL needs links = 1", "scenario.links")
    elif preset == "II":
        if policy == "SL":
            raise err("scenario II needs an MLO policy (MLSR or MLMR)", "scenario.policy")
        for name in ("A", "B"):
            if by[name].policy == "SL":
                raise err("scenario II BSSs must be MLO", f"bss.{name}.policy")
        if by["A"].channels != by["B"].channels:
            raise err("scenario II BSSs must use identical channel sets", "bss.B.channels")
    elif preset == "III":
        if by["A"].policy != "SL" or by["A"].channels != (1,):
            raise err("scenario III BSS A is SL on channel 1", "bss.A.channels")
        if by["C"].policy != "SL" or by["C"].channels != (2,):
            raise err("scenario III BSS C is SL on channel 2", "bss.C.channels")
        if by["B"].policy == "SL" or by["B"].channels != (1, 2):
            raise err("scenario III BSS B is MLO on channels 1,2", "bss.B.channels")
        if policy == "SL":
            raise err("scenario III needs an MLO policy for BSS B", "scenario.policy")
        if links != 2:
            raise err("scenario III BSS B has 2 links", "scenario.links")


def _fmt(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, tuple):
        return ",".join(str(v) for v in value)
    return str(value)


def emit_config(cfg: ScenarioConfig) -> str:
    """Render a config in fully expanded form; ``parse_config`` of the result equals ``cfg``."""
    out = ["# mlosim scenario configuration"]
    for key, (attr, _) in _SCALAR_KEYS.items():
        out.append(f"{key} = {_fmt(getattr(cfg, attr))}")
    for f in fields(PhyMacParams):
        out.append(f"phy.{f.name} = {_fmt(getattr(cfg.phy, f.name))}")
    for b in cfg.bss:
        for attr in ("policy", "channels", "traffic", "load"):
            out.append(f"bss.{b.name}.{attr} = {_fmt(getattr(b, attr))}")
    return "\n".join(out) + "\n"


def load_config(path) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise OSError(exc.errno, f"cannot read config {path}: {exc.strerror}") from None
    return parse_config(text)


def preset_config(preset: str, policy: str = "SL", links: int = 1, traffic: str = "poisson",
                  load: float = 0.5, **kw) -> ScenarioConfig:
    """Build a preset config programmatically (same validation as the text path)."""
    text = [f"scenario.preset = {preset}", f"scenario.policy = {policy}", f"scenario.links = {links}",
            f"scenario.traffic = {traffic}", f"scenario.load = {load!r}"]
    scalar_attr = {attr: key for key, (attr, _) in _SCALAR_KEYS.items()}
    for attr, value in kw.items():
        text.append(f"{scalar_attr[attr]} = {_fmt(value)}")
    return parse_config("\n".join(text))


__all__ = [
    "BssSpec",
    "ScenarioConfig",
    "parse_config",
    "emit_config",
    "load_config",
    "preset_config",
]
