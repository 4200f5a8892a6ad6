"""Discrete-event simulator of Wi-Fi 7 multi-link channel access (SL, MLSR, MLMR)."""

from mlosim.phy import PhyMacParams
from mlosim.config import ScenarioConfig, parse_config, emit_config, load_config
from mlosim.sim import Simulation, build_scenario, run
from mlosim.stats import RunReport, BssReport

__all__ = [
    "PhyMacParams",
    "ScenarioConfig",
    "parse_config",
    "emit_config",
    "load_config",
    "Simulation",
    "build_scenario",
    "run",
    "RunReport",
    "BssReport",
]

__version__ = "0.1.0"
