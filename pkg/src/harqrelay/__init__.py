"""Monte Carlo simulator for relay selection in two-hop incremental-redundancy HARQ."""
__version__ = "0.1.0"

from .config import ConfigError, SimConfig, preset
from .engine import Metrics, PacketOutcome, measure_lav, run_campaign, sweep, throughput
from .protocol import ContentionConfig, Strategy
from .topology import PathLossParams, Topology, path_gain, place_relays

__all__ = [
    "ConfigError",
    "ContentionConfig",
    "Metrics",
    "PacketOutcome",
    "PathLossParams",
    "SimConfig",
    "Strategy",
    "Topology",
    "measure_lav",
    "path_gain",
    "place_relays",
    "preset",
    "run_campaign",
    "sweep",
    "throughput",
]
