"""Simulation configuration: defaults, validation, JSON round trip and presets."""
from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fec import RcpcFamily, default_family, load_masks
from .phy import NoiseParams, calibrate_tx_energy, db_to_linear
from .protocol import ContentionConfig, Strategy
from .topology import PathLossParams

SWEEP_AXES = ("feedback_prob", "gain_threshold_db", "avg_snr_db", "minislots", "n_relays")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    carrier_freq_hz: float = 2.4e9
    reference_distance_m: float = 1.0
    path_loss_exponent: float = 3.0
    source_dest_distance_m: float = 100.0
    n_relays: int = 20
    n0_db: float = -134.0
    avg_snr_db: float = 2.0
    minislots: int = 10
    feedback_prob: float | tuple[float, ...] = 0.3
    gain_threshold_db: float = -91.0
    winner_pool: str = "relay"
    strategy: str = "opportunistic"
    puncturing: str = "default"
    relay_combining: bool = True
    outage_policy: str = "drop"
    max_attempts: int = 1
    topology_mode: str = "campaign"
    topology_file: str | None = None
    n_packets: int = 2000
    seed: int = 1
    crn: bool = True
    sweep_axis: str | None = None
    sweep_values: tuple[float, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if isinstance(self.feedback_prob, list):
            object.__setattr__(self, "feedback_prob", tuple(float(p) for p in self.feedback_prob))
        if isinstance(self.sweep_values, list):
            object.__setattr__(self, "sweep_values", tuple(self.sweep_values))
        self.validate()

    def validate(self) -> None:
        def positive(name):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v) or v <= 0:
                raise ConfigError(f"{name} must be a positive number, got {v!r}")

        for name in ("carrier_freq_hz", "reference_distance_m", "source_dest_distance_m"):
            positive(name)
        if not (isinstance(self.path_loss_exponent, (int, float)) and self.path_loss_exponent >= 2):
            raise ConfigError(f"path_loss_exponent must be >= 2, got {self.path_loss_exponent!r}")
        for name in ("n0_db", "avg_snr_db", "gain_threshold_db"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
                raise ConfigError(f"{name} must be a finite number, got {v!r}")
        for name, low in (("n_relays", 1), ("minislots", 1), ("n_packets", 1), ("max_attempts", 1)):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, int) or v < low:
                raise ConfigError(f"{name} must be an integer >= {low}, got {v!r}")
        probs = self.feedback_prob if isinstance(self.feedback_prob, tuple) else (self.feedback_prob,)
        for p in probs:
            if isinstance(p, bool) or not isinstance(p, (int, float)) or not 0.0 <= p <= 1.0:
                raise ConfigError(f"feedback_prob must lie in [0, 1], got {p!r}")
        if isinstance(self.feedback_prob, tuple) and len(self.feedback_prob) != self.n_relays:
            raise ConfigError("per-relay feedback_prob needs one value per relay")
        choices = {
            "winner_pool": ("relay", "minislot"),
            "strategy": tuple(s.value for s in Strategy),
            "outage_policy": ("drop", "restart"),
            "topology_mode": ("campaign", "packet"),
        }
        for name, allowed in choices.items():
            if getattr(self, name) not in allowed:
                raise ConfigError(f"{name} must be one of {', '.join(allowed)}; got {getattr(self, name)!r}")
        if self.outage_policy == "drop" and self.max_attempts != 1:
            raise ConfigError("max_attempts > 1 requires outage_policy = 'restart'")
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")
        if self.sweep_axis is not None and self.sweep_axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {self.sweep_axis!r}; expected one of {', '.join(SWEEP_AXES)}")
        if self.sweep_axis is not None and not self.sweep_values:
            raise ConfigError("sweep_axis given without sweep_values")
        if self.topology_file is not None and self.topology_mode == "packet":
            raise ConfigError("a topology file fixes the deployment; use topology_mode = 'campaign'")
        for name in ("puncturing", "topology_file"):
            v = getattr(self, name)
            if v not in (None, "default") and not Path(v).is_file():
                raise ConfigError(f"{name} file not found: {v}")

    # derived parameter objects -------------------------------------------------

    def path_loss(self) -> PathLossParams:
        return PathLossParams.from_frequency(
            self.carrier_freq_hz,
            reference_distance_m=self.reference_distance_m,
            exponent=self.path_loss_exponent,
            source_dest_distance_m=self.source_dest_distance_m,
        )

    def noise(self) -> NoiseParams:
        n0 = float(db_to_linear(self.n0_db))
        energy = calibrate_tx_energy(self.avg_snr_db, self.source_dest_distance_m, self.path_loss(), n0)
        return NoiseParams(n0, energy)

    def contention(self) -> ContentionConfig:
        return ContentionConfig(
            minislots=self.minislots,
            feedback_prob=self.feedback_prob,
            gain_threshold=float(db_to_linear(self.gain_threshold_db)),
            winner_pool=self.winner_pool,
        )

    def family(self) -> RcpcFamily:
        if self.puncturing == "default":
            return default_family()
        return load_masks(self.puncturing)

    # serialisation -------------------------------------------------------------

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d["feedback_prob"] = list(self.feedback_prob) if isinstance(self.feedback_prob, tuple) else self.feedback_prob
        d["sweep_values"] = list(self.sweep_values)
        return d

    def point(self) -> "SimConfig":
        """This configuration stripped of sweep settings (one campaign)."""
        return dataclasses.replace(self, sweep_axis=None, sweep_values=())

    def config_hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()[:16]

    def replace(self, **changes) -> "SimConfig":
        return dataclasses.replace(self, **changes)

    def with_axis(self, axis: str, value) -> "SimConfig":
        if axis not in SWEEP_AXES:
            raise ConfigError(f"unknown sweep axis {axis!r}")
        if axis in ("minislots", "n_relays"):
            if float(value) != int(value):
                raise ConfigError(f"{axis} values must be integers")
            value = int(value)
        else:
            value = float(value)
        return dataclasses.replace(self, **{axis: value})


FIELD_NAMES = tuple(f.name for f in dataclasses.fields(SimConfig))


def config_from_dict(data: dict, base: SimConfig | None = None) -> SimConfig:
    unknown = set(data) - set(FIELD_NAMES)
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    base = base or SimConfig()
    values = dict(data)
    for name in ("n_relays", "minislots", "n_packets", "max_attempts", "seed"):
        v = values.get(name)
        if isinstance(v, float) and v.is_integer():
            values[name] = int(v)
    try:
        return dataclasses.replace(base, **values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path) -> SimConfig:
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError("config file must hold a JSON object")
    return config_from_dict(data)


def parse_assignment(text: str) -> tuple[str, object]:
    """Parse ``key=value`` with JSON-typed values (bare words become strings)."""
    if "=" not in text:
        raise ConfigError(f"expected KEY=VALUE, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if key not in FIELD_NAMES:
        raise ConfigError(f"unknown config key: {key}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key, value


def parse_sweep(text: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``AXIS=V1,V2,...``."""
    if "=" not in text:
        raise ConfigError(f"expected AXIS=V1,V2,..., got {text!r}")
    axis, raw = text.split("=", 1)
    axis = axis.strip()
    if axis not in SWEEP_AXES:
        raise ConfigError(f"unknown sweep axis {axis!r}; expected one of {', '.join(SWEEP_AXES)}")
    try:
        values = tuple(float(v) for v in raw.split(",") if v.strip())
    except ValueError as exc:
        raise ConfigError(f"bad sweep values {raw!r}") from exc
    if not values:
        raise ConfigError("sweep needs at least one value")
    return axis, values


def _grid(start: float, stop: float, step: float) -> tuple[float, ...]:
    n = int(round((stop - start) / step)) + 1
    return tuple(float(np.round(start + i * step, 10)) for i in range(n))


PRESETS = {
    "fig3": dict(
        sweep_axis="feedback_prob",
        sweep_values=_grid(0.05, 0.95, 0.05),
        minislots=10,
        gain_threshold_db=-91.0,
        avg_snr_db=2.0,
        strategies=("opportunistic",),
    ),
    "fig4": dict(
        sweep_axis="gain_threshold_db",
        sweep_values=_grid(-103.0, -79.0, 2.0),
        feedback_prob=0.1,
        minislots=10,
        avg_snr_db=2.0,
        strategies=("opportunistic",),
    ),
    "fig5": dict(
        sweep_axis="avg_snr_db",
        sweep_values=_grid(-2.0, 6.0, 2.0),
        feedback_prob=0.3,
        gain_threshold_db=-91.0,
        minislots=10,
        strategies=("opportunistic", "harbinger", "p2p"),
    ),
}


def preset(name: str, base: SimConfig | None = None) -> list[SimConfig]:
    """Sweep configurations (one per strategy) reproducing a figure."""
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; expected one of {', '.join(PRESETS)}")
    settings = dict(PRESETS[name])
    strategies = settings.pop("strategies")
    base = base or SimConfig()
    return [dataclasses.replace(base, strategy=s, **settings) for s in strategies]
