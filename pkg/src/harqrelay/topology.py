"""Node placement and deterministic path-loss gains for the two-hop network.

Node ids: ``0`` is the source, ``1..K_r`` are relays and ``K_r + 1`` is the
destination. The source sits at the origin and the destination on the
positive x axis.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 2.99792458e8
SOURCE = 0
MAX_ATTEMPTS_PER_RELAY = 10**6


@dataclass(frozen=True)
class PathLossParams:
    carrier_wavelength_m: float = SPEED_OF_LIGHT / 2.4e9
    reference_distance_m: float = 1.0
    exponent: float = 3.0
    source_dest_distance_m: float = 100.0

    def __post_init__(self):
        for name in ("carrier_wavelength_m", "reference_distance_m", "exponent", "source_dest_distance_m"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive, got {value}")
        if self.exponent < 2:
            raise ValueError(f"path loss exponent must be >= 2, got {self.exponent}")

    @classmethod
    def from_frequency(cls, carrier_freq_hz: float = 2.4e9, **kwargs) -> "PathLossParams":
        if not carrier_freq_hz > 0:
            raise ValueError("carrier frequency must be positive")
        return cls(carrier_wavelength_m=SPEED_OF_LIGHT / carrier_freq_hz, **kwargs)


def path_gain(d, params: PathLossParams = PathLossParams()):
    """Mean linear power gain ``(lambda / (4 pi d0))**2 * (d / d0)**(-mu)`` at distance ``d``."""
    d = np.asarray(d, dtype=float)
    if np.any(~(d > 0)):
        raise ValueError("distance must be positive")
    d0 = params.reference_distance_m
    g = (params.carrier_wavelength_m / (4 * math.pi * d0)) ** 2 * (d / d0) ** (-params.exponent)
    return float(g) if g.ndim == 0 else g


@dataclass(frozen=True)
class Topology:
    source_pos: tuple[float, float]
    dest_pos: tuple[float, float]
    relay_pos: tuple[tuple[float, float], ...]

    @property
    def n_relays(self) -> int:
        return len(self.relay_pos)

    @property
    def dest_id(self) -> int:
        return self.n_relays + 1

    def positions(self) -> np.ndarray:
        """All node coordinates indexed by node id, shape ``(K_r + 2, 2)``."""
        return np.array([self.source_pos, *self.relay_pos, self.dest_pos], dtype=float).reshape(-1, 2)

    def distances(self) -> np.ndarray:
        pos = self.positions()
        return np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=-1)

    def mean_gains(self, params: PathLossParams) -> np.ndarray:
        """Pairwise mean power gains; the diagonal is zero."""
        dist = self.distances()
        gains = np.zeros_like(dist)
        off = ~np.eye(len(dist), dtype=bool)
        gains[off] = path_gain(dist[off], params)
        return gains

    def relay_dest_distances(self) -> np.ndarray:
        pos = self.positions()
        return np.linalg.norm(pos[1:-1] - pos[-1], axis=1)

    def to_text(self) -> str:
        lines = ["# node_id x_m y_m  (0 = source, last = destination)"]
        for node, (x, y) in enumerate(self.positions()):
            lines.append(f"{node} {float(x)!r} {float(y)!r}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "Topology":
        rows = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) != 3:
                raise ValueError(f"line {lineno}: expected 'node_id x y'")
            node = int(parts[0])
            if node in rows:
                raise ValueError(f"line {lineno}: duplicate node id {node}")
            rows[node] = (float(parts[1]), float(parts[2]))
        if sorted(rows) != list(range(len(rows))) or len(rows) < 3:
            raise ValueError("node ids must be 0..N-1 with at least one relay")
        last = len(rows) - 1
        return cls(rows[0], rows[last], tuple(rows[i] for i in range(1, last)))

    def save(self, path) -> None:
        Path(path).write_text(self.to_text())

    @classmethod
    def load(cls, path) -> "Topology":
        return cls.from_text(Path(path).read_text())


def in_lens(points, params: PathLossParams) -> np.ndarray:
    """True where a point is strictly within ``d_tr`` of both the source and destination."""
    p = np.asarray(points, dtype=float).reshape(-1, 2)
    d = params.source_dest_distance_m
    to_src = np.hypot(p[:, 0], p[:, 1])
    to_dst = np.hypot(p[:, 0] - d, p[:, 1])
    return (to_src < d) & (to_dst < d)


def place_relays(rng: np.random.Generator, k_r: int, params: PathLossParams = PathLossParams()) -> Topology:
    """Scatter ``k_r`` relays uniformly over the lens between source and destination.

    Candidates are drawn one at a time from the lens's bounding box
    ``[0, d] x [-d*sqrt(3)/2, d*sqrt(3)/2]`` and rejected if outside.
    """
    if k_r < 1:
        raise ValueError("need at least one relay")
    d = params.source_dest_distance_m
    half_height = d * math.sqrt(3) / 2
    relays = []
    for _ in range(k_r):
        for _attempt in range(MAX_ATTEMPTS_PER_RELAY):
            x = rng.uniform(0.0, d)
            y = rng.uniform(-half_height, half_height)
            if in_lens((x, y), params)[0]:
                relays.append((float(x), float(y)))
                break
        else:
            raise RuntimeError("relay placement did not converge")
    return Topology((0.0, 0.0), (float(d), 0.0), tuple(relays))
