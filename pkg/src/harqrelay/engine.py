"""Packet-level HARQ episodes, campaigns, sweeps and throughput metrics.

Seeding
-------
Every random stream is derived from the master seed with
``numpy.random.SeedSequence(seed, spawn_key=...)``:

* ``(0,)`` campaign topology,
* ``(1, i)`` channel of packet ``i`` (message, fading, noise),
* ``(2, i)`` contention draws of packet ``i``,
* ``(3, i)`` topology of packet ``i`` when redrawn per packet.

Channel draws for a slot are made for every link and every receiver whether
or not they end up used, so two campaigns that share a seed see identical
channels no matter which nodes transmit (common random numbers).
"""
from __future__ import annotations

import csv
import json
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import SimConfig, config_from_dict
from .harq import CodeChain, SoftBuffer, attempt_decode
from .phy import NoiseParams, bpsk, llr_from_received
from .protocol import ContentionConfig, RoundState, Strategy, select_transmitter
from .topology import SOURCE, Topology, place_relays

Z_95 = 1.959963984540054

CSV_COLUMNS = (
    "axis_value",
    "strategy",
    "r_avg",
    "empirical_throughput",
    "l_av",
    "outage_rate",
    "ci_halfwidth",
    "packets",
    "seed",
    "config_hash",
)


def _stream(seed: int, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=key))


def packet_rngs(seed: int, index: int) -> tuple[np.random.Generator, np.random.Generator]:
    """Channel and contention generators of packet ``index`` in a campaign."""
    return _stream(seed, 1, index), _stream(seed, 2, index)


class RandomChannel:
    """Independent block Rayleigh fading per (link, slot) and AWGN per receiver."""

    def __init__(self, mean_gains: np.ndarray, noise: NoiseParams, rng: np.random.Generator):
        self.amp = np.sqrt(mean_gains / 2)
        self.noise_scale = math.sqrt(noise.n0 / 2)
        self.rng = rng

    def fading(self, slot: int) -> np.ndarray:
        shape = self.amp.shape
        return self.amp * (self.rng.standard_normal(shape) + 1j * self.rng.standard_normal(shape))

    def noise(self, slot: int, n_receivers: int, n_bits: int) -> np.ndarray:
        pairs = self.rng.standard_normal((n_receivers, n_bits, 2))
        return self.noise_scale * pairs.view(np.complex128)[..., 0]


class ScriptedChannel:
    """Deterministic channel for tests: fixed fading matrices per slot, optional noise."""

    def __init__(self, fading_by_slot, noise_fn=None):
        self.fading_by_slot = fading_by_slot
        self.noise_fn = noise_fn

    def fading(self, slot: int) -> np.ndarray:
        return np.asarray(self.fading_by_slot[slot], dtype=complex)

    def noise(self, slot: int, n_receivers: int, n_bits: int) -> np.ndarray:
        if self.noise_fn is None:
            return np.zeros((n_receivers, n_bits), dtype=complex)
        return self.noise_fn(slot, n_receivers, n_bits)


@dataclass
class PacketOutcome:
    success: bool
    rounds_used: int
    coded_bits_sent: int
    transmitter_per_round: list[int]
    undetected_error: bool = False
    attempts: int = 1
    minislots_used: int = 0
    transcript: list[dict] = field(default_factory=list)


@dataclass
class Metrics:
    packets: int
    l_av: float
    r_avg: float
    empirical_throughput: float
    outage_rate: float
    relay_usage_histogram: dict[int, int]
    ci_halfwidth: float
    undetected_error_rate: float = 0.0
    mean_rounds: float = 0.0
    rate_k: int = 0
    rate_n: int = 0

    def row(self) -> dict:
        return {
            "r_avg": self.r_avg,
            "empirical_throughput": self.empirical_throughput,
            "l_av": self.l_av,
            "outage_rate": self.outage_rate,
            "ci_halfwidth": self.ci_halfwidth,
            "packets": self.packets,
        }


class PacketSimulator:
    """Everything a packet episode needs that does not change between packets."""

    def __init__(self, config: SimConfig, chain: CodeChain | None = None):
        self.config = config
        self.chain = chain or CodeChain(family=config.family())
        self.noise_params = config.noise()
        self.cfg = config.contention()
        self.strategy = Strategy(config.strategy)
        self.path_loss = config.path_loss()
        self.round_positions = [self.chain.round_positions(j) for j in range(1, self.chain.n_rates + 1)]

    def channel_for(self, topology: Topology, rng: np.random.Generator) -> RandomChannel:
        return RandomChannel(topology.mean_gains(self.path_loss), self.noise_params, rng)

    def run_packet(
        self,
        topology: Topology,
        channel,
        contention_rng: np.random.Generator,
        payload: np.ndarray | None = None,
    ) -> PacketOutcome:
        if payload is None:
            payload = channel.rng.integers(0, 256, self.chain.rs.k_symbols, dtype=np.uint8)
        mother = self.chain.encode(payload)
        coded = 0
        slot = 0
        attempts = 0
        minislots = 0
        transcript: list[dict] = []
        while True:
            attempts += 1
            out = self._episode(topology, channel, contention_rng, payload, mother, slot, transcript)
            coded += out.coded_bits_sent
            slot += out.rounds_used
            minislots += out.minislots_used
            if out.success or self.config.outage_policy == "drop" or attempts >= self.config.max_attempts:
                out.coded_bits_sent = coded
                out.attempts = attempts
                out.minislots_used = minislots
                out.transcript = transcript
                return out

    def _episode(self, topology, channel, contention_rng, payload, mother, slot0, transcript):
        chain = self.chain
        n_nodes = topology.n_relays + 2
        dest = topology.dest_id
        use_relays = self.strategy is not Strategy.P2P
        E = self.noise_params.tx_energy
        dest_buf = SoftBuffer.empty(chain.n_mother, dest)
        relay_bufs = {i: SoftBuffer.empty(chain.n_mother, i) for i in range(1, dest)} if use_relays else {}
        relay_words: dict[int, np.ndarray] = {}
        relay_codewords: dict[int, np.ndarray] = {}
        state = RoundState(transcript=transcript)
        transmitters: list[int] = []
        coded = 0
        minislots = 0

        for j in range(1, chain.n_rates + 1):
            slot = slot0 + j
            positions = self.round_positions[j - 1]
            H = channel.fading(slot)
            state.rate_index = j
            state.gains_to_dest = np.abs(H[1:dest, dest]) ** 2
            if j == 1:
                tx = SOURCE
                transcript.append({"round": 1, "tx": SOURCE, "slot": slot})
            else:
                tx = select_transmitter(self.strategy, state, self.cfg, topology, contention_rng)
                transcript[-1]["slot"] = slot
                if self.strategy is Strategy.OPPORTUNISTIC:
                    minislots += self.cfg.minislots
            if tx == SOURCE:
                bits = mother[positions]
            else:
                if tx not in relay_codewords:
                    relay_codewords[tx] = chain.encode(relay_words[tx])
                bits = relay_codewords[tx][positions]
            transmitters.append(tx)
            coded += positions.size
            noise = channel.noise(slot, n_nodes - 1, positions.size)

            listeners = [dest]
            if use_relays and (self.config.relay_combining or j == 1):
                listeners += [i for i in relay_bufs if i not in relay_words and i != tx]
            rows = np.array(listeners)
            h = H[tx, rows][:, None]
            y = h * bpsk(bits, E) + noise[rows - 1]
            llr = llr_from_received(y, h, self.noise_params)
            for r, node in enumerate(listeners):
                (dest_buf if node == dest else relay_bufs[node]).absorb_llrs(positions, llr[r])

            outcome = attempt_decode(dest_buf, chain, payload)
            transcript[-1]["ack"] = outcome.success
            if outcome.success:
                return PacketOutcome(True, j, coded, transmitters, outcome.undetected_error, 1, minislots)
            if j == chain.n_rates or not use_relays:
                continue
            # relays only need to decode when another round follows
            for node in listeners[1:]:
                res = attempt_decode(relay_bufs[node], chain, payload)
                if res.success:
                    relay_words[node] = res.payload
                    state.decoded.add(node)
            transcript[-1]["decoded"] = sorted(state.decoded)
        return PacketOutcome(False, chain.n_rates, coded, transmitters, False, 1, minislots)


def run_packet(config: SimConfig, topology: Topology, channel, contention_rng, payload=None) -> PacketOutcome:
    return PacketSimulator(config).run_packet(topology, channel, contention_rng, payload)


# metrics ----------------------------------------------------------------------


def packet_l_values(coded_bits, k: int, period: int) -> np.ndarray:
    """Additional transmitted bits per ``period`` information bits, per packet."""
    return np.asarray(coded_bits, dtype=float) * period / k - period


def measure_lav(outcomes, k: int, period: int) -> float:
    """Mean of ``coded_bits * P / k - P`` over packets (failed packets included)."""
    coded = [o.coded_bits_sent if isinstance(o, PacketOutcome) else o for o in outcomes]
    if not coded:
        raise ValueError("need at least one packet outcome")
    return float(np.mean(packet_l_values(coded, k, period)))


def throughput(l_av: float, k: int, n: int, period: int, memory: int) -> float:
    """Average code rate ``k / (n + M) * P / (P + l_av)``."""
    return k / (n + memory) * period / (period + l_av)


def summarize(outcomes: list[PacketOutcome], chain: CodeChain) -> Metrics:
    k = chain.k
    period = chain.family.period
    memory = chain.conv.memory
    n = chain.conv.n_outputs * k
    coded = np.array([o.coded_bits_sent for o in outcomes], dtype=float)
    l_vals = packet_l_values(coded, k, period)
    l_av = float(l_vals.mean())
    r_avg = throughput(l_av, k, n, period, memory)
    if len(outcomes) > 1:
        slope = k / (n + memory) * period / (period + l_av) ** 2
        ci = Z_95 * slope * float(l_vals.std(ddof=1)) / math.sqrt(len(outcomes))
    else:
        ci = float("nan")
    delivered = sum(1 for o in outcomes if o.success and not o.undetected_error)
    usage = Counter(tx for o in outcomes for tx in o.transmitter_per_round)
    return Metrics(
        packets=len(outcomes),
        l_av=l_av,
        r_avg=r_avg,
        empirical_throughput=delivered * k / float(coded.sum()),
        outage_rate=sum(1 for o in outcomes if not o.success) / len(outcomes),
        relay_usage_histogram=dict(sorted(usage.items())),
        ci_halfwidth=ci,
        undetected_error_rate=sum(1 for o in outcomes if o.undetected_error) / len(outcomes),
        mean_rounds=float(np.mean([o.rounds_used for o in outcomes])),
        rate_k=k,
        rate_n=n,
    )


# campaigns --------------------------------------------------------------------


def campaign_topology(config: SimConfig) -> Topology:
    if config.topology_file is not None:
        topo = Topology.load(config.topology_file)
        if topo.n_relays != config.n_relays:
            raise ValueError("topology file relay count does not match n_relays")
        return topo
    return place_relays(_stream(config.seed, 0), config.n_relays, config.path_loss())


def run_campaign(config: SimConfig, transcripts=None) -> Metrics:
    """Simulate ``config.n_packets`` packets and aggregate their metrics.

    ``transcripts`` may be a writable text stream receiving one JSON object per
    packet.
    """
    config = config.point()
    sim = PacketSimulator(config)
    topology = campaign_topology(config)
    outcomes = []
    for i in range(config.n_packets):
        if config.topology_mode == "packet":
            topology = place_relays(_stream(config.seed, 3, i), config.n_relays, sim.path_loss)
        channel_rng, contention_rng = packet_rngs(config.seed, i)
        out = sim.run_packet(topology, sim.channel_for(topology, channel_rng), contention_rng)
        outcomes.append(out)
        if transcripts is not None:
            record = {
                "config_hash": config.config_hash(),
                "packet": i,
                "success": out.success,
                "rounds": out.rounds_used,
                "attempts": out.attempts,
                "coded_bits": out.coded_bits_sent,
                "tx": out.transmitter_per_round,
                "undetected_error": out.undetected_error,
                "minislots": out.minislots_used,
                "events": out.transcript,
            }
            transcripts.write(json.dumps(record) + "\n")
    return summarize(outcomes, sim.chain)


def point_config(config: SimConfig, axis: str, index: int, value) -> SimConfig:
    """Campaign configuration for one sweep value.

    With common random numbers every point keeps the master seed; otherwise
    point ``index`` gets a seed derived from it.
    """
    point = config.point().with_axis(axis, value)
    if not config.crn:
        seed = int(np.random.SeedSequence(config.seed, spawn_key=(4, index)).generate_state(1, np.uint64)[0])
        point = point.replace(seed=seed)
    return point


def _campaign_job(config_dict):
    return run_campaign(config_from_dict(config_dict))


def sweep(config: SimConfig, axis: str | None = None, values=None, workers: int = 1, transcripts=None):
    """Run one campaign per axis value; returns ``[(value, config, Metrics), ...]``."""
    axis = axis or config.sweep_axis
    values = tuple(config.sweep_values if values is None else values)
    if axis is None or not values:
        raise ValueError("sweep needs an axis and at least one value")
    points = [point_config(config, axis, i, v) for i, v in enumerate(values)]
    if workers > 1 and transcripts is None:
        with ProcessPoolExecutor(workers) as pool:
            metrics = list(pool.map(_campaign_job, [p.to_dict() for p in points]))
    else:
        metrics = [run_campaign(p, transcripts) for p in points]
    return [(getattr(p, axis), p, m) for p, m in zip(points, metrics)]


# CSV output -------------------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def result_row(axis_value, point: SimConfig, metrics: Metrics) -> dict:
    row = {"axis_value": _fmt(axis_value), "strategy": point.strategy}
    row.update({key: _fmt(val) for key, val in metrics.row().items()})
    row["seed"] = str(point.seed)
    row["config_hash"] = point.config_hash()
    return row


def write_results(path, rows: list[dict], configs: dict[str, SimConfig], extra_meta: dict | None = None) -> Path:
    """Write the CSV and a ``<path>.meta.json`` sidecar mapping config hashes to resolved configs."""
    path = Path(path)
    rows = sorted(rows, key=lambda r: (float(r["axis_value"]) if r["axis_value"] != "" else 0.0, r["strategy"]))
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)
    meta = dict(extra_meta or {})
    meta["configs"] = {h: c.to_dict() for h, c in sorted(configs.items())}
    meta_path = path.with_name(path.name + ".meta.json")
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return meta_path


def read_results(path) -> tuple[list[dict], dict]:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.DictReader(fh))
    meta = json.loads(path.with_name(path.name + ".meta.json").read_text())
    return rows, meta


def rerun_row(row: dict, meta: dict) -> dict:
    """Recompute a CSV row from the configuration stored under its hash."""
    config = config_from_dict(meta["configs"][row["config_hash"]])
    if config.config_hash() != row["config_hash"] or str(config.seed) != row["seed"]:
        raise ValueError("stored configuration does not match the row's hash/seed")
    metrics = run_campaign(config)
    axis = meta.get("axis")
    value = getattr(config, axis) if axis else ""
    return result_row(value, config, metrics)
