"""Per-round choice of who forwards the next block of parity.

Three strategies are supported: random-access contention among relays that
decoded and see a strong channel to the destination (``opportunistic``),
the decoded relay nearest the destination (``harbinger``), and the source
alone (``p2p``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .topology import SOURCE, Topology


class Strategy(str, Enum):
    OPPORTUNISTIC = "opportunistic"
    HARBINGER = "harbinger"
    P2P = "p2p"


@dataclass(frozen=True)
class ContentionConfig:
    minislots: int = 10
    feedback_prob: float | tuple[float, ...] = 0.3
    gain_threshold: float = 10 ** (-91 / 10)
    winner_pool: str = "relay"

    def __post_init__(self):
        if self.minislots < 1:
            raise ValueError("need at least one minislot")
        probs = self.feedback_prob if isinstance(self.feedback_prob, tuple) else (self.feedback_prob,)
        if not all(0.0 <= p <= 1.0 for p in probs):
            raise ValueError("feedback probability must lie in [0, 1]")
        if not (self.gain_threshold > 0 and math.isfinite(self.gain_threshold)):
            raise ValueError("gain threshold must be positive")
        if self.winner_pool not in ("relay", "minislot"):
            raise ValueError("winner_pool must be 'relay' or 'minislot'")

    def prob_of(self, relay: int) -> float:
        if isinstance(self.feedback_prob, tuple):
            return self.feedback_prob[relay - 1]
        return self.feedback_prob


@dataclass
class RoundState:
    """Protocol state of one packet between HARQ rounds.

    ``gains_to_dest[i - 1]`` is relay ``i``'s power gain to the destination in
    the upcoming slot.
    """

    decoded: set[int] = field(default_factory=set)
    gains_to_dest: np.ndarray = field(default_factory=lambda: np.zeros(0))
    rate_index: int = 1
    transcript: list[dict] = field(default_factory=list)


@dataclass(frozen=True)
class ContentionResult:
    winner: int | None
    successes: tuple[tuple[int, int], ...]  # (minislot, relay)
    collisions: int
    idle: int


def eligible_set(state: RoundState, cfg: ContentionConfig) -> set[int]:
    return {i for i in state.decoded if state.gains_to_dest[i - 1] > cfg.gain_threshold}


def minislot_outcomes(sends: np.ndarray):
    """Resolve Hello transmissions.

    ``sends`` is boolean ``(..., K, n)``. Returns ``(successful, heard)``:
    ``successful`` (``..., K``) marks minislots with exactly one sender and
    ``heard`` (``..., n``) marks relays that got through at least once.
    """
    counts = sends.sum(axis=-1)
    successful = counts == 1
    heard = (sends & successful[..., None]).any(axis=-2)
    return successful, heard


def contend(eligible, cfg: ContentionConfig, rng: np.random.Generator) -> ContentionResult:
    """Play out ``cfg.minislots`` minislots of Hello contention."""
    relays = sorted(eligible)
    if not relays:
        return ContentionResult(None, (), 0, cfg.minislots)
    probs = np.array([cfg.prob_of(i) for i in relays])
    sends = rng.random((cfg.minislots, len(relays))) < probs
    successful, heard = minislot_outcomes(sends)
    counts = sends.sum(axis=1)
    successes = tuple((int(b), relays[int(np.argmax(sends[b]))]) for b in np.flatnonzero(successful))
    collisions = int((counts > 1).sum())
    idle = int((counts == 0).sum())
    if not successes:
        return ContentionResult(None, (), collisions, idle)
    if cfg.winner_pool == "relay":
        pool = [relays[i] for i in np.flatnonzero(heard)]
    else:
        pool = [relay for _, relay in successes]
    winner = pool[int(rng.integers(len(pool)))]
    return ContentionResult(winner, successes, collisions, idle)


def run_contention(eligible, cfg: ContentionConfig, rng: np.random.Generator) -> int | None:
    """Winning relay id, or ``None`` when no minislot carried a lone Hello."""
    return contend(eligible, cfg, rng).winner


def contention_batch(
    n: int, p: float, minislots: int, trials: int, rng: np.random.Generator, chunk: int = 1 << 22
):
    """Vectorised contention for ``n`` symmetric relays over many trials.

    Returns ``(minislot_success_rate, no_winner_rate)`` under the same rule as
    :func:`contend`: a minislot succeeds when exactly one relay sends. Trials
    are processed in chunks of about ``chunk`` send decisions; uniforms are
    drawn in single precision (resolution 2**-24).
    """
    if n < 1 or minislots < 1 or trials < 1:
        raise ValueError("n, minislots and trials must be positive")
    per_chunk = max(1, chunk // (minislots * n))
    threshold = np.float32(p)
    successes = no_winner = done = 0
    while done < trials:
        m = min(per_chunk, trials - done)
        sends = rng.random((n, m, minislots), dtype=np.float32) < threshold
        counts = sends[0].view(np.uint8).copy()
        for row in sends[1:]:
            counts += row
        ok = counts == 1
        successes += int(np.count_nonzero(ok))
        no_winner += m - int(np.count_nonzero(ok.any(axis=1)))
        done += m
    return successes / (trials * minislots), no_winner / trials


def harbinger_choice(decoded, topology: Topology) -> int:
    """Decoded relay closest to the destination (lowest id on ties), else the source."""
    if not decoded:
        return SOURCE
    dist = topology.relay_dest_distances()
    return min(decoded, key=lambda i: (dist[i - 1], i))


def select_transmitter(
    strategy: Strategy | str,
    state: RoundState,
    cfg: ContentionConfig,
    topology: Topology,
    rng: np.random.Generator,
) -> int:
    """Node that sends round ``state.rate_index`` (>= 2); logs the decision to the transcript."""
    strategy = Strategy(strategy)
    if state.rate_index < 2:
        raise ValueError("round 1 is always sent by the source")
    if strategy is Strategy.P2P:
        node = SOURCE
        state.transcript.append({"round": state.rate_index, "strategy": strategy.value, "tx": node})
    elif strategy is Strategy.HARBINGER:
        node = harbinger_choice(state.decoded, topology)
        state.transcript.append({"round": state.rate_index, "strategy": strategy.value, "tx": node})
    else:
        eligible = eligible_set(state, cfg)
        result = contend(eligible, cfg, rng)
        node = SOURCE if result.winner is None else result.winner
        state.transcript.append(
            {
                "round": state.rate_index,
                "strategy": strategy.value,
                "tx": node,
                "eligible": sorted(eligible),
                "successes": [list(s) for s in result.successes],
                "collisions": result.collisions,
                "minislots": cfg.minislots,
            }
        )
    return node
