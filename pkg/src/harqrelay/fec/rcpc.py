"""Rate-compatible punctured convolutional (RCPC) code families.

A family is an ordered list of binary puncturing masks of shape
``(n_outputs, period)``, highest rate first and the unpunctured mother code
last. Position ``3*t + j`` of the mother codeword (encoder step ``t``, output
``j``) is transmitted at rate index ``r`` iff ``masks[r][j, t % period]``.

Mask text format::

    # comment lines and blank lines are ignored
    rate 4/5
    11111110
    00011001
    00000000
    rate 2/3
    ...

Each ``rate`` block has one row per generator (in generator order) and one
column per period position.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from pathlib import Path

import numpy as np

from .convolutional import MOTHER_CODE, ConvCode


@dataclass(frozen=True)
class RcpcFamily:
    masks: tuple[np.ndarray, ...]
    code: ConvCode = MOTHER_CODE
    _position_cache: dict = field(default_factory=dict, init=False, repr=False, compare=False)

    def __post_init__(self):
        masks = tuple(np.asarray(m, dtype=np.uint8) for m in self.masks)
        object.__setattr__(self, "masks", masks)
        validate_family(masks, self.code)

    @property
    def period(self) -> int:
        return self.masks[0].shape[1]

    @property
    def n_rates(self) -> int:
        return len(self.masks)

    def popcounts(self) -> list[int]:
        return [int(m.sum()) for m in self.masks]

    def rates(self) -> list[Fraction]:
        return [Fraction(self.period, c) for c in self.popcounts()]

    def positions(self, rate_index: int, k: int) -> np.ndarray:
        """Mother-codeword indices transmitted at 1-based ``rate_index``."""
        if not 1 <= rate_index <= self.n_rates:
            raise IndexError(f"rate index {rate_index} outside 1..{self.n_rates}")
        key = (rate_index, k)
        if key not in self._position_cache:
            mask = self.masks[rate_index - 1]
            n_steps = k + self.code.memory
            cols = np.arange(n_steps) % self.period
            keep = mask[:, cols].T.reshape(-1).astype(bool)
            pos = np.flatnonzero(keep)
            pos.setflags(write=False)
            self._position_cache[key] = pos
        return self._position_cache[key]

    def incremental_positions(self, rate_index: int, k: int) -> np.ndarray:
        """Positions first released at ``rate_index`` (round 1 returns the rate-R_1 set)."""
        if rate_index == 1:
            return self.positions(1, k)
        if not 2 <= rate_index <= self.n_rates:
            raise IndexError(f"rate index {rate_index} outside 1..{self.n_rates}")
        return np.setdiff1d(
            self.positions(rate_index, k), self.positions(rate_index - 1, k), assume_unique=True
        )

    def to_text(self) -> str:
        lines = []
        for rate, mask in zip(self.rates(), self.masks):
            lines.append(f"rate {rate.numerator}/{rate.denominator}")
            lines.extend("".join(str(int(b)) for b in row) for row in mask)
        return "\n".join(lines) + "\n"


def validate_family(masks, code: ConvCode = MOTHER_CODE) -> None:
    if not masks:
        raise ValueError("RCPC family needs at least one mask")
    shape = masks[0].shape
    if len(shape) != 2 or shape[0] != code.n_outputs:
        raise ValueError(f"masks must have {code.n_outputs} rows")
    for i, m in enumerate(masks):
        if m.shape != shape:
            raise ValueError(f"mask {i + 1} has shape {m.shape}, expected {shape}")
        if not np.isin(m, (0, 1)).all():
            raise ValueError(f"mask {i + 1} is not binary")
        if m.sum() < shape[1]:
            raise ValueError(f"mask {i + 1} has rate above 1")
    for i in range(len(masks) - 1):
        if np.any(masks[i] > masks[i + 1]):
            raise ValueError(f"masks {i + 1} and {i + 2} are not rate-compatible")
        if masks[i].sum() >= masks[i + 1].sum():
            raise ValueError("rates must be strictly decreasing")
    if not masks[-1].all():
        raise ValueError("last mask must be the unpunctured mother code")


def greedy_family(base: np.ndarray, popcounts, n_outputs: int = 3) -> list[np.ndarray]:
    """Grow ``base`` into nested masks with the given popcounts.

    Bits are switched on in row-major order (row 0 first, left to right),
    skipping bits that are already set.
    """
    masks = [np.array(base, dtype=np.uint8)]
    order = [(r, c) for r in range(n_outputs) for c in range(masks[0].shape[1])]
    for target in popcounts[1:]:
        m = masks[-1].copy()
        for r, c in order:
            if m.sum() >= target:
                break
            m[r, c] = 1
        masks.append(m)
    return masks


# rate 4/5 base chosen so the greedy family has free distances 4, 6, 7, 9, 14
_DEFAULT_BASE = np.array(
    [
        [1, 1, 1, 1, 1, 1, 1, 0],
        [0, 0, 0, 1, 1, 0, 0, 1],
        [0, 0, 0, 0, 0, 0, 0, 0],
    ],
    dtype=np.uint8,
)
DEFAULT_POPCOUNTS = (10, 12, 14, 16, 24)


@lru_cache(maxsize=None)
def default_family() -> RcpcFamily:
    """Five-rate family {4/5, 2/3, 4/7, 1/2, 1/3}, period 8, over the M=6 mother code."""
    return RcpcFamily(tuple(greedy_family(_DEFAULT_BASE, DEFAULT_POPCOUNTS)))


def parse_masks(text: str, code: ConvCode = MOTHER_CODE) -> RcpcFamily:
    blocks: list[list[str]] = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.lower().startswith("rate"):
            blocks.append([])
            continue
        if not blocks:
            raise ValueError(f"line {lineno}: mask row before any 'rate' header")
        if set(line) - {"0", "1"}:
            raise ValueError(f"line {lineno}: mask rows contain only 0 and 1")
        blocks[-1].append(line)
    masks = []
    for rows in blocks:
        if len({len(r) for r in rows}) != 1:
            raise ValueError("mask rows within a block must have equal length")
        masks.append(np.array([[int(ch) for ch in r] for r in rows], dtype=np.uint8))
    return RcpcFamily(tuple(masks), code)


def load_masks(path, code: ConvCode = MOTHER_CODE) -> RcpcFamily:
    return parse_masks(Path(path).read_text(), code)
