"""Incremental-redundancy soft combining and the concatenated decode rule."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .fec import DECODE_FAILURE, MOTHER_CODE, RS_255_239, ConvCode, RcpcFamily, RsCode, default_family
from .fec import conv_encode, viterbi_decode
from .phy import SoftObservation


@dataclass(frozen=True)
class CodeChain:
    """RS outer code feeding the RCPC inner code, one RS codeword per packet.

    The inner information block is the RS codeword serialised MSB-first, so
    ``k = 8 * rs.n_symbols``.
    """

    rs: RsCode = RS_255_239
    family: RcpcFamily = field(default_factory=default_family)

    @property
    def conv(self) -> ConvCode:
        return self.family.code

    @property
    def k(self) -> int:
        return 8 * self.rs.n_symbols

    @property
    def n_mother(self) -> int:
        return self.conv.codeword_length(self.k)

    @property
    def n_rates(self) -> int:
        return self.family.n_rates

    def positions(self, rate_index: int) -> np.ndarray:
        return self.family.positions(rate_index, self.k)

    def round_positions(self, rate_index: int) -> np.ndarray:
        """Mother-codeword positions sent in HARQ round ``rate_index``."""
        return self.family.incremental_positions(rate_index, self.k)

    def encode(self, payload) -> np.ndarray:
        word = self.rs.encode(payload)
        return conv_encode(np.unpackbits(word), self.conv)

    def decode(self, llrs):
        """Viterbi then RS; returns the payload or ``DECODE_FAILURE``."""
        info = viterbi_decode(llrs, self.k, self.conv)
        return self.rs.decode(np.packbits(info))


@dataclass
class SoftBuffer:
    llr_acc: np.ndarray
    received_mask: np.ndarray
    owner: int = -1

    @classmethod
    def empty(cls, length: int, owner: int = -1) -> "SoftBuffer":
        return cls(np.zeros(length), np.zeros(length, dtype=bool), owner)

    def absorb(self, obs: SoftObservation) -> "SoftBuffer":
        """Add ``obs`` into the accumulator; repeated positions combine additively."""
        if obs.positions.size == 0:
            return self
        if obs.positions[0] < 0 or obs.positions[-1] >= self.llr_acc.size:
            raise ValueError("observation positions outside the mother codeword")
        self.llr_acc[obs.positions] += obs.llrs
        self.received_mask[obs.positions] = True
        return self

    def absorb_llrs(self, positions: np.ndarray, llrs: np.ndarray) -> "SoftBuffer":
        """Unchecked fast path of :meth:`absorb` for the simulation loop."""
        self.llr_acc[positions] += llrs
        self.received_mask[positions] = True
        return self


def absorb(buffer: SoftBuffer, obs: SoftObservation) -> SoftBuffer:
    return buffer.absorb(obs)


@dataclass(frozen=True)
class DecodeOutcome:
    success: bool
    payload: np.ndarray | None = None
    undetected_error: bool = False

    def __post_init__(self):
        if self.undetected_error and not self.success:
            raise ValueError("an undetected error requires a successful decode")


def attempt_decode(buffer: SoftBuffer, chain: CodeChain, true_payload=None) -> DecodeOutcome:
    """Decode the accumulated soft values.

    ``true_payload`` is only compared after the fact to flag RS miscorrections;
    it never influences the decision.
    """
    result = chain.decode(buffer.llr_acc)
    if result is DECODE_FAILURE:
        return DecodeOutcome(False)
    wrong = true_payload is not None and not np.array_equal(result, np.asarray(true_payload, dtype=np.uint8))
    return DecodeOutcome(True, result, wrong)
