"""Block Rayleigh fading, BPSK over complex AWGN and coherent LLR demodulation."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .topology import PathLossParams, path_gain


def db_to_linear(x_db):
    return 10.0 ** (np.asarray(x_db, dtype=float) / 10.0)


def linear_to_db(x):
    return 10.0 * np.log10(x)


@dataclass(frozen=True)
class NoiseParams:
    n0: float
    tx_energy: float

    def __post_init__(self):
        if not (self.n0 > 0 and self.tx_energy > 0):
            raise ValueError("noise power and transmit energy must be positive")


@dataclass(frozen=True)
class SoftObservation:
    positions: np.ndarray
    llrs: np.ndarray

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=np.int64)
        llr = np.asarray(self.llrs, dtype=float)
        if pos.shape != llr.shape or pos.ndim != 1:
            raise ValueError("positions and llrs must be 1-D and of equal length")
        if pos.size > 1 and np.any(np.diff(pos) <= 0):
            raise ValueError("positions must be strictly increasing")
        object.__setattr__(self, "positions", pos)
        object.__setattr__(self, "llrs", llr)

    @classmethod
    def empty(cls) -> "SoftObservation":
        return cls(np.zeros(0, np.int64), np.zeros(0))


def sample_fading(rng: np.random.Generator, mean_gain, size=None):
    """Rayleigh coefficient(s) with ``E|h|^2 = mean_gain``.

    ``mean_gain`` may be an array, in which case one independent coefficient
    is drawn per entry (``size`` is then ignored).
    """
    mean_gain = np.asarray(mean_gain, dtype=float)
    if np.any(mean_gain < 0):
        raise ValueError("mean gain must be non-negative")
    shape = mean_gain.shape if mean_gain.ndim else size
    g = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    h = np.sqrt(mean_gain / 2) * g
    return complex(h) if np.ndim(h) == 0 else h


def bpsk(bits, tx_energy: float) -> np.ndarray:
    """Bit 0 maps to ``+sqrt(E)``, bit 1 to ``-sqrt(E)``."""
    b = np.asarray(bits)
    return math.sqrt(tx_energy) * (1.0 - 2.0 * b)


def complex_noise(rng: np.random.Generator, n0: float, shape) -> np.ndarray:
    """Circular complex Gaussian noise with total variance ``n0`` per sample."""
    scale = math.sqrt(n0 / 2)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def transmit(bits, h: complex, noise: NoiseParams, rng: np.random.Generator) -> np.ndarray:
    """Pass BPSK symbols for ``bits`` through a flat fading channel plus AWGN."""
    bits = np.asarray(bits)
    if bits.size == 0:
        raise ValueError("nothing to transmit")
    return h * bpsk(bits, noise.tx_energy) + complex_noise(rng, noise.n0, bits.shape)


def llr_from_received(received, h, noise: NoiseParams) -> np.ndarray:
    """Coherent BPSK LLRs ``4 sqrt(E) Re(conj(h) y) / N0`` (positive favours bit 0).

    Broadcasts, so ``received`` may be ``(n_receivers, n_bits)`` with ``h``
    shaped ``(n_receivers, 1)``.
    """
    y = np.asarray(received)
    return 4.0 * math.sqrt(noise.tx_energy) * np.real(np.conj(h) * y) / noise.n0


def demodulate(received, h: complex, noise: NoiseParams, positions=None) -> SoftObservation:
    llr = llr_from_received(received, h, noise)
    if positions is None:
        positions = np.arange(llr.size)
    return SoftObservation(positions, llr)


def calibrate_tx_energy(
    target_avg_snr_db: float, dist: float, params: PathLossParams, n0: float
) -> float:
    """Transmit energy giving ``path_gain(dist) * E / N0`` equal to the target SNR."""
    if not math.isfinite(target_avg_snr_db):
        raise ValueError("target SNR must be finite")
    return float(db_to_linear(target_avg_snr_db)) * n0 / path_gain(dist, params)


def bpsk_ber(snr_linear):
    """Uncoded coherent BPSK bit error rate ``Q(sqrt(2 snr))``."""
    return 0.5 * erfc(np.sqrt(np.asarray(snr_linear, dtype=float)))
