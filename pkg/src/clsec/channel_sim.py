"""BPSK over AWGN with exact per-bit LLRs.

The channel stands in for a real radio link: it produces the one thing the
correction math consumes, calibrated per-bit log-likelihood ratios.  The LLR
convention is L = ln(P(bit=0 | y) / P(bit=1 | y)), so positive favours 0.
For unit-energy symbols the exact posterior log-odds with equiprobable bits
is L = 2*y / sigma^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    noise_std: float
    seed: int = 0

    def __post_init__(self) -> None:
        if not (self.noise_std > 0):
            raise ValueError(f"noise_std must be > 0, got {self.noise_std}")


def ebn0_db_from_noise_std(noise_std: float) -> float:
    """Eb/N0 in dB for unit-energy BPSK: 10*log10(1 / (2*sigma^2))."""
    return 10.0 * math.log10(1.0 / (2.0 * noise_std * noise_std))


def noise_std_from_ebn0_db(ebn0_db: float) -> float:
    return math.sqrt(1.0 / (2.0 * 10.0 ** (ebn0_db / 10.0)))


def modulate(bits: np.ndarray) -> np.ndarray:
    """Map bit 0 -> +1.0, bit 1 -> -1.0."""
    bits = np.asarray(bits, dtype=np.float64)
    return 1.0 - 2.0 * bits


def transmit(symbols: np.ndarray, params: ChannelParams) -> np.ndarray:
    """Add seeded Gaussian noise; identical inputs give identical outputs."""
    rng = np.random.default_rng(params.seed)
    noise = rng.normal(0.0, params.noise_std, size=len(symbols))
    return np.asarray(symbols, dtype=np.float64) + noise


def compute_llrs(received: np.ndarray, params: ChannelParams) -> np.ndarray:
    return 2.0 * np.asarray(received, dtype=np.float64) / (params.noise_std**2)


def hard_decide(llrs: np.ndarray) -> np.ndarray:
    """L >= 0 decides bit 0; the tie at exactly 0 is deterministic."""
    return (np.asarray(llrs) < 0).astype(np.uint8)
