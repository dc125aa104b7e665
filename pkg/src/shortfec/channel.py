"""
Binary-input AWGN channel: BPSK mapping, transmission, LLR computation.

Model: y = sqrt(rho) * x + w with x in {-1, +1} and w ~ N(0, 1) i.i.d.
Bit-to-symbol convention is 0 -> +1, 1 -> -1, so the channel LLR
L = 2 * sqrt(rho) * y is positive when bit 0 is more likely.  That sign
convention (positive favors bit 0) is shared by every decoder input in
this package.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ChannelParams:
    """SNR bookkeeping for a rate-R code on the bi-AWGN channel.

    rho is the linear SNR of the channel model; the energy per
    information bit satisfies Eb/N0 = rho / (2 R).
    """

    rho: float
    rate: float
    ebn0_db: float

    @classmethod
    def from_ebn0_db(cls, ebn0_db: float, rate: float) -> "ChannelParams":
        rho = 2.0 * rate * 10.0 ** (ebn0_db / 10.0)
        return cls(rho=rho, rate=rate, ebn0_db=ebn0_db)

    @classmethod
    def from_rho(cls, rho: float, rate: float) -> "ChannelParams":
        ebn0_db = 10.0 * math.log10(rho / (2.0 * rate))
        return cls(rho=rho, rate=rate, ebn0_db=ebn0_db)

    def __post_init__(self):
        if self.rho < 0:
            raise ValueError("rho must be nonnegative")
        expect = 2.0 * self.rate * 10.0 ** (self.ebn0_db / 10.0)
        if not math.isclose(self.rho, expect, rel_tol=1e-12):
            raise ValueError("inconsistent (rho, rate, ebn0_db) triple")


def modulate(bits) -> np.ndarray:
    """BPSK map: bit b -> (-1)^b, i.e. 0 -> +1 and 1 -> -1."""
    bits = np.asarray(bits, dtype=np.uint8)
    return 1.0 - 2.0 * bits.astype(np.float64)


def transmit(x, rho: float, rng: np.random.Generator) -> np.ndarray:
    """y = sqrt(rho) x + w with unit-variance Gaussian noise from rng."""
    x = np.asarray(x, dtype=np.float64)
    return math.sqrt(rho) * x + rng.standard_normal(x.shape)


def llr(y, rho: float) -> np.ndarray:
    """Channel LLRs: L = 2 sqrt(rho) y (positive favors bit 0)."""
    return 2.0 * math.sqrt(rho) * np.asarray(y, dtype=np.float64)


# Counter-based per-frame random streams.  Each frame draws from a
# Philox generator keyed by (seed, snr_index) and advanced to a
# frame-specific counter block, so results do not depend on batching or
# dispatch order.
_FRAME_STRIDE = 1 << 24


def frame_rng(seed: int, snr_index: int, frame_index: int) -> np.random.Generator:
    bg = np.random.Philox(key=np.array([seed, snr_index], dtype=np.uint64))
    bg.advance(frame_index * _FRAME_STRIDE)
    return np.random.Generator(bg)
