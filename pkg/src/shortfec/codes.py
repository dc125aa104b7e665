"""
Binary linear block codes as (generator, parity-check) matrix pairs.

A :class:`LinearCode` owns whichever of G and H it was built from and
derives the other on demand.  Construction helpers for the specific
codes used throughout the package live here too.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2


@dataclass(frozen=True)
class LinearCode:
    """An (n, k) binary linear block code.

    Attributes:
        G: generator matrix (k, n) or None.
        H: parity-check matrix (n - k, n) or None.
        d_min: minimum Hamming distance when known.
    """

    n: int
    k: int
    G: np.ndarray | None = None
    H: np.ndarray | None = None
    d_min: int | None = None
    name: str = ""
    _info_set: np.ndarray = field(init=False, repr=False, compare=False, default=None)
    _info_inv: np.ndarray = field(init=False, repr=False, compare=False, default=None)

    @classmethod
    def from_generator(cls, G, d_min=None, name="") -> "LinearCode":
        G = gf2.as_bits(G)
        k, n = G.shape
        code = cls(n=n, k=k, G=G, H=derive_parity_check(G), d_min=d_min, name=name)
        return code

    @classmethod
    def from_parity_check(cls, H, d_min=None, name="") -> "LinearCode":
        H = gf2.as_bits(H)
        m, n = H.shape
        G = derive_generator(H)
        return cls(n=n, k=G.shape[0], G=G, H=H, d_min=d_min, name=name)

    def __post_init__(self):
        if self.G is not None:
            # information set: first k independent columns; used to map
            # codewords back to messages
            _, pivots = gf2.gf2_rref(self.G)
            info = np.array(pivots, dtype=np.int64)
            sub = self.G[:, info]
            inv = _gf2_inverse(sub)
            object.__setattr__(self, "_info_set", info)
            object.__setattr__(self, "_info_inv", inv)

    def encode(self, u) -> np.ndarray:
        return gf2.encode(self.G, u)

    def message_from_codeword(self, x) -> np.ndarray:
        """Recover the message of a (valid) codeword."""
        x = gf2.as_bits(x)
        sub = x[..., self._info_set]
        return (sub.astype(np.uint32) @ self._info_inv.astype(np.uint32) % 2).astype(
            np.uint8
        )

    def syndrome(self, x) -> np.ndarray:
        x = gf2.as_bits(x)
        return (x.astype(np.uint32) @ self.H.T.astype(np.uint32) % 2).astype(np.uint8)

    def is_codeword(self, x) -> bool:
        return not self.syndrome(x).any()


def _gf2_inverse(M) -> np.ndarray:
    M = gf2.as_bits(M)
    k = M.shape[0]
    if M.shape[0] != M.shape[1]:
        raise ValueError("matrix must be square")
    aug = np.hstack([M, np.eye(k, dtype=np.uint8)])
    R, pivots = gf2.gf2_rref(aug, n_pivot_cols=k)
    if len(pivots) != k:
        raise gf2.RankDeficientError(len(pivots), k)
    return R[:, k:]


def derive_parity_check(G) -> np.ndarray:
    """A parity-check matrix for the row space of G."""
    G = gf2.as_bits(G)
    k, n = G.shape
    R, pivots = gf2.gf2_rref(G)
    if len(pivots) != k:
        raise gf2.RankDeficientError(len(pivots), k)
    pivots = np.array(pivots, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), pivots)
    # G ~ [I | P] over (pivots, free) => H = [P^T | I] over the same order
    P = R[:, free]
    H = np.zeros((n - k, n), dtype=np.uint8)
    H[:, pivots] = P.T
    H[:, free] = np.eye(n - k, dtype=np.uint8)
    return H

def derive_generator(H) -> np.ndarray:
    """A generator matrix for the null space of H (messages sit on the free columns)."""
    H = gf2.as_bits(H)
    n = H.shape[1]
    R, pivots = gf2.gf2_rref(H)
    pivots = np.array(pivots, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), pivots)
    k = free.size
    G = np.zeros((k, n), dtype=np.uint8)
    G[:, free] = np.eye(k, dtype=np.uint8)
    G[:, pivots] = R[: pivots.size, free].T
    return G


def hamming_7_4() -> LinearCode:
    G = np.array(
        [
            [1, 0, 0, 0, 1, 1, 0],
            [0, 1, 0, 0, 1, 0, 1],
            [0, 0, 1, 0, 0, 1, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ],
        dtype=np.uint8,
    )
    return LinearCode.from_generator(G, d_min=3, name="hamming(7,4)")


# The 12x12 B block of the extended Golay generator [I | B]
# (circulant of 11011100010 bordered by ones).
_GOLAY_B_ROWS = [
    0b110111000101,
    0b101110001011,
    0b011100010111,
    0b111000101101,
    0b110001011011,
    0b100010110111,
    0b000101101111,
    0b001011011101,
    0b010110111001,
    0b101101110001,
    0b011011100011,
    0b111111111110,
]


def golay_24_12() -> LinearCode:
    B = np.array(
        [[(r >> (11 - j)) & 1 for j in range(12)] for r in _GOLAY_B_ROWS],
        dtype=np.uint8,
    )
    G = np.hstack([np.eye(12, dtype=np.uint8), B])
    return LinearCode.from_generator(G, d_min=8, name="golay(24,12)")


def ebch(m: int, target_dim: int, d_min=None, name=None) -> LinearCode:
    g, G = gf2.bch_extended_generator(m, target_dim)
    code = LinearCode.from_generator(
        G, d_min=d_min, name=name or f"ebch({1 << m},{target_dim})"
    )
    return code


def ebch_128_64() -> LinearCode:
    """The (128, 64) extended BCH code (designed distance 21 base + parity)."""
    return ebch(7, 64, d_min=22)
