"""
CRC-16 / punctured tail-biting convolutional concatenation and its
weak-position flip decoder.

The encoder appends a 16-bit CRC (g(x) = x^16 + x^12 + x^5 + 1) to a
64-bit message, tail-biting encodes the 80 bits with the memory-11
[5537, 6131] code, and punctures every fifth bit starting with the
third, turning the natural (160, 64) parameters into (128, 64).

The decoder repeatedly runs the soft-in soft-out trellis decoder while
hypothesizing strong extrinsic values on the least reliable input
positions.  The search walks patterns p of w pinned bits, w = 0 ..
MaxWeak, reusing the weak positions discovered with each prefix of p,
until the CRC passes or the pattern space is exhausted.  Larger
MaxWeak trades error detection (CRC credibility) for correction.

Bit-vector to polynomial convention: the first bit is the highest
degree coefficient (transmission order), so crc_append emits the
remainder of u(x) x^r high coefficient first.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit, prange

from . import convolutional as conv
from .gf2 import poly_degree, poly_mod

CRC16 = 0x11021  # x^16 + x^12 + x^5 + 1
CRC7 = 0x89  # x^7 + x^3 + 1


@dataclass(frozen=True)
class CrcCode:
    """A CRC generator polynomial (int encoding, bit i = x^i)."""

    poly: int

    def __post_init__(self):
        if self.poly < 0 or not (self.poly & 1):
            raise ValueError("CRC generator must have constant term 1")

    @property
    def degree(self) -> int:
        return poly_degree(self.poly)


def _bits_to_poly(bits) -> int:
    val = 0
    for b in np.asarray(bits, dtype=np.uint8):
        val = (val << 1) | int(b)
    return val


def crc_append(u, crc: CrcCode) -> np.ndarray:
    """Append the r-bit remainder of u(x) x^r mod g(x)."""
    u = np.asarray(u, dtype=np.uint8)
    r = crc.degree
    rem = poly_mod(_bits_to_poly(u) << r, crc.poly)
    tail = np.array([(rem >> (r - 1 - i)) & 1 for i in range(r)], dtype=np.uint8)
    return np.concatenate([u, tail])


def crc_check(v, crc: CrcCode) -> bool:
    """Pass iff v(x) is a multiple of the generator."""
    v = np.asarray(v, dtype=np.uint8)
    if v.size <= crc.degree:
        raise ValueError("word shorter than the CRC degree")
    return poly_mod(_bits_to_poly(v), crc.poly) == 0


def crc_remainder_matrix(crc: CrcCode, length: int) -> np.ndarray:
    """Matrix R with v @ R % 2 = syndrome bits; zero syndrome = pass."""
    r = crc.degree
    R = np.empty((length, r), dtype=np.uint8)
    for i in range(length):
        rem = poly_mod(1 << (length - 1 - i), crc.poly)
        R[i] = [(rem >> (r - 1 - j)) & 1 for j in range(r)]
    return R


@dataclass(frozen=True)
class CrcTbccCode:
    """The (128, 64) CRC-16 / punctured [5537, 6131] concatenation."""

    crc: CrcCode
    cc: conv.ConvCode
    pattern: conv.PuncturePattern
    k: int = 64

    @classmethod
    def standard(cls) -> "CrcTbccCode":
        return cls(
            crc=CrcCode(CRC16),
            cc=conv.ConvCode.from_octal("5537", "6131"),
            pattern=conv.every_fifth_from_third(),
        )

    @property
    def inner_k(self) -> int:
        return self.k + self.crc.degree

    @property
    def mother_n(self) -> int:
        return 2 * self.inner_k

    @property
    def n(self) -> int:
        return self.pattern.punctured_len(self.mother_n)

    def encode(self, u) -> np.ndarray:
        word = crc_append(u, self.crc)
        mother = conv.tb_encode(self.cc, word)
        return conv.puncture(mother, self.pattern)

    def true_state(self, u) -> int:
        """Encoder start/end state for a message (known-state side info)."""
        return conv.tb_start_state(self.cc, crc_append(u, self.crc))


@dataclass(frozen=True)
class FlipDecoderConfig:
    """Weak-position search parameters.

    strong_one is the (positive) extrinsic prior pinning a bit to 1,
    strong_zero the negative one pinning to 0, in the decoder's
    positive-favors-1 prior convention.
    """

    max_weak: int = 10
    strong_one: float = 100.0
    strong_zero: float = -100.0
    known_state: bool = False
    wrap_passes: int = 2

    def __post_init__(self):
        if self.max_weak < 0:
            raise ValueError("max_weak must be >= 0")
        if not self.strong_one > 0.0 > self.strong_zero:
            raise ValueError("need strong_one > 0 > strong_zero")


@dataclass(frozen=True)
class FlipDecodeOutcome:
    message: np.ndarray
    crc_pass: bool
    siso_invocations: int

    @property
    def status(self) -> str:
        return "crcPass" if self.crc_pass else "crcFailExhausted"


@njit(cache=True, inline="always")
def _crc_ok(bits, poly, r):
    reg = np.int64(0)
    top = np.int64(1) << np.int64(r)
    for i in range(bits.size):
        reg = (reg << 1) | np.int64(bits[i])
        if reg & top:
            reg ^= poly
    return reg == 0


@njit(cache=True)
def _flip_frame(
    llr128,
    keep_idx,
    mother_n,
    out_bits,
    ns,
    m,
    crc_poly,
    crc_r,
    max_weak,
    strong_one,
    strong_zero,
    known_state,
    wrap_passes,
):
    """Algorithmic core of the weak-position flip decoder for one frame.

    Returns (hard 80-bit input word, crc_pass flag, siso count).
    """
    T = mother_n // 2
    S = ns.shape[0]
    # depuncture: zero LLR on the dropped positions
    llr_m = np.zeros(mother_n, dtype=np.float64)
    for j in range(llr128.size):
        llr_m[keep_idx[j]] = llr128[j]
    # half-correlation channel branch metrics
    bm = np.empty((T, S, 2), dtype=np.float64)
    for t in range(T):
        l0 = llr_m[2 * t]
        l1 = llr_m[2 * t + 1]
        for s in range(S):
            for b in range(2):
                o0 = out_bits[s, b, 0]
                o1 = out_bits[s, b, 1]
                bm[t, s, b] = 0.5 * ((1.0 - 2.0 * o0) * l0 + (1.0 - 2.0 * o1) * l1)

    prior = np.zeros(T, dtype=np.float64)
    weakposn = np.full((max_weak + 1, 1 << max_weak), -1, dtype=np.int64)
    hard = np.zeros(T, dtype=np.uint8)
    sisos = np.int64(0)

    for w in range(max_weak + 1):
        for p in range(1 << w):
            for t in range(T):
                prior[t] = 0.0
            if w > 0:
                for b0 in range(w):
                    idx = p & ((1 << b0) - 1)
                    pos = weakposn[b0, idx]
                    prior[pos] = strong_one if (p >> b0) & 1 else strong_zero
            app = conv._bcjr_kernel(
                bm, prior, ns, m, known_state, wrap_passes, True
            )
            sisos += 1
            for t in range(T):
                hard[t] = 1 if app[t] > 0.0 else 0
            if _crc_ok(hard, crc_poly, crc_r):
                return hard, True, sisos
            # weakest unpinned a-posteriori position
            weakest = -1
            wval = 1.0e300
            for t in range(T):
                if prior[t] == 0.0 and abs(app[t]) < wval:
                    wval = abs(app[t])
                    weakest = t
            if w < max_weak:
                weakposn[w, p] = weakest
    return hard, False, sisos


@njit(cache=True, parallel=True)
def _flip_batch(
    llrs,
    keep_idx,
    mother_n,
    out_bits,
    ns,
    m,
    crc_poly,
    crc_r,
    max_weak,
    strong_one,
    strong_zero,
    known_states,
    wrap_passes,
):
    B = llrs.shape[0]
    T = mother_n // 2
    words = np.empty((B, T), dtype=np.uint8)
    passed = np.empty(B, dtype=np.bool_)
    sisos = np.empty(B, dtype=np.int64)
    for f in prange(B):
        word, ok, cnt = _flip_frame(
            llrs[f],
            keep_idx,
            mother_n,
            out_bits,
            ns,
            m,
            crc_poly,
            crc_r,
            max_weak,
            strong_one,
            strong_zero,
            known_states[f],
            wrap_passes,
        )
        words[f] = word
        passed[f] = ok
        sisos[f] = cnt
    return words, passed, sisos


def flip_decode(
    code: CrcTbccCode,
    llrs,
    cfg: FlipDecoderConfig,
    known_state: int | None = None,
    trellis=None,
) -> FlipDecodeOutcome:
    """Decode one 128-LLR frame; see the module docstring for the search.

    With cfg.known_state the caller must supply the encoder state
    (harness-provided side information); otherwise the SISO decoder
    wraps around with uniform initial metrics.
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.size != code.n:
        raise ValueError(f"expected {code.n} LLRs, got {llrs.size}")
    if cfg.known_state and known_state is None:
        raise ValueError("known-state decoding requires the encoder state")
    if trellis is None:
        trellis = conv.build_trellis(code.cc)
    keep_idx = np.nonzero(code.pattern.mask(code.mother_n))[0]
    word, ok, sisos = _flip_frame(
        llrs,
        keep_idx,
        code.mother_n,
        trellis.out_bits,
        trellis.next_state,
        trellis.m,
        np.int64(code.crc.poly),
        np.int64(code.crc.degree),
        cfg.max_weak,
        cfg.strong_one,
        cfg.strong_zero,
        np.int64(known_state) if cfg.known_state else np.int64(-1),
        cfg.wrap_passes,
    )
    return FlipDecodeOutcome(
        message=word[: code.k], crc_pass=bool(ok), siso_invocations=int(sisos)
    )


def measure_pud(result) -> float | None:
    """Conditional undetected-error probability from a SimResult.

    undetected / errors over all points; None when no errors occurred.
    """
    errors = sum(p.errors for p in result.points)
    undetected = sum(p.undetected for p in result.points)
    if errors == 0:
        return None
    return undetected / errors
