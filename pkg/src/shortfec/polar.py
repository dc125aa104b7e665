"""
Polar codes: Gaussian-approximation construction, encoding, successive
cancellation (list) decoding, CRC-aided selection, and the genie ML
lower bound.

The encoder applies the iterated [1 0; 1 1] butterfly in natural order
(no bit-reversal) and the decoder mirrors it with stride pairing, so
frozen sets, messages and codewords all live in natural index order.

Construction evolves the mean channel LLR (2 rho at the design SNR)
through the polarization stages with the standard two-branch
approximation of the check-node function phi:

    phi(x) = exp(-0.4527 x^0.859 + 0.0218)          x <= 10
    phi(x) = sqrt(pi/x) exp(-x/4) (1 - 10/(7x))     x > 10

and freezes the n-k positions with the smallest mean (ties to the
lower index).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit, prange
from scipy.optimize import brentq

from .crc_tbcc import CrcCode, crc_remainder_matrix


@dataclass(frozen=True)
class PolarDesign:
    """Frozen/information split of an (n, k) polar code."""

    n: int
    k: int
    frozen: np.ndarray  # bool mask, length n
    design_snr_db: float

    def __post_init__(self):
        if self.n & (self.n - 1) or self.n < 2:
            raise ValueError("n must be a power of two >= 2")
        if int(self.frozen.sum()) != self.n - self.k:
            raise ValueError("frozen set size must be n - k")

    @property
    def frozen_set(self) -> np.ndarray:
        return np.nonzero(self.frozen)[0]

    @property
    def info_set(self) -> np.ndarray:
        return np.nonzero(~self.frozen)[0]


_PHI_SWITCH = 10.0


def _log_phi(x: float) -> float:
    if x <= _PHI_SWITCH:
        return -0.4527 * x**0.859 + 0.0218
    return 0.5 * math.log(math.pi / x) - 0.25 * x + math.log1p(-10.0 / (7.0 * x))


def _phi_inv(target_log: float) -> float:
    lo, hi = 1e-12, 1e7
    f_lo = _log_phi(lo) - target_log
    if f_lo <= 0.0:
        return lo
    if _log_phi(hi) - target_log >= 0.0:
        return hi
    return float(brentq(lambda x: _log_phi(x) - target_log, lo, hi, xtol=1e-12))


def _ga_minus(mean: float) -> float:
    # phi(m-) = 1 - (1 - phi(m))^2
    p = math.exp(_log_phi(mean))
    val = 1.0 - (1.0 - p) ** 2
    if val <= 0.0:
        return 1e7
    return _phi_inv(math.log(val))


def ga_design(n: int, k: int, design_snr_db: float) -> PolarDesign:
    """Rank the synthetic channels by Gaussian-approximated mean LLR.

    The all-zero-input channel LLR is N(2 rho, 4 rho) at the design
    Eb/N0 (rho = 2 (k/n) 10^(dB/10)); each polarization stage maps a
    mean m to (minus(m), plus(m) = 2m) interleaved so that index bits,
    most significant first, select the transform chain.
    """
    if n & (n - 1) or n < 2:
        raise ValueError("n must be a power of two >= 2")
    if not 0 < k < n:
        raise ValueError("need 0 < k < n")
    rate = k / n
    rho = 2.0 * rate * 10.0 ** (design_snr_db / 10.0)
    means = np.array([2.0 * rho])
    for _ in range(int(math.log2(n))):
        nxt = np.empty(2 * means.size)
        for j, mval in enumerate(means):
            nxt[2 * j] = _ga_minus(mval)
            nxt[2 * j + 1] = 2.0 * mval
        means = nxt
    order = np.argsort(means, kind="stable")
    frozen = np.zeros(n, dtype=bool)
    frozen[order[: n - k]] = True
    return PolarDesign(n=n, k=k, frozen=frozen, design_snr_db=design_snr_db)


def polar_transform(v) -> np.ndarray:
    """u -> u F^{(x) log2 n} over GF(2), natural order (involutive)."""
    x = np.asarray(v, dtype=np.uint8).copy()
    n = x.size
    h = 1
    while h < n:
        for i in range(0, n, 2 * h):
            x[i: i + h] ^= x[i + h: i + 2 * h]
        h *= 2
    return x


def polar_encode(design: PolarDesign, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.uint8)
    if u.size != design.k:
        raise ValueError(f"message length {u.size} != k={design.k}")
    full = np.zeros(design.n, dtype=np.uint8)
    full[design.info_set] = u
    return polar_transform(full)


# ----------------------------------------------------------------------
# successive cancellation (list) kernel
# ----------------------------------------------------------------------

@njit(cache=True, inline="always")
def _f_op(a, b, exact):
    sa = 1.0 if a >= 0.0 else -1.0
    sb = 1.0 if b >= 0.0 else -1.0
    aa = abs(a)
    ab = abs(b)
    v = sa * sb * (aa if aa < ab else ab)
    if exact:
        s = abs(a + b)
        d = abs(a - b)
        corr = 0.0
        if s < 50.0:
            corr += np.log1p(np.exp(-s))
        if d < 50.0:
            corr -= np.log1p(np.exp(-d))
        v += corr
    return v


@njit(cache=True, inline="always")
def _pm_penalty(l, u):
    # exact path-metric increment: ln(1 + exp(-(1-2u) L))
    x = (1.0 - 2.0 * u) * l
    if x > 50.0:
        return 0.0
    if x < -50.0:
        return -x
    return np.log1p(np.exp(-x))


@njit(cache=True)
def _calc_llr(pflat, bflat, phi, m, exact):
    """Refresh the decision LLR pflat[0] for input position phi.

    pflat holds per-level LLRs (level lam at offset 2^lam - 1, length
    2^lam; level m is the channel).  bflat holds the saved left-sibling
    partial sums per level, same offsets.
    """
    if phi == 0:
        top = m
    else:
        # trailing zeros of phi = level switching from left to right
        l = 0
        t = phi
        while not t & 1:
            l += 1
            t >>= 1
        off_l = (1 << l) - 1
        off_p = (1 << (l + 1)) - 1
        half = 1 << l
        for j in range(half):
            u = bflat[off_l + j]
            pflat[off_l + j] = pflat[off_p + half + j] + (1.0 - 2.0 * u) * pflat[
                off_p + j
            ]
        top = l
    for lam in range(top, 0, -1):
        off_c = (1 << (lam - 1)) - 1
        off = (1 << lam) - 1
        half = 1 << (lam - 1)
        for j in range(half):
            pflat[off_c + j] = _f_op(pflat[off + j], pflat[off + half + j], exact)


@njit(cache=True)
def _propagate_partial(bflat, scratch, u, phi, m):
    """Fold the decided bit into the saved partial sums."""
    scratch[0] = u
    lam = 0
    t = phi
    size = 1
    while (t & 1) and lam < m:
        off = (1 << lam) - 1
        for j in range(size):
            r = scratch[j]
            scratch[size + j] = r
            scratch[j] = bflat[off + j] ^ r
        size <<= 1
        lam += 1
        t >>= 1
    if lam < m:
        off = (1 << lam) - 1
        for j in range(size):
            bflat[off + j] = scratch[j]


@njit(cache=True)
def _scl_kernel(chan_llrs, frozen, list_size, exact, forced):
    """List decode; returns (paths (P, n) u8 inputs, metrics (P,), count).

    With forced[0] >= 0 the single path follows the forced input bits
    (used to score the genie word).
    """
    n = chan_llrs.size
    m = 0
    while (1 << m) < n:
        m += 1
    P = list_size
    force_mode = forced[0] >= 0

    p_a = np.zeros((P, 2 * n - 1), dtype=np.float64)
    b_a = np.zeros((P, n - 1), dtype=np.uint8)
    dec_a = np.zeros((P, n), dtype=np.uint8)
    p_b = np.zeros((P, 2 * n - 1), dtype=np.float64)
    b_b = np.zeros((P, n - 1), dtype=np.uint8)
    dec_b = np.zeros((P, n), dtype=np.uint8)
    scratch = np.empty(n, dtype=np.uint8)
    pm = np.zeros(P, dtype=np.float64)
    p_a[0, n - 1:] = chan_llrs
    active = 1

    for phi in range(n):
        for p in range(active):
            _calc_llr(p_a[p], b_a[p], phi, m, exact)
        if frozen[phi] or force_mode:
            u_fixed = np.uint8(forced[phi]) if force_mode else np.uint8(0)
            for p in range(active):
                pm[p] += _pm_penalty(p_a[p, 0], u_fixed)
                dec_a[p, phi] = u_fixed
                _propagate_partial(b_a[p], scratch, u_fixed, phi, m)
        else:
            n_cand = 2 * active
            cand_pm = np.empty(n_cand, dtype=np.float64)
            for p in range(active):
                root = p_a[p, 0]
                cand_pm[2 * p] = pm[p] + _pm_penalty(root, np.uint8(0))
                cand_pm[2 * p + 1] = pm[p] + _pm_penalty(root, np.uint8(1))
            keep = min(P, n_cand)
            order = np.argsort(cand_pm, kind="mergesort")
            new_pm = np.empty(P, dtype=np.float64)
            for newp in range(keep):
                c = order[newp]
                parent = c >> 1
                u = np.uint8(c & 1)
                p_b[newp] = p_a[parent]
                b_b[newp] = b_a[parent]
                dec_b[newp] = dec_a[parent]
                dec_b[newp, phi] = u
                new_pm[newp] = cand_pm[c]
                _propagate_partial(b_b[newp], scratch, u, phi, m)
            for p in range(keep):
                pm[p] = new_pm[p]
            active = keep
            p_a, p_b = p_b, p_a
            b_a, b_b = b_b, b_a
            dec_a, dec_b = dec_b, dec_a
    return dec_a, pm, active


@njit(cache=True, parallel=True)
def _scl_batch(llrs, frozen, list_size, exact):
    B = llrs.shape[0]
    n = llrs.shape[1]
    paths = np.empty((B, list_size, n), dtype=np.uint8)
    pms = np.empty((B, list_size), dtype=np.float64)
    counts = np.empty(B, dtype=np.int64)
    noforce = np.full(n, -1, dtype=np.int64)
    for f in prange(B):
        dec, pm, active = _scl_kernel(llrs[f], frozen, list_size, exact, noforce)
        paths[f] = dec
        pms[f] = pm
        counts[f] = active
    return paths, pms, counts


@njit(cache=True, parallel=True)
def _forced_pm_batch(llrs, frozen, exact, forced):
    B = llrs.shape[0]
    out = np.empty(B, dtype=np.float64)
    for f in prange(B):
        _, pm, _ = _scl_kernel(llrs[f], frozen, 1, exact, forced[f])
        out[f] = pm[0]
    return out


def sc_decode(design: PolarDesign, llrs, exact: bool = True) -> np.ndarray:
    """Successive cancellation; equals scl_decode with list size 1."""
    msg, _ = scl_decode(design, llrs, list_size=1, exact=exact)
    return msg


def scl_decode(
    design: PolarDesign,
    llrs,
    list_size: int,
    crc: CrcCode | None = None,
    genie_word=None,
    exact: bool = True,
):
    """Successive cancellation list decoding.

    Selection among the final survivors: with a CRC, the best-metric
    CRC-passing path (detected failure when none passes, falling back
    to the best metric overall); otherwise the best metric.  With
    genie_word (the transmitted message bits), the true path is scored
    and inserted into the final list before selection, yielding the ML
    lower bound.

    Returns (message_bits, detected_failure).
    """
    llrs = np.ascontiguousarray(llrs, dtype=np.float64)
    if llrs.size != design.n:
        raise ValueError(f"expected {design.n} LLRs")
    if list_size < 1:
        raise ValueError("list size must be >= 1")
    noforce = np.full(design.n, -1, dtype=np.int64)
    dec, pm, active = _scl_kernel(
        llrs, design.frozen, list_size, exact, noforce
    )
    dec = dec[:active]
    pm = pm[:active]
    info = design.info_set
    msgs = dec[:, info]

    if crc is not None:
        rmat = crc_remainder_matrix(crc, design.k)
        synd = msgs.astype(np.uint32) @ rmat.astype(np.uint32) % 2
        passing = ~synd.any(axis=1)
        if passing.any():
            idx = np.nonzero(passing)[0]
            best = idx[int(np.argmin(pm[idx]))]
            return msgs[best].astype(np.uint8), False
        best = int(np.argmin(pm))
        return msgs[best].astype(np.uint8), True

    best = int(np.argmin(pm))
    if genie_word is not None:
        genie_word = np.asarray(genie_word, dtype=np.uint8)
        full = np.zeros(design.n, dtype=np.int64)
        full[info] = genie_word
        _, pm_true, _ = _scl_kernel(llrs, design.frozen, 1, exact, full)
        if pm_true[0] < pm[best]:
            return genie_word.copy(), False
    return msgs[best].astype(np.uint8), False
