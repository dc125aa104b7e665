"""
Rate-1/2 feedforward convolutional codes on tail-biting trellises.

Generator polynomials are octal numbers read most-significant digit
first, with the most significant bit tapping the current input bit
(lowest delay).  515 (octal) is 101001101 in binary, i.e. taps on
u_t, u_{t-2}, u_{t-5}, u_{t-6}, u_{t-8}; the memory is the bit length
minus one.  This is the classical 133/171-style convention.

Trellis state packs the last m inputs with the most recent input in the
top bit, so next_state(s, b) = (s >> 1) | (b << (m-1)) and the input
bit of a transition is recoverable from the successor's top bit.

Tail-biting: the shift register is preloaded with the last m message
bits, so the encoder starts and ends in the same state and the code is
the set of closed trellis paths of length k.

LLR sign conventions: channel LLRs are positive when bit 0 (symbol +1)
is more likely.  The a-posteriori input-bit LLRs emitted by
:func:`bcjr_siso`, and the extrinsic priors it accepts, are positive
when bit 1 is more likely -- matching pinning a position to 1 by adding
a large positive prior.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np
from numba import njit

NEG_INF = -1e30
_WINF = np.int32(1 << 28)


@dataclass(frozen=True)
class ConvCode:
    """A rate-1/2 feedforward convolutional code."""

    g1: int  # tap polynomial, MSB = current-input tap
    g2: int
    m: int

    @classmethod
    def from_octal(cls, g1: str | int, g2: str | int) -> "ConvCode":
        v1 = int(str(g1), 8)
        v2 = int(str(g2), 8)
        if v1 <= 0 or v2 <= 0:
            raise ValueError("generators must be nonzero")
        m = max(v1.bit_length(), v2.bit_length()) - 1
        if not ((v1 | v2) & 1):
            raise ValueError("degenerate code: no generator taps the oldest bit")
        return cls(g1=v1, g2=v2, m=m)

    @property
    def n_states(self) -> int:
        return 1 << self.m

    def taps(self, which: int) -> np.ndarray:
        """Tap array g[0..m], g[0] on the current input."""
        v = self.g1 if which == 1 else self.g2
        mg = v.bit_length() - 1
        out = np.zeros(self.m + 1, dtype=np.uint8)
        for i in range(mg + 1):
            out[i] = (v >> (mg - i)) & 1
        return out


@dataclass(frozen=True)
class Trellis:
    """Time-invariant section of a rate-1/2 trellis.

    next_state[s, b] and out_bits[s, b] give the successor and the two
    output bits when input b is applied in state s.
    """

    m: int
    n_states: int
    next_state: np.ndarray  # (S, 2) int32
    out_bits: np.ndarray  # (S, 2, 2) uint8


def build_trellis(cc: ConvCode) -> Trellis:
    m, S = cc.m, cc.n_states
    states = np.arange(S, dtype=np.int64)
    next_state = np.empty((S, 2), dtype=np.int32)
    out_bits = np.empty((S, 2, 2), dtype=np.uint8)
    # combined word (b << m) | s; tap mask aligned the same way
    mask1 = cc.g1 << (m - (cc.g1.bit_length() - 1))
    mask2 = cc.g2 << (m - (cc.g2.bit_length() - 1))
    for b in (0, 1):
        w = (b << m) | states
        next_state[:, b] = (states >> 1) | (b << (m - 1))
        out_bits[:, b, 0] = np.bitwise_count(w & mask1) & 1
        out_bits[:, b, 1] = np.bitwise_count(w & mask2) & 1
    return Trellis(m=m, n_states=S, next_state=next_state, out_bits=out_bits)


def tb_start_state(cc: ConvCode, u) -> int:
    u = np.asarray(u, dtype=np.uint8)
    s = 0
    for i in range(1, cc.m + 1):
        s |= int(u[len(u) - i]) << (cc.m - i)
    return s


def tb_encode(cc: ConvCode, u) -> np.ndarray:
    """Tail-biting encode: output length 2 len(u), start state = end state."""
    u = np.asarray(u, dtype=np.uint8)
    k = u.size
    if k < cc.m:
        raise ValueError(f"message length {k} < memory {cc.m}")
    ext = np.concatenate([u[k - cc.m:], u])  # register preload then message
    out = np.empty(2 * k, dtype=np.uint8)
    for j, taps in ((0, cc.taps(1)), (1, cc.taps(2))):
        conv = np.convolve(ext, taps) % 2
        out[j::2] = conv[cc.m: cc.m + k]
    return out


def branch_metrics(trellis: Trellis, llrs) -> np.ndarray:
    """Half-correlation branch metrics, shape (sections, states, 2).

    Entry (t, s, b) is 0.5 * sum_j (1 - 2 out_j(s, b)) L[2t+j]; equal to
    log p(y_t | branch) up to a per-section constant.
    """
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.size % 2:
        raise ValueError("LLR length must be even")
    pm = 0.5 * (1.0 - 2.0 * trellis.out_bits.astype(np.float64))
    return np.einsum("sbj,tj->tsb", pm, llrs.reshape(-1, 2))


@dataclass(frozen=True)
class ViterbiResult:
    inputs: np.ndarray
    final_metrics: np.ndarray
    start_state: int
    end_state: int
    metric: float


@njit(cache=True)
def _viterbi_kernel(bm, init, m):
    T, S, _ = bm.shape
    mask = S - 1
    cur = init.copy()
    new = np.empty(S, dtype=np.float64)
    choice = np.empty((T, S), dtype=np.uint8)
    for t in range(T):
        for sp in range(S):
            b = sp >> (m - 1)
            p0 = (sp << 1) & mask
            p1 = p0 | 1
            m0 = cur[p0] + bm[t, p0, b]
            m1 = cur[p1] + bm[t, p1, b]
            if m0 >= m1:
                new[sp] = m0
                choice[t, sp] = 0
            else:
                new[sp] = m1
                choice[t, sp] = 1
        cur, new = new, cur
    final = cur.copy()
    end = 0
    best = final[0]
    for s in range(1, S):
        if final[s] > best:
            best = final[s]
            end = s
    u = np.empty(T, dtype=np.uint8)
    s = end
    for t in range(T - 1, -1, -1):
        u[t] = s >> (m - 1)
        s = ((s << 1) & mask) | choice[t, s]
    return u, final, s, end, best, choice


@njit(cache=True)
def _traceback_from(choice, m, end_state):
    T = choice.shape[0]
    mask = choice.shape[1] - 1
    u = np.empty(T, dtype=np.uint8)
    s = end_state
    for t in range(T - 1, -1, -1):
        u[t] = s >> (m - 1)
        s = ((s << 1) & mask) | choice[t, s]
    return u, s


@njit(cache=True)
def _survivor_start_states(choice, m):
    """Start state of every survivor, by end state."""
    T, S = choice.shape
    mask = S - 1
    cur = np.arange(S, dtype=np.int64)
    for t in range(T - 1, -1, -1):
        for e in range(S):
            s = cur[e]
            cur[e] = ((s << 1) & mask) | choice[t, s]
    return cur


def viterbi(trellis: Trellis, bm, init_metrics=None) -> ViterbiResult:
    """Max-correlation Viterbi over precomputed branch metrics.

    Ties prefer the lower-numbered predecessor state and the
    lowest-numbered final state.
    """
    bm = np.ascontiguousarray(bm, dtype=np.float64)
    if init_metrics is None:
        init_metrics = np.zeros(trellis.n_states, dtype=np.float64)
    u, final, start, end, metric, _ = _viterbi_kernel(
        bm, np.ascontiguousarray(init_metrics, dtype=np.float64), trellis.m
    )
    return ViterbiResult(
        inputs=u,
        final_metrics=final,
        start_state=int(start),
        end_state=int(end),
        metric=float(metric),
    )


@dataclass(frozen=True)
class WavaResult:
    message: np.ndarray
    detected_failure: bool
    iterations: int


def wava_decode(cc: ConvCode, llrs, max_iters: int = 4, trellis=None) -> WavaResult:
    """Wrap-around Viterbi over the tail-biting trellis.

    Round 1 starts from equiprobable state metrics; each later round
    seeds the initial metrics with the previous round's final metrics.
    Stops as soon as the best survivor starts and ends in the same
    state (tail-biting satisfied, detected_failure False; on round 1
    this certifies the tail-biting ML decision).  Otherwise each round
    also records the best tail-biting survivor over all end states,
    and after max_iters that candidate (from the latest round that had
    one) is returned with detected_failure True; with no tail-biting
    survivor at all, the plain best path is returned.
    """
    if trellis is None:
        trellis = build_trellis(cc)
    llrs = np.asarray(llrs, dtype=np.float64)
    if llrs.size != 0 and llrs.size % 2:
        raise ValueError("LLR length must be even")
    bm = np.ascontiguousarray(branch_metrics(trellis, llrs))
    init = np.zeros(trellis.n_states, dtype=np.float64)
    tb_candidate = None
    last_inputs = None
    for it in range(1, max_iters + 1):
        u, final, start, end, metric, choice = _viterbi_kernel(bm, init, trellis.m)
        if start == end:
            return WavaResult(message=u, detected_failure=False, iterations=it)
        last_inputs = u
        starts = _survivor_start_states(choice, trellis.m)
        tb_states = np.nonzero(starts == np.arange(trellis.n_states))[0]
        if tb_states.size:
            best_tb = tb_states[int(np.argmax(final[tb_states]))]
            tb_candidate = _traceback_from(choice, trellis.m, int(best_tb))[0]
        init = final - final.max()
    message = tb_candidate if tb_candidate is not None else last_inputs
    return WavaResult(message=message, detected_failure=True, iterations=max_iters)


# ----------------------------------------------------------------------
# log-MAP BCJR soft-input soft-output decoding
# ----------------------------------------------------------------------

@njit(cache=True, inline="always")
def _maxstar(a, b, exact):
    if a >= b:
        big, small = a, b
    else:
        big, small = b, a
    if not exact:
        return big
    d = big - small
    if d > 50.0:
        return big
    return big + np.log1p(np.exp(-d))


@njit(cache=True)
def _bcjr_alpha_pass(bm, prior, m, alpha0, exact):
    T, S, _ = bm.shape
    mask = S - 1
    alpha = np.empty((T + 1, S), dtype=np.float64)
    alpha[0] = alpha0
    for t in range(T):
        best = NEG_INF
        for sp in range(S):
            b = sp >> (m - 1)
            g = 0.5 * (2.0 * b - 1.0) * prior[t]
            p0 = (sp << 1) & mask
            p1 = p0 | 1
            a = _maxstar(
                alpha[t, p0] + bm[t, p0, b], alpha[t, p1] + bm[t, p1, b], exact
            )
            a += g
            alpha[t + 1, sp] = a
            if a > best:
                best = a
        for sp in range(S):
            alpha[t + 1, sp] -= best
    return alpha


@njit(cache=True)
def _bcjr_beta_pass(bm, prior, ns, m, betaT, exact):
    T, S, _ = bm.shape
    beta = np.empty((T + 1, S), dtype=np.float64)
    beta[T] = betaT
    for t in range(T - 1, -1, -1):
        best = NEG_INF
        for s in range(S):
            b0 = beta[t + 1, ns[s, 0]] + bm[t, s, 0] - 0.5 * prior[t]
            b1 = beta[t + 1, ns[s, 1]] + bm[t, s, 1] + 0.5 * prior[t]
            v = _maxstar(b0, b1, exact)
            beta[t, s] = v
            if v > best:
                best = v
        for s in range(S):
            beta[t, s] -= best
    return beta


@njit(cache=True)
def _bcjr_kernel(bm, prior, ns, m, known_state, wrap_passes, exact):
    T, S, _ = bm.shape
    if known_state >= 0:
        alpha0 = np.full(S, NEG_INF)
        alpha0[known_state] = 0.0
        betaT = np.full(S, NEG_INF)
        betaT[known_state] = 0.0
        alpha = _bcjr_alpha_pass(bm, prior, m, alpha0, exact)
        beta = _bcjr_beta_pass(bm, prior, ns, m, betaT, exact)
    else:
        alpha0 = np.zeros(S)
        betaT = np.zeros(S)
        alpha = _bcjr_alpha_pass(bm, prior, m, alpha0, exact)
        beta = _bcjr_beta_pass(bm, prior, ns, m, betaT, exact)
        for _ in range(wrap_passes - 1):
            alpha = _bcjr_alpha_pass(bm, prior, m, alpha[T], exact)
            beta = _bcjr_beta_pass(bm, prior, ns, m, beta[0], exact)

    app = np.empty(T, dtype=np.float64)
    for t in range(T):
        num = NEG_INF
        den = NEG_INF
        for s in range(S):
            v1 = alpha[t, s] + bm[t, s, 1] + 0.5 * prior[t] + beta[t + 1, ns[s, 1]]
            v0 = alpha[t, s] + bm[t, s, 0] - 0.5 * prior[t] + beta[t + 1, ns[s, 0]]
            num = _maxstar(num, v1, exact)
            den = _maxstar(den, v0, exact)
        app[t] = num - den
    return app


def bcjr_siso(
    cc: ConvCode,
    channel_llrs,
    extrinsic=None,
    known_state: int | None = None,
    wrap_passes: int = 2,
    exact: bool = True,
    trellis=None,
) -> np.ndarray:
    """A-posteriori input-bit LLRs of the tail-biting trellis (positive = bit 1).

    channel_llrs follow the channel convention (positive = bit 0);
    extrinsic priors and the returned LLRs are positive when bit 1 is
    favored.  With known_state, alpha/beta are pinned to that state at
    both ends; otherwise forward and backward recursions wrap around
    ``wrap_passes`` times starting from uniform metrics.  ``exact``
    selects exact max* (log-MAP); False gives the max-log approximation.
    """
    if trellis is None:
        trellis = build_trellis(cc)
    llrs = np.asarray(channel_llrs, dtype=np.float64)
    T = llrs.size // 2
    if extrinsic is None:
        extrinsic = np.zeros(T, dtype=np.float64)
    extrinsic = np.asarray(extrinsic, dtype=np.float64)
    if extrinsic.size != T:
        raise ValueError("extrinsic length must equal the number of input bits")
    bm = np.ascontiguousarray(branch_metrics(trellis, llrs))
    ks = -1 if known_state is None else int(known_state)
    return _bcjr_kernel(
        bm, extrinsic, trellis.next_state, trellis.m, ks, wrap_passes, exact
    )


# ----------------------------------------------------------------------
# Puncturing
# ----------------------------------------------------------------------

@dataclass(frozen=True)
class PuncturePattern:
    """Periodic keep-mask over mother-code output positions."""

    keep: np.ndarray  # bool, length = period

    @property
    def period(self) -> int:
        return self.keep.size

    @property
    def kept_per_period(self) -> int:
        return int(self.keep.sum())

    def mask(self, length: int) -> np.ndarray:
        if length % self.period:
            raise ValueError(f"length {length} not a multiple of period {self.period}")
        return np.tile(self.keep, length // self.period)

    def punctured_len(self, length: int) -> int:
        return int(self.mask(length).sum())


def every_fifth_from_third() -> PuncturePattern:
    """Drop every fifth output bit starting with the third (positions 2 mod 5)."""
    return PuncturePattern(keep=np.array([1, 1, 0, 1, 1], dtype=bool))


def puncture(bits_or_symbols, pattern: PuncturePattern) -> np.ndarray:
    x = np.asarray(bits_or_symbols)
    return x[pattern.mask(x.size)]


def depuncture_llr(llrs, pattern: PuncturePattern, mother_len: int) -> np.ndarray:
    """Insert zero LLRs at the punctured positions."""
    llrs = np.asarray(llrs, dtype=np.float64)
    mask = pattern.mask(mother_len)
    if int(mask.sum()) != llrs.size:
        raise ValueError(
            f"LLR length {llrs.size} inconsistent with pattern "
            f"({int(mask.sum())} kept of {mother_len})"
        )
    out = np.zeros(mother_len, dtype=np.float64)
    out[mask] = llrs
    return out


# ----------------------------------------------------------------------
# Truncated tail-biting weight spectrum
# ----------------------------------------------------------------------

@njit(cache=True)
def _tb_backward_mincost(ns, bw, s0, k):
    """f[j][s] = min weight of a j-step path from s to s0."""
    S = ns.shape[0]
    f = np.empty((k + 1, S), dtype=np.int32)
    f[0, :] = _WINF
    f[0, s0] = 0
    for j in range(1, k + 1):
        for s in range(S):
            a = bw[s, 0] + f[j - 1, ns[s, 0]]
            b = bw[s, 1] + f[j - 1, ns[s, 1]]
            f[j, s] = a if a < b else b
    return f


@njit(cache=True)
def _tb_count_from_state(ns, bw, f, s0, k, wmax):
    """Count closed k-step paths at s0 by weight, pruned by completion cost f."""
    counts = np.zeros(wmax + 1, dtype=np.int64)
    cap = 4 * (wmax + 1)
    st = np.empty(cap, dtype=np.int64)  # packed key: state * (wmax+1) + weight
    ct = np.empty(cap, dtype=np.int64)
    st[0] = s0 * (wmax + 1) + 0
    ct[0] = 1
    size = 1
    for t in range(k):
        rem = k - t - 1
        nkeys = np.empty(2 * size, dtype=np.int64)
        ncnts = np.empty(2 * size, dtype=np.int64)
        n = 0
        for i in range(size):
            s = st[i] // (wmax + 1)
            w = st[i] % (wmax + 1)
            c = ct[i]
            for b in range(2):
                s2 = ns[s, b]
                w2 = w + bw[s, b]
                if w2 <= wmax and w2 + f[rem, s2] <= wmax:
                    nkeys[n] = s2 * (wmax + 1) + w2
                    ncnts[n] = c
                    n += 1
        if n == 0:
            return counts
        order = np.argsort(nkeys[:n], kind="mergesort")
        if n > cap:
            cap = 2 * n
            st = np.empty(cap, dtype=np.int64)
            ct = np.empty(cap, dtype=np.int64)
        size = 0
        prev = np.int64(-1)
        for idx in range(n):
            j = order[idx]
            key = nkeys[j]
            if key == prev:
                ct[size - 1] += ncnts[j]
            else:
                st[size] = key
                ct[size] = ncnts[j]
                size += 1
                prev = key
    for i in range(size):
        # f pruning guarantees the surviving state is s0
        counts[st[i] % (wmax + 1)] += ct[i]
    return counts


def _min_cost_to_zero(ns, bw):
    S = ns.shape[0]
    u = np.full(S, _WINF, dtype=np.int64)
    u[0] = 0
    while True:
        cand = np.minimum(bw[:, 0] + u[ns[:, 0]], bw[:, 1] + u[ns[:, 1]])
        cand[0] = 0
        new = np.minimum(u, cand)
        if np.array_equal(new, u):
            return new
        u = new


def _min_cost_from_zero(ns, bw):
    S = ns.shape[0]
    v = np.full(S, np.int64(_WINF))
    v[0] = 0
    while True:
        new = v.copy()
        for b in (0, 1):
            np.minimum.at(new, ns[:, b], v + bw[:, b])
        new[0] = 0
        if np.array_equal(new, v):
            return new
        v = new


def _min_weight_cycle_avoiding_zero(ns, bw, k):
    S = ns.shape[0]
    cost = np.zeros(S, dtype=np.int64)
    cost[0] = _WINF
    for _ in range(k):
        stepped = np.where(ns[:, 0] == 0, _WINF, bw[:, 0] + cost[ns[:, 0]])
        alt = np.where(ns[:, 1] == 0, _WINF, bw[:, 1] + cost[ns[:, 1]])
        cost = np.minimum(stepped, alt)
        cost[0] = _WINF
        cost = np.minimum(cost, _WINF)
    return int(cost.min())


def weight_spectrum_tb(cc: ConvCode, k: int, wmax: int, trellis=None) -> dict:
    """Exact multiplicities of tail-biting codewords of weight <= wmax.

    Runs a weight-bounded search over the tail-biting trellis, one
    starting state at a time, pruning with per-state minimum completion
    weights from a backward dynamic program.  Starting states that
    provably carry no light codeword are skipped using free-length
    minimum in/out weights through the zero state.

    Returns:
        dict mapping every weight in 0..wmax to its exact multiplicity.
    """
    if k < cc.m:
        raise ValueError(f"k={k} smaller than memory {cc.m}")
    if wmax > 24:
        raise ValueError(
            f"wmax={wmax} too large for the search budget; use wmax <= 24"
        )
    if trellis is None:
        trellis = build_trellis(cc)
    ns = trellis.next_state
    bw = trellis.out_bits.sum(axis=2).astype(np.int32)  # (S, 2) branch weights

    S = trellis.n_states
    u = _min_cost_to_zero(ns, bw)
    v = _min_cost_from_zero(ns, bw)
    through_zero_ok = (u + v) <= wmax
    if _min_weight_cycle_avoiding_zero(ns, bw, k) <= wmax:
        candidates = np.arange(S)
    else:
        candidates = np.nonzero(through_zero_ok)[0]

    total = np.zeros(wmax + 1, dtype=np.int64)
    for s0 in candidates:
        f = _tb_backward_mincost(ns, bw, np.int64(s0), k)
        if f[k, s0] > wmax:
            continue
        total += _tb_count_from_state(ns, bw, f, np.int64(s0), k, wmax)
    return {w: int(total[w]) for w in range(wmax + 1)}
