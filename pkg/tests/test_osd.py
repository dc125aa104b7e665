import math

import numpy as np
import pytest

from shortfec.channel import llr, modulate, transmit
from shortfec.codes import golay_24_12, hamming_7_4
from shortfec.osd import OsdConfig, osd_candidate_count, osd_decode, osd_decode_batch


def _all_codewords(code):
    k = code.k
    msgs = np.array(
        [[(i >> j) & 1 for j in range(k)] for i in range(1 << k)], dtype=np.uint8
    )
    return msgs, (msgs.astype(np.uint32) @ code.G.astype(np.uint32) % 2).astype(
        np.uint8
    )


def test_candidate_counts():
    assert osd_candidate_count(64, 0) == 1
    assert osd_candidate_count(12, 2) == 79
    assert osd_candidate_count(64, 4) == 1 + 64 + 2016 + 41664 + 635376
    with pytest.raises(OverflowError):
        osd_candidate_count(400, 40)
    with pytest.raises(ValueError):
        osd_candidate_count(4, 5)


def test_noiseless_order_zero_returns_transmitted(rng):
    code = hamming_7_4()
    for _ in range(50):
        u = rng.integers(0, 2, 4, dtype=np.uint8)
        x = code.encode(u)
        L = 10.0 * (1.0 - 2.0 * x.astype(float))
        cw, detected = osd_decode(code, L, OsdConfig(order=0))
        assert not detected
        assert np.array_equal(cw, x)


def test_output_is_always_a_codeword(rng):
    code = golay_24_12()
    llrs = rng.normal(0, 2, (400, 24))
    cws = osd_decode_batch(code, llrs, OsdConfig(order=2))
    assert not (cws.astype(np.uint32) @ code.H.T.astype(np.uint32) % 2).any()


def test_hamming_t4_matches_exhaustive_ml(rng):
    code = hamming_7_4()
    msgs, cws = _all_codewords(code)
    sym = 1.0 - 2.0 * cws.astype(np.float64)
    rho = 10 ** 0.2
    n_frames = 100_000
    idx = rng.integers(0, 16, n_frames)
    y = math.sqrt(rho) * sym[idx] + rng.standard_normal((n_frames, 7))
    L = 2 * math.sqrt(rho) * y
    dec = osd_decode_batch(code, L, OsdConfig(order=4))
    ml = sym[np.argmax(L @ sym.T, axis=1)]
    assert np.array_equal(1.0 - 2.0 * dec.astype(np.float64), ml)


def test_metric_improves_with_order(rng):
    code = golay_24_12()
    rho = 1.5
    for _ in range(200):
        u = rng.integers(0, 2, 12, dtype=np.uint8)
        x = code.encode(u)
        y = transmit(modulate(x), rho, rng)
        L = llr(y, rho)
        cw1, _ = osd_decode(code, L, OsdConfig(order=1))
        cw4, _ = osd_decode(code, L, OsdConfig(order=4))
        m1 = float((1.0 - 2.0 * cw1.astype(float)) @ L)
        m4 = float((1.0 - 2.0 * cw4.astype(float)) @ L)
        assert m4 >= m1 - 1e-9


def test_golay_early_stop_never_changes_decision(rng):
    code = golay_24_12()
    rho = 2 * 0.5 * 10 ** 0.4
    n_frames = 10_000
    msgs = rng.integers(0, 2, (n_frames, 12), dtype=np.uint8)
    cws = (msgs.astype(np.uint32) @ code.G.astype(np.uint32) % 2).astype(np.uint8)
    y = math.sqrt(rho) * (1.0 - 2.0 * cws) + rng.standard_normal((n_frames, 24))
    L = 2 * math.sqrt(rho) * y
    plain = osd_decode_batch(code, L, OsdConfig(order=2), rho=0.0)
    stopped = osd_decode_batch(code, L, OsdConfig(order=2, d_min=8), rho=rho)
    assert np.array_equal(plain, stopped)


def test_osd_cer_at_least_ml(rng):
    # complete-decoder coherence: OSD cannot beat exhaustive ML (within CI)
    code = hamming_7_4()
    msgs, cws = _all_codewords(code)
    sym = 1.0 - 2.0 * cws.astype(np.float64)
    rho = 1.0
    n_frames = 30_000
    idx = rng.integers(0, 16, n_frames)
    y = math.sqrt(rho) * sym[idx] + rng.standard_normal((n_frames, 7))
    L = 2 * math.sqrt(rho) * y
    dec = osd_decode_batch(code, L, OsdConfig(order=2))
    ml_idx = np.argmax(L @ sym.T, axis=1)
    osd_err = (dec != cws[idx]).any(axis=1).mean()
    ml_err = (ml_idx != idx).mean()
    sigma = math.sqrt(ml_err * (1 - ml_err) / n_frames)
    assert osd_err >= ml_err - 3 * sigma


def test_rejects_bad_lengths():
    code = hamming_7_4()
    with pytest.raises(ValueError):
        osd_decode(code, np.zeros(6), OsdConfig(order=1))


def _brute_osd(code, L, t):
    """Plain enumeration of every pattern, no pruning: the documented
    algorithm followed literally."""
    import itertools

    from shortfec.gf2 import rref_systematic

    perm = np.argsort(-np.abs(L), kind="stable")
    Gs, fperm = rref_systematic(code.G, perm)
    Lp = L[fperm]
    u = (Lp[: code.k] < 0).astype(np.uint8)
    best, bestm = None, -1e300
    for w in range(t + 1):
        for combo in itertools.combinations(range(code.k), w):
            e = u.copy()
            for i in combo:
                e[i] ^= 1
            cw = e.astype(np.uint32) @ Gs.astype(np.uint32) % 2
            m = float((1 - 2.0 * cw) @ Lp)
            if m > bestm:
                bestm, best = m, cw.copy()
    out = np.empty(code.n, dtype=np.uint8)
    out[fperm] = best
    return out


@pytest.mark.parametrize("t", [0, 1, 2, 4])
def test_branch_and_bound_equals_plain_enumeration(t, rng):
    code = golay_24_12()
    for _ in range(40):
        L = rng.normal(0, 2, code.n)
        ref = _brute_osd(code, L, t)
        got, _ = osd_decode(code, L, OsdConfig(order=t))
        assert np.array_equal(got, ref)
