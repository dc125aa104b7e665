import math

import numpy as np
import pytest

from shortfec import convolutional as cv


@pytest.fixture(scope="module")
def toy():
    return cv.ConvCode.from_octal("5", "7")


@pytest.fixture(scope="module")
def m8():
    return cv.ConvCode.from_octal("515", "677")


def _all_tb_codewords(cc, k):
    msgs = np.array(
        [[(i >> j) & 1 for j in range(k)] for i in range(1 << k)], dtype=np.uint8
    )
    cws = np.array([cv.tb_encode(cc, m) for m in msgs])
    return msgs, cws


def test_octal_parsing(toy, m8):
    assert toy.m == 2 and toy.n_states == 4
    assert m8.m == 8
    assert cv.ConvCode.from_octal("5537", "6131").m == 11
    assert cv.ConvCode.from_octal("75063", "56711").m == 14
    # classical K=7 pair
    assert cv.ConvCode.from_octal("133", "171").m == 6
    with pytest.raises(ValueError):
        cv.ConvCode.from_octal("0", "7")


def test_taps_msb_first(m8):
    # 515 octal = 101001101: taps on u_t, u_{t-2}, u_{t-5}, u_{t-6}, u_{t-8}
    assert list(m8.taps(1)) == [1, 0, 1, 0, 0, 1, 1, 0, 1]


def test_tb_encode_zero(m8):
    assert cv.tb_encode(m8, np.zeros(64, dtype=np.uint8)).sum() == 0


def test_tb_encode_single_one_weight(m8):
    u = np.zeros(64, dtype=np.uint8)
    u[0] = 1
    assert cv.tb_encode(m8, u).sum() >= 12  # free-distance floor from the spectrum


def test_tb_encode_requires_k_at_least_m(m8):
    with pytest.raises(ValueError):
        cv.tb_encode(m8, np.zeros(7, dtype=np.uint8))


def test_tb_constraint_and_trellis_agree(m8, rng):
    trellis = cv.build_trellis(m8)
    for _ in range(10):
        u = rng.integers(0, 2, 64, dtype=np.uint8)
        s = s0 = cv.tb_start_state(m8, u)
        out = []
        for t in range(64):
            b = int(u[t])
            out.extend(trellis.out_bits[s, b])
            s = trellis.next_state[s, b]
        assert s == s0
        assert np.array_equal(np.array(out, dtype=np.uint8), cv.tb_encode(m8, u))


def test_tb_encode_linearity(m8, rng):
    for _ in range(20):
        u = rng.integers(0, 2, 64, dtype=np.uint8)
        v = rng.integers(0, 2, 64, dtype=np.uint8)
        assert np.array_equal(
            cv.tb_encode(m8, u ^ v), cv.tb_encode(m8, u) ^ cv.tb_encode(m8, v)
        )


def test_viterbi_noiseless_metric(toy, rng):
    trellis = cv.build_trellis(toy)
    u = rng.integers(0, 2, 16, dtype=np.uint8)
    x = cv.tb_encode(toy, u)
    L = 3.0 * (1.0 - 2.0 * x.astype(float))
    # full-correlation branch metrics: path metric equals sum |L|
    bm = 2.0 * cv.branch_metrics(trellis, L)
    init = np.full(trellis.n_states, -1e9)
    init[cv.tb_start_state(toy, u)] = 0.0
    res = cv.viterbi(trellis, bm, init)
    assert np.array_equal(res.inputs, u)
    assert math.isclose(res.metric, np.abs(L).sum(), rel_tol=1e-12)


def test_viterbi_all_zero_llrs_deterministic(toy):
    trellis = cv.build_trellis(toy)
    bm = cv.branch_metrics(trellis, np.zeros(16))
    r1 = cv.viterbi(trellis, bm)
    r2 = cv.viterbi(trellis, bm)
    assert np.array_equal(r1.inputs, r2.inputs)
    # ties prefer the lower-numbered predecessor: the survivor is all zero
    assert r1.inputs.sum() == 0


def test_wava_noiseless_one_iteration(m8, rng):
    u = rng.integers(0, 2, 64, dtype=np.uint8)
    x = cv.tb_encode(m8, u)
    L = 8.0 * (1.0 - 2.0 * x.astype(float))
    res = cv.wava_decode(m8, L)
    assert res.iterations == 1
    assert not res.detected_failure
    assert np.array_equal(res.message, u)


def test_wava_iteration1_convergence_certifies_ml(toy, rng):
    """A round-1 tail-biting survivor dominates every path: it is TB-ML."""
    k = 8
    msgs, cws = _all_tb_codewords(toy, k)
    sym = 1.0 - 2.0 * cws.astype(np.float64)
    rho = 10 ** 0.3
    checked = 0
    for _ in range(3000):
        i = rng.integers(0, 1 << k)
        y = math.sqrt(rho) * sym[i] + rng.standard_normal(2 * k)
        L = 2 * math.sqrt(rho) * y
        res = cv.wava_decode(toy, L)
        if res.iterations == 1 and not res.detected_failure:
            ml = int(np.argmax(sym @ L))
            got = int(sum(int(b) << j for j, b in enumerate(res.message)))
            assert got == ml
            checked += 1
    assert checked > 2000


def test_wava_cer_tracks_exhaustive_tb_ml(toy, rng):
    k = 8
    msgs, cws = _all_tb_codewords(toy, k)
    sym = 1.0 - 2.0 * cws.astype(np.float64)
    rho = 10 ** 0.3  # 3 dB at rate 1/2
    n_frames = 10_000
    wava_err = ml_err = 0
    for _ in range(n_frames):
        i = rng.integers(0, 1 << k)
        y = math.sqrt(rho) * sym[i] + rng.standard_normal(2 * k)
        L = 2 * math.sqrt(rho) * y
        res = cv.wava_decode(toy, L)
        got = int(sum(int(b) << j for j, b in enumerate(res.message)))
        wava_err += got != i
        ml_err += int(np.argmax(sym @ L)) != i
    # overlapping Wilson 95% intervals
    from shortfec.sim import wilson_interval

    w_lo, w_hi = wilson_interval(wava_err, n_frames)
    m_lo, m_hi = wilson_interval(ml_err, n_frames)
    assert w_lo <= m_hi and m_lo <= w_hi
    assert wava_err >= ml_err - 3  # ML optimality, small-sample slack


# ----------------------------------------------------------------------- BCJR

def test_bcjr_noiseless_signs(toy, rng):
    u = rng.integers(0, 2, 12, dtype=np.uint8)
    x = cv.tb_encode(toy, u)
    L = 6.0 * (1.0 - 2.0 * x.astype(float))
    app = cv.bcjr_siso(toy, L, known_state=cv.tb_start_state(toy, u))
    # output convention: positive favors bit 1
    assert np.array_equal((app > 0).astype(np.uint8), u)


def test_bcjr_known_state_matches_exhaustive_posterior(toy, rng):
    k = 6
    msgs, cws = _all_tb_codewords(toy, k)
    sym = 1.0 - 2.0 * cws.astype(np.float64)
    starts = np.array([cv.tb_start_state(toy, m) for m in msgs])
    for _ in range(100):
        i = rng.integers(0, 1 << k)
        y = math.sqrt(1.0) * sym[i] + rng.standard_normal(2 * k)
        L = 2 * y
        logp = 0.5 * (sym @ L)
        s0 = starts[i]
        sel = starts == s0
        app = cv.bcjr_siso(toy, L, known_state=int(s0))
        for t in range(k):
            ones = logp[sel & (msgs[:, t] == 1)]
            zeros = logp[sel & (msgs[:, t] == 0)]
            if ones.size == 0:
                assert app[t] < -1e20
            elif zeros.size == 0:
                assert app[t] > 1e20
            else:
                ref = np.logaddexp.reduce(ones) - np.logaddexp.reduce(zeros)
                assert abs(app[t] - ref) < 1e-9


def test_bcjr_unknown_state_wrap_tolerance(toy, rng):
    """Wrap-around is an approximation of the tail-biting posterior.

    On this deliberately hostile toy (k = 6 with m = 2, so wrap effects
    are large) the documented tolerance is: mean |LLR error| <= 2.5 and
    hard-decision agreement with the exact marginals >= 85%.
    """
    k = 6
    msgs, cws = _all_tb_codewords(toy, k)
    sym = 1.0 - 2.0 * cws.astype(np.float64)
    diffs = []
    flips = 0
    total = 0
    for _ in range(200):
        i = rng.integers(0, 1 << k)
        y = sym[i] + rng.standard_normal(2 * k)
        L = 2 * y
        logp = 0.5 * (sym @ L)
        ref = np.array(
            [
                np.logaddexp.reduce(logp[msgs[:, t] == 1])
                - np.logaddexp.reduce(logp[msgs[:, t] == 0])
                for t in range(k)
            ]
        )
        app = cv.bcjr_siso(toy, L)
        diffs.extend(np.abs(app - ref))
        flips += int(((app > 0) != (ref > 0)).sum())
        total += k
    assert float(np.mean(diffs)) <= 2.5
    assert flips / total <= 0.15


def test_bcjr_strong_extrinsic_dominates(toy, rng):
    u = rng.integers(0, 2, 10, dtype=np.uint8)
    x = cv.tb_encode(toy, u)
    L = 1.0 * (1.0 - 2.0 * x.astype(float))
    ext = np.zeros(10)
    ext[3] = -100.0  # strong 0 pins position 3
    app = cv.bcjr_siso(toy, L, extrinsic=ext, known_state=cv.tb_start_state(toy, u))
    assert app[3] < 0 and abs(app[3]) >= 90.0


# ------------------------------------------------------------------ puncturing

def test_puncture_positions():
    pat = cv.every_fifth_from_third()
    x = np.arange(160)
    kept = cv.puncture(x, pat)
    assert kept.size == 128
    dropped = sorted(set(range(160)) - set(kept.tolist()))
    assert dropped == list(range(2, 160, 5))


def test_depuncture_round_trip(rng):
    pat = cv.every_fifth_from_third()
    L = rng.normal(0, 1, 128)
    full = cv.depuncture_llr(L, pat, 160)
    assert np.array_equal(full[pat.mask(160)], L)
    assert (full[~pat.mask(160)] == 0).all()
    with pytest.raises(ValueError):
        cv.depuncture_llr(L[:100], pat, 160)


def test_puncture_rate_shift():
    pat = cv.every_fifth_from_third()
    assert pat.punctured_len(160) == 128  # (160,64) -> (128,64)


# ------------------------------------------------------------- weight spectrum

def test_weight_spectrum_m8_matches_quoted_coefficients(m8):
    ws = cv.weight_spectrum_tb(m8, 64, 14)
    assert ws[0] == 1
    assert all(ws[w] == 0 for w in range(1, 12))
    assert (ws[12], ws[13], ws[14]) == (576, 1152, 1856)


def test_weight_spectrum_toy_brute_force(toy):
    k = 8
    msgs, cws = _all_tb_codewords(toy, k)
    weights = cws.sum(axis=1)
    brute = {w: int((weights == w).sum()) for w in range(17)}
    ws = cv.weight_spectrum_tb(toy, k, 16)
    assert ws == brute


def test_weight_spectrum_prefix_consistency(toy):
    full = cv.weight_spectrum_tb(toy, 8, 12)
    part = cv.weight_spectrum_tb(toy, 8, 8)
    assert all(part[w] == full[w] for w in range(9))


def test_weight_spectrum_rejects_large_wmax(toy):
    with pytest.raises(ValueError):
        cv.weight_spectrum_tb(toy, 8, 30)
