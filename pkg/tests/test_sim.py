import math

import numpy as np
import pytest

from shortfec.bounds import qfunc
from shortfec.schemes import UncodedScheme
from shortfec.sim import (
    DecoderError,
    SimConfig,
    result_to_csv,
    result_to_json,
    run_simulation,
    wilson_interval,
)


def test_wilson_edges():
    lo, hi = wilson_interval(0, 0)
    assert (lo, hi) == (0.0, 1.0)
    lo, hi = wilson_interval(0, 100)
    assert lo < 1e-12 and 0 < hi < 0.05
    lo, hi = wilson_interval(100, 100)
    assert 0.95 < lo < 1.0 and hi > 1.0 - 1e-12


def test_uncoded_bpsk_matches_qfunction():
    # k = n = 1 at rho = 1 (Eb/N0 = -3.01 dB at R = 1): CER = Q(1)
    scheme = UncodedScheme(k=1)
    ebn0 = 10 * math.log10(0.5)
    cfg = SimConfig(snr_db=(ebn0,), min_errors=10**9, max_frames=200_000, seed=7)
    res = run_simulation(scheme, cfg)
    p = res.points[0]
    expected = float(qfunc(1.0))
    sigma = math.sqrt(expected * (1 - expected) / p.frames)
    assert abs(p.cer - expected) < 3 * sigma


def test_noiseless_limit_no_errors():
    scheme = UncodedScheme(k=4)
    cfg = SimConfig(snr_db=(20.0,), min_errors=100, max_frames=1000, seed=3)
    res = run_simulation(scheme, cfg)
    assert res.points[0].errors == 0
    assert res.points[0].frames == 1000


def test_deterministic_and_worker_invariant():
    scheme = UncodedScheme(k=8)
    cfg = SimConfig(snr_db=(0.0, 2.0), min_errors=50, max_frames=5000, seed=42)
    a = run_simulation(scheme, cfg, workers=1)
    b = run_simulation(scheme, cfg, workers=2)
    assert result_to_csv(a) == result_to_csv(b)
    assert result_to_json(a) == result_to_json(b)


def test_cer_monotone_with_ci_exemption():
    scheme = UncodedScheme(k=16)
    cfg = SimConfig(
        snr_db=(0.0, 1.0, 2.0, 3.0, 4.0), min_errors=200, max_frames=20_000, seed=9
    )
    res = run_simulation(scheme, cfg)
    for a, b in zip(res.points, res.points[1:]):
        assert b.cer <= a.cer or b.ci_lo <= a.ci_hi  # overlap exemption


def test_undetected_accounting_complete_decoder():
    # the uncoded decoder never flags failures: every error is undetected
    scheme = UncodedScheme(k=8)
    cfg = SimConfig(snr_db=(0.0,), min_errors=50, max_frames=4000, seed=1)
    res = run_simulation(scheme, cfg)
    p = res.points[0]
    assert p.undetected == p.errors > 0


class _BoomScheme(UncodedScheme):
    def decode_batch(self, llrs, aux):
        raise RuntimeError("boom")


def test_decoder_error_carries_replay_coordinates():
    cfg = SimConfig(snr_db=(0.0,), min_errors=1, max_frames=10, seed=5)
    with pytest.raises(DecoderError) as ei:
        run_simulation(_BoomScheme(k=2), cfg)
    assert ei.value.seed == 5
    assert ei.value.snr_index == 0
    assert ei.value.frame_start == 0


def test_config_validation():
    with pytest.raises(ValueError):
        SimConfig(snr_db=(1.0,), min_errors=0)
    with pytest.raises(ValueError):
        SimConfig(snr_db=())


def test_csv_shape():
    scheme = UncodedScheme(k=2)
    cfg = SimConfig(snr_db=(1.0, 2.0), min_errors=10, max_frames=500, seed=2)
    res = run_simulation(scheme, cfg)
    text = result_to_csv(res, meta={"scheme": res.scheme})
    lines = text.strip().split("\n")
    assert lines[0].startswith("# scheme=")
    assert lines[1] == "ebn0_db,frames,errors,undetected,cer,ci_lo,ci_hi"
    assert len(lines) == 4
