"""
Seeded Monte Carlo link simulation producing CER-vs-Eb/N0 records.

A *scheme* bundles an encoder and a decoder behind a small duck-typed
surface:

    scheme.n, scheme.k, scheme.name
    scheme.encode_batch(msgs)          (B, k) uint8 -> (B, n) uint8
    scheme.decode_batch(llrs, aux)     (B, n) float -> ((B, k) uint8, (B,) bool)

The second decode output flags *detected* failures; a frame in error
with no flag raised counts as an undetected error.  ``aux`` carries the
true messages/codewords for genie-style decoders (ML lower bounds,
known-state side information); ordinary decoders ignore it.

Frames are independent: each draws its message and noise from a
counter-based stream keyed by (seed, snr_index, frame_index), so the
result is a pure function of (config, scheme) regardless of batch size
or thread count.  Stopping is checked at batch boundaries.
"""

from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .channel import frame_rng, llr, modulate

Z95 = 1.959963984540054


@dataclass(frozen=True)
class SimConfig:
    snr_db: tuple
    min_errors: int = 100
    max_frames: int = 1_000_000
    seed: int = 1
    batch_size: int = 1024

    def __post_init__(self):
        if self.min_errors < 1 or self.max_frames < 1:
            raise ValueError("min_errors and max_frames must be >= 1")
        if len(self.snr_db) == 0:
            raise ValueError("need at least one SNR point")


@dataclass(frozen=True)
class SimAux:
    """Per-batch side information supplied by the harness.

    messages/codewords feed genie-style decoders (ML lower bounds,
    known-state trellis decoding); rho is the linear channel SNR for
    decoders that need to undo the LLR scaling.
    """

    messages: np.ndarray
    codewords: np.ndarray
    rho: float = 0.0


@dataclass(frozen=True)
class SimPoint:
    ebn0_db: float
    frames: int
    errors: int
    undetected: int
    cer: float
    ci_lo: float
    ci_hi: float
    elapsed: float
    seed: int


@dataclass(frozen=True)
class SimResult:
    scheme: str
    seed: int
    points: tuple

    def cer_at(self, ebn0_db: float) -> float:
        for p in self.points:
            if p.ebn0_db == ebn0_db:
                return p.cer
        raise KeyError(ebn0_db)


class DecoderError(RuntimeError):
    """Decoder raised inside the harness; carries replay coordinates."""

    def __init__(self, scheme, snr_index, frame_start, seed, cause):
        self.snr_index = snr_index
        self.frame_start = frame_start
        self.seed = seed
        super().__init__(
            f"decoder '{scheme}' failed at snr_index={snr_index}, "
            f"frames starting at {frame_start}, seed={seed}: {cause!r}"
        )


def wilson_interval(successes: int, trials: int, z: float = Z95):
    """Wilson score interval for a binomial proportion."""
    if trials == 0:
        return 0.0, 1.0
    p = successes / trials
    denom = 1.0 + z * z / trials
    center = p + z * z / (2 * trials)
    half = z * math.sqrt(p * (1.0 - p) / trials + z * z / (4.0 * trials * trials))
    return (center - half) / denom, (center + half) / denom


def _draw_batch(seed, snr_index, frame_start, count, k, n):
    msgs = np.empty((count, k), dtype=np.uint8)
    noise = np.empty((count, n), dtype=np.float64)
    for i in range(count):
        rng = frame_rng(seed, snr_index, frame_start + i)
        msgs[i] = rng.integers(0, 2, size=k, dtype=np.uint8)
        noise[i] = rng.standard_normal(n)
    return msgs, noise


def run_point(scheme, config: SimConfig, snr_index: int) -> SimPoint:
    ebn0_db = config.snr_db[snr_index]
    rate = scheme.k / scheme.n
    rho = 2.0 * rate * 10.0 ** (ebn0_db / 10.0)
    amp = math.sqrt(rho)

    frames = errors = undetected = 0
    t0 = time.perf_counter()
    while frames < config.max_frames and errors < config.min_errors:
        count = min(config.batch_size, config.max_frames - frames)
        msgs, noise = _draw_batch(
            config.seed, snr_index, frames, count, scheme.k, scheme.n
        )
        cw = scheme.encode_batch(msgs)
        y = amp * modulate(cw) + noise
        llrs = llr(y, rho)
        try:
            dec, detected = scheme.decode_batch(llrs, SimAux(msgs, cw, rho))
        except Exception as exc:  # noqa: BLE001 - annotate and re-raise
            raise DecoderError(
                scheme.name, snr_index, frames, config.seed, exc
            ) from exc
        err = np.any(dec != msgs, axis=1)
        errors += int(err.sum())
        undetected += int((err & ~np.asarray(detected, dtype=bool)).sum())
        frames += count
    elapsed = time.perf_counter() - t0

    cer = errors / frames
    ci_lo, ci_hi = wilson_interval(errors, frames)
    return SimPoint(
        ebn0_db=ebn0_db,
        frames=frames,
        errors=errors,
        undetected=undetected,
        cer=cer,
        ci_lo=ci_lo,
        ci_hi=ci_hi,
        elapsed=elapsed,
        seed=config.seed,
    )


def run_simulation(scheme, config: SimConfig, workers: int | None = None) -> SimResult:
    """Simulate every SNR point of the config with the given scheme.

    ``workers`` sizes the numba threading layer used by batch decoders;
    it never affects the numerical result.
    """
    if workers is not None:
        import numba

        numba.set_num_threads(max(1, workers))
    points = [run_point(scheme, config, i) for i in range(len(config.snr_db))]
    return SimResult(scheme=scheme.name, seed=config.seed, points=tuple(points))


CSV_COLUMNS = "ebn0_db,frames,errors,undetected,cer,ci_lo,ci_hi"


def result_to_csv(result: SimResult, meta: dict | None = None) -> str:
    """Render a SimResult as CSV text (elapsed excluded for reproducibility)."""
    lines = []
    for key, val in (meta or {}).items():
        lines.append(f"# {key}={val}")
    lines.append(CSV_COLUMNS)
    for p in result.points:
        lines.append(
            f"{p.ebn0_db:.6g},{p.frames},{p.errors},{p.undetected},"
            f"{p.cer:.10e},{p.ci_lo:.10e},{p.ci_hi:.10e}"
        )
    return "\n".join(lines) + "\n"


def result_to_json(result: SimResult, meta: dict | None = None) -> str:
    doc = {
        "scheme": result.scheme,
        "seed": result.seed,
        "meta": meta or {},
        "points": [
            {
                "ebn0_db": p.ebn0_db,
                "frames": p.frames,
                "errors": p.errors,
                "undetected": p.undetected,
                "cer": p.cer,
                "ci_lo": p.ci_lo,
                "ci_hi": p.ci_hi,
            }
            for p in result.points
        ],
    }
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
