"""
Command-line front end: experiment simulation, benchmark tables,
weight spectra, and polar designs.

Subcommands
    simulate         run a JSON experiment spec, emit CSV + JSON sidecar
    bound            normal-approximation tables for an (n, k) code
    weight-spectrum  truncated tail-biting weight enumerator
    design-polar     frozen set of a GA-designed polar code

Exit codes: 0 success, 2 spec/usage error, 3 runtime error.

Experiment specs are JSON objects:

    {
      "scheme": "tbcc-wava",
      "params": {"g1": "515", "g2": "677", "k": 64},
      "snr_db": [1.0, 2.0, 3.0],
      "min_errors": 100,
      "max_frames": 100000,
      "seed": 1,
      "batch_size": 1024,
      "out": "results/tbcc_m8"
    }

Simulations write one CSV row per SNR point plus a sidecar
<out>.json embedding the spec, its hash, and the toolkit version; both
files are byte-identical across reruns and worker counts.  Completed
points checkpoint to the sidecar after every SNR point, so interrupted
sweeps resume with --resume.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

from . import __version__, bounds
from .convolutional import ConvCode, weight_spectrum_tb
from .polar import ga_design
from .schemes import build_scheme
from .sim import CSV_COLUMNS, SimConfig, SimPoint, run_point

EXIT_SPEC = 2
EXIT_RUNTIME = 3


class SpecError(ValueError):
    pass


def _require(spec: dict, key: str, typ, what: str):
    if key not in spec:
        raise SpecError(f"missing key '{key}' ({what})")
    val = spec[key]
    if typ is float and isinstance(val, int):
        val = float(val)
    if not isinstance(val, typ):
        raise SpecError(f"key '{key}': expected {what}, got {val!r}")
    return val


def _load_spec(path: str) -> tuple[dict, str]:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = fh.read()
    except OSError as exc:
        raise SpecError(f"cannot read spec file: {exc}") from None
    try:
        spec = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise SpecError(f"malformed JSON in spec: {exc}") from None
    if not isinstance(spec, dict):
        raise SpecError("spec must be a JSON object")
    digest = hashlib.sha256(
        json.dumps(spec, sort_keys=True).encode("utf-8")
    ).hexdigest()
    return spec, digest


def _parse_sim_spec(spec: dict):
    scheme_id = _require(spec, "scheme", str, "scheme id")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise SpecError("key 'params': expected an object")
    snr = _require(spec, "snr_db", list, "list of Eb/N0 dB values")
    snr = [float(x) for x in snr]
    if any(b <= a for a, b in zip(snr, snr[1:])):
        raise SpecError("key 'snr_db': grid must be strictly increasing")
    config = SimConfig(
        snr_db=tuple(snr),
        min_errors=int(spec.get("min_errors", 100)),
        max_frames=int(spec.get("max_frames", 1_000_000)),
        seed=int(spec.get("seed", 1)),
        batch_size=int(spec.get("batch_size", 1024)),
    )
    try:
        scheme = build_scheme(scheme_id, params)
    except KeyError as exc:
        raise SpecError(str(exc.args[0])) from None
    return scheme, config


def _points_to_rows(points) -> list:
    return [
        {
            "ebn0_db": p.ebn0_db,
            "frames": p.frames,
            "errors": p.errors,
            "undetected": p.undetected,
            "cer": p.cer,
            "ci_lo": p.ci_lo,
            "ci_hi": p.ci_hi,
        }
        for p in points
    ]


def _write_outputs(out_base: str, spec: dict, digest: str, scheme_name: str, points):
    meta = {
        "scheme": scheme_name,
        "seed": spec.get("seed", 1),
        "spec_sha256": digest,
        "shortfec_version": __version__,
    }
    csv_lines = [f"# {k}={v}" for k, v in meta.items()]
    csv_lines.append(CSV_COLUMNS)
    for p in points:
        csv_lines.append(
            f"{p.ebn0_db:.6g},{p.frames},{p.errors},{p.undetected},"
            f"{p.cer:.10e},{p.ci_lo:.10e},{p.ci_hi:.10e}"
        )
    sidecar = {
        "spec": spec,
        "spec_sha256": digest,
        "shortfec_version": __version__,
        "scheme": scheme_name,
        "completed_snr_db": [p.ebn0_db for p in points],
        "points": _points_to_rows(points),
    }
    _atomic_write(out_base + ".csv", "\n".join(csv_lines) + "\n")
    _atomic_write(out_base + ".json", json.dumps(sidecar, indent=2, sort_keys=True) + "\n")


def _atomic_write(path: str, text: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _restore_points(out_base: str, digest: str) -> list:
    try:
        with open(out_base + ".json", "r", encoding="utf-8") as fh:
            sidecar = json.load(fh)
    except (OSError, json.JSONDecodeError):
        return []
    if sidecar.get("spec_sha256") != digest:
        return []
    points = []
    for row in sidecar.get("points", []):
        points.append(
            SimPoint(
                ebn0_db=row["ebn0_db"],
                frames=row["frames"],
                errors=row["errors"],
                undetected=row["undetected"],
                cer=row["cer"],
                ci_lo=row["ci_lo"],
                ci_hi=row["ci_hi"],
                elapsed=0.0,
                seed=sidecar["spec"].get("seed", 1),
            )
        )
    return points


def cmd_simulate(args) -> int:
    spec, digest = _load_spec(args.spec)
    scheme, config = _parse_sim_spec(spec)
    out_base = spec.get("out")
    if not isinstance(out_base, str) or not out_base:
        raise SpecError("missing key 'out' (output path base)")
    if args.workers is not None:
        import numba

        numba.set_num_threads(max(1, args.workers))

    points = _restore_points(out_base, digest) if args.resume else []
    start_index = len(points)
    deadline = (
        time.monotonic() + args.max_seconds if args.max_seconds is not None else None
    )
    for i in range(start_index, len(config.snr_db)):
        if deadline is not None and time.monotonic() > deadline:
            print(
                f"wall-clock budget reached; checkpointed {len(points)} of "
                f"{len(config.snr_db)} points (resume with --resume)",
                file=sys.stderr,
            )
            break
        points.append(run_point(scheme, config, i))
        _write_outputs(out_base, spec, digest, scheme.name, points)
    if not points:
        _write_outputs(out_base, spec, digest, scheme.name, points)
    print(f"wrote {out_base}.csv ({len(points)} points)")
    return 0


def _float_list(text: str) -> list:
    try:
        return [float(x) for x in text.split(",") if x]
    except ValueError:
        raise SpecError(f"expected comma-separated floats, got {text!r}") from None


def cmd_bound(args) -> int:
    n, k = args.n, args.k
    if not 0 < k < n:
        raise SpecError("need 0 < k < n")
    lines = ["ebn0_db,epsilon"]
    if args.eps_grid:
        for eps in _float_list(args.eps_grid):
            ebn0 = bounds.na_required_ebn0(n, k, eps)
            lines.append(f"{ebn0:.10e},{eps:.10e}")
    elif args.snr_grid:
        for ebn0 in _float_list(args.snr_grid):
            eps = bounds.na_epsilon_at_ebn0(n, k, ebn0)
            lines.append(f"{ebn0:.10e},{eps:.10e}")
    else:
        raise SpecError("one of --eps-grid or --snr-grid is required")
    text = "\n".join(lines) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def cmd_weight_spectrum(args) -> int:
    gens = args.generators.split(",")
    if len(gens) != 2:
        raise SpecError("--generators takes two octal numbers, e.g. 515,677")
    cc = ConvCode.from_octal(gens[0].strip(), gens[1].strip())
    spectrum = weight_spectrum_tb(cc, args.k, args.wmax)
    terms = ["1"] if spectrum.get(0) else []
    for w in sorted(spectrum):
        if w > 0 and spectrum[w]:
            terms.append(f"{spectrum[w]}x^{w}")
    print(
        f"A(x) of [{gens[0]},{gens[1]}] m={cc.m} (n={2 * args.k},k={args.k}), "
        f"truncated at {args.wmax}:"
    )
    print("  " + (" + ".join(terms) + " + ..." if terms else "0"))
    for w in sorted(spectrum):
        if spectrum[w]:
            print(f"  A_{w} = {spectrum[w]}")
    return 0


def cmd_design_polar(args) -> int:
    design = ga_design(args.n, args.k, args.snr)
    doc = {
        "n": args.n,
        "k": args.k,
        "design_snr_db": args.snr,
        "frozen": [int(x) for x in design.frozen_set],
    }
    text = json.dumps(doc, indent=2, sort_keys=True) + "\n"
    if args.out:
        _atomic_write(args.out, text)
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="shortfec",
        description="short-blocklength FEC simulations and benchmarks",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="run an experiment spec")
    sim.add_argument("spec", help="JSON experiment spec path")
    sim.add_argument("--workers", type=int, default=None, help="decoder thread count")
    sim.add_argument(
        "--max-seconds", type=float, default=None, help="wall-clock budget"
    )
    sim.add_argument(
        "--resume", action="store_true", help="reuse completed points from sidecar"
    )
    sim.set_defaults(func=cmd_simulate)

    bnd = sub.add_parser("bound", help="normal-approximation tables")
    bnd.add_argument("--n", type=int, required=True)
    bnd.add_argument("--k", type=int, required=True)
    bnd.add_argument("--eps-grid", help="comma-separated target epsilons")
    bnd.add_argument("--snr-grid", help="comma-separated Eb/N0 dB values")
    bnd.add_argument("--out", help="CSV output path (default stdout)")
    bnd.set_defaults(func=cmd_bound)

    ws = sub.add_parser("weight-spectrum", help="tail-biting weight enumerator")
    ws.add_argument("--generators", required=True, help="octal pair, e.g. 515,677")
    ws.add_argument("--k", type=int, required=True)
    ws.add_argument("--wmax", type=int, required=True)
    ws.set_defaults(func=cmd_weight_spectrum)

    dp = sub.add_parser("design-polar", help="GA frozen set as JSON")
    dp.add_argument("n", type=int)
    dp.add_argument("k", type=int)
    dp.add_argument("snr", type=float)
    dp.add_argument("--out", help="JSON output path (default stdout)")
    dp.set_defaults(func=cmd_design_polar)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except SpecError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except (ValueError, KeyError, OverflowError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # noqa: BLE001
        print(f"runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
