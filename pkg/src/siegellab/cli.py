"""siegellab command line.

Every command writes its outputs plus ``<first output>.manifest.json``; the
manifest holds the fully resolved parameters, so ``siegellab replay`` can
rebuild the outputs byte for byte.

Exit codes: 0 success, 1 replay mismatch, 2 usage, 3 precision, 4 rational
angle, 5 experiment budget exhausted (no round found).
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

from . import __version__
from ._backend import BACKEND
from .curvegeom import DEFAULT_PAIR_BUDGET, pinch_profile
from .curves import read_curve_csv, write_curve_csv
from .errors import (CoincidentPoints, DegenerateFit, GridMismatch, InsufficientDepth,
                     NoCandidates, PrecisionExhausted, RationalAngle, SiegelLabError,
                     TailTooLarge)
from .hexfloat import float_to_hex, mpfr_to_hex
from .lab import chain_perturbations, config_from_json
from .linearization import TAIL_TOLERANCE, linearize, sample_curve
from .rotation import default_precision, parse_theta

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_PRECISION = 3
EXIT_DOMAIN = 4
EXIT_BUDGET = 5


@dataclass
class RunManifest:
    command: str
    params: dict
    precision_bits: int
    version: str
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    duration_seconds: float = 0.0
    exit_code: int = 0
    backend: str = BACKEND

    def to_json(self) -> dict:
        return asdict(self)

    @classmethod
    def from_json(cls, data: dict) -> "RunManifest":
        return cls(**data)

    def write(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=2, sort_keys=True)
            fh.write("\n")

    @classmethod
    def read(cls, path) -> "RunManifest":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def manifest_path(output) -> Path:
    return Path(str(output) + ".manifest.json")


def _sha256(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 16), b""):
            h.update(block)
    return h.hexdigest()


def _write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
        fh.write("\n")


# commands: each takes resolved params and output paths, returns (code, precision, text)

def run_radius(params, outputs, inputs):
    theta = parse_theta(params["theta"], params["precision"])
    fw = tuple(params["fit_window"]) if params["fit_window"] else None
    series = linearize(theta, params["N"], fit_window=fw)
    R = series.radius_estimate
    _write_json(outputs["result"], {
        "theta": theta.to_json(),
        "N": params["N"],
        "precision_bits": series.precision_bits,
        "radius_estimate": float_to_hex(R),
        "fit_residual": float_to_hex(series.fit_residual),
        "fit_window": list(series.fit_window),
        "min_divisor": mpfr_to_hex(series.min_divisor),
    })
    text = (f"radius_estimate {R:.12g}\nfit_residual {series.fit_residual:.3e}\n"
            f"fit_window {series.fit_window[0]}:{series.fit_window[1]}\n"
            f"precision_bits {series.precision_bits}")
    return EXIT_OK, series.precision_bits, text


def run_boundary(params, outputs, inputs):
    theta = parse_theta(params["theta"], params["precision"])
    series = linearize(theta, params["N"])
    r = params["r_fraction"] * series.radius_estimate
    curve = sample_curve(series, r, params["M"], params["tail_tolerance"])
    write_curve_csv(curve, outputs["curve"])
    text = f"r {r:.12g} ({params['r_fraction']} x {series.radius_estimate:.12g})\nM {curve.M}"
    return EXIT_OK, series.precision_bits, text


PINCH_COLUMNS = ["i", "j", "t_i", "t_j", "dist", "diam_u", "diam_v", "pinch"]


def run_pinch_profile(params, outputs, inputs):
    curve = read_curve_csv(inputs["curve"])
    reports, exhaustive = pinch_profile(curve, params["budget"])
    with open(outputs["profile"], "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(PINCH_COLUMNS)
        for rep in reports:
            vals = (rep.i / curve.M, rep.j / curve.M, rep.dist, rep.diam_u, rep.diam_v, rep.pinch)
            w.writerow([rep.i, rep.j] + [float_to_hex(v) for v in vals])
    best = max(reports, key=lambda rep: rep.pinch)
    mode = "all pairs" if exhaustive else "dyadic separations (lower bound)"
    text = (f"max_pinch {best.pinch:.9g} at i={best.i} j={best.j} "
            f"dist={best.dist:.6g} diam_u={best.diam_u:.6g} diam_v={best.diam_v:.6g}\n"
            f"mode {mode}")
    return EXIT_OK, 53, text


def _summary_path(out) -> Path:
    out = Path(out)
    stem = out.name[:-len(".jsonl")] if out.name.endswith(".jsonl") else out.name
    return out.with_name(stem + ".summary.json")


def run_experiment(params, outputs, inputs):
    config = config_from_json(params["config"], params["precision"])
    traces = chain_perturbations(config, params["chain"], workers=params["workers"])
    with open(outputs["trace"], "w") as fh:
        for outer, trace in enumerate(traces, 1):
            for line in trace.jsonl_lines():
                rec = json.loads(line)
                rec["outer_round"] = outer
                fh.write(json.dumps(rec, sort_keys=True) + "\n")
    summaries = [t.summary() for t in traces]
    _write_json(outputs["summary"], {"outer_rounds": summaries})
    lines = []
    for outer, trace in enumerate(traces, 1):
        for rec in trace.rounds:
            lines.append(f"[{outer}] cut={rec.cut} tail={rec.tail_entry} {rec.status} "
                         f"max_pinch={rec.max_pinch:.4g} r'={rec.r_prime:.6g} "
                         f"|dtheta|={rec.theta_distance:.3g} drift={rec.sup_drift:.3g}")
    complete = len(traces) == params["chain"] and bool(traces[-1].found)
    lines.append("found" if complete else "budget exhausted: no qualifying round")
    return (EXIT_OK if complete else EXIT_BUDGET), config.theta.precision_bits, "\n".join(lines)


COMMANDS = {
    "radius": run_radius,
    "boundary": run_boundary,
    "pinch-profile": run_pinch_profile,
    "experiment": run_experiment,
}


def execute(command, params, outputs, inputs, primary_output):
    """Run a command, write its manifest, return (exit code, stdout text)."""
    start = time.perf_counter()
    code, precision, text = COMMANDS[command](params, outputs, inputs)
    manifest = RunManifest(
        command=command,
        params=params,
        precision_bits=int(precision),
        version=__version__,
        inputs={k: {"path": str(p), "sha256": _sha256(p)} for k, p in inputs.items()},
        outputs={k: {"path": str(p), "sha256": _sha256(p)} for k, p in outputs.items()},
        duration_seconds=round(time.perf_counter() - start, 6),
        exit_code=code,
    )
    manifest.write(manifest_path(primary_output))
    return code, text


# argument parsing ------------------------------------------------------------------

def _fit_window(s: str):
    try:
        lo, hi = (int(v) for v in s.split(":"))
    except ValueError:
        raise argparse.ArgumentTypeError("fit window must look like LO:HI")
    return [lo, hi]


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="siegellab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=__version__)
    sub = p.add_subparsers(dest="command", required=True)

    def theta_args(sp):
        sp.add_argument("--theta", required=True,
                        help="golden, p/q, cf:[a1,...]+tail:T, or a decimal like 0.38@256")
        sp.add_argument("--precision", type=int, default=None,
                        help="working bits (default: $SIEGELLAB_PRECISION or 256)")

    sp = sub.add_parser("radius", help="conformal radius estimate")
    theta_args(sp)
    sp.add_argument("--N", type=int, default=2000)
    sp.add_argument("--fit-window", type=_fit_window, default=None, metavar="LO:HI")
    sp.add_argument("--out", default="radius.json")

    sp = sub.add_parser("boundary", help="sample phi(r U) to a curve CSV")
    theta_args(sp)
    sp.add_argument("--r-fraction", type=float, required=True,
                    help="r as a fraction of the radius estimate")
    sp.add_argument("--M", type=int, default=1024)
    sp.add_argument("--N", type=int, default=2000)
    sp.add_argument("--tail-tolerance", type=float, default=TAIL_TOLERANCE)
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("pinch-profile", help="largest pinching per separation")
    sp.add_argument("curve", help="curve CSV (k,t_k,re,im)")
    sp.add_argument("--budget", type=int, default=DEFAULT_PAIR_BUDGET,
                    help="pair budget; above it only dyadic separations are scanned")
    sp.add_argument("--out", required=True)

    sp = sub.add_parser("experiment", help="perturbation search from a JSON config")
    sp.add_argument("config")
    sp.add_argument("--out", required=True, help="trace JSON-lines file")
    sp.add_argument("--chain", type=int, default=1, help="outer rounds to chain")
    sp.add_argument("--workers", type=int, default=1)
    sp.add_argument("--precision", type=int, default=None)

    sp = sub.add_parser("replay", help="re-run a command from its manifest")
    sp.add_argument("manifest")
    sp.add_argument("--out-dir", default=None,
                    help="write outputs here instead of their recorded paths")
    sp.add_argument("--verify", action="store_true",
                    help="compare output hashes with the manifest (exit 1 on mismatch)")
    return p


def _resolve(args):
    """(command, params, outputs, inputs, primary output) from parsed args."""
    precision = getattr(args, "precision", None)
    if precision is None:
        precision = default_precision()
    if args.command == "radius":
        params = {"theta": args.theta, "precision": precision, "N": args.N,
                  "fit_window": args.fit_window}
        return "radius", params, {"result": args.out}, {}, args.out
    if args.command == "boundary":
        params = {"theta": args.theta, "precision": precision, "N": args.N,
                  "M": args.M, "r_fraction": args.r_fraction,
                  "tail_tolerance": args.tail_tolerance}
        return "boundary", params, {"curve": args.out}, {}, args.out
    if args.command == "pinch-profile":
        return ("pinch-profile", {"budget": args.budget}, {"profile": args.out},
                {"curve": args.curve}, args.out)
    if args.command == "experiment":
        with open(args.config) as fh:
            cfg = json.load(fh)
        if args.chain < 1 or args.workers < 1:
            raise ValueError("--chain and --workers must be positive")
        params = {"config": cfg, "precision": precision, "chain": args.chain,
                  "workers": args.workers}
        outputs = {"trace": args.out, "summary": str(_summary_path(args.out))}
        return "experiment", params, outputs, {"config": args.config}, args.out
    raise ValueError(args.command)


def _replay(args):
    man = RunManifest.read(args.manifest)
    if man.command not in COMMANDS:
        raise ValueError(f"unknown command {man.command!r} in manifest")
    outputs = {k: v["path"] for k, v in man.outputs.items()}
    if args.out_dir:
        os.makedirs(args.out_dir, exist_ok=True)
        outputs = {k: os.path.join(args.out_dir, os.path.basename(p))
                   for k, p in outputs.items()}
    inputs = {k: v["path"] for k, v in man.inputs.items()}
    for k, v in man.inputs.items():
        if _sha256(v["path"]) != v["sha256"]:
            print(f"warning: input {v['path']} changed since the recorded run",
                  file=sys.stderr)
    primary = next(iter(outputs.values()))
    code, text = execute(man.command, man.params, outputs, inputs, primary)
    print(text)
    if args.verify:
        bad = [outputs[k] for k, v in man.outputs.items()
               if _sha256(outputs[k]) != v["sha256"]]
        if bad:
            print("mismatch: " + ", ".join(bad), file=sys.stderr)
            return EXIT_MISMATCH
        print("outputs identical to manifest")
    return code


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "replay":
            return _replay(args)
        code, text = execute(*_resolve(args))
        print(text)
        return code
    except RationalAngle as exc:
        print(f"RationalAngle: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except (PrecisionExhausted, TailTooLarge, DegenerateFit, InsufficientDepth) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except (NoCandidates, CoincidentPoints, GridMismatch, SiegelLabError, ValueError,
            KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
