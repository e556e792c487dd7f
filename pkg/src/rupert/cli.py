"""Command-line interface.

Subcommands: certify one orientation pair, run or resume a full search,
rebuild a report from a results file, hunt for passages, and sweep the
stellation parameter.  All randomness is seeded (default 0); angles accept
plain radians or pi fractions like 'pi/64', '3pi/4', '0.5pi'.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import re
import sys
from datetime import datetime, timezone
from typing import Dict, List, Optional, Tuple

from . import __version__
from .certify import BUFFER_MATRIX, BUFFER_MODES, BUFFER_VERTEX, CheckConfig, check
from .nieuwland import find_passage, nieuwland_sweep, sweep_csv_lines
from .polyhedron import (
    LAMBDA_VOLUME,
    InvalidParameter,
    ParamPoint,
    Polyhedron,
    cube,
    load_polyhedron,
    stellated_tetrahedron,
)
from .search import (
    CheckpointCorrupt,
    SearchConfig,
    coverage_report,
    run_search,
    tallies_report,
)

_PI_RE = re.compile(r"^(?P<num>-?\d*\.?\d*)\s*pi\s*(?:/\s*(?P<den>\d+\.?\d*))?$")


class CliError(Exception):
    pass


def parse_angle(text: str) -> float:
    """Radians from a decimal or a pi fraction ('pi/64', '2pi', '0.5pi')."""
    text = text.strip().lower()
    m = _PI_RE.match(text)
    if m:
        num = m.group("num")
        factor = float(num) if num not in ("", "-") else (-1.0 if num == "-" else 1.0)
        value = factor * math.pi
        if m.group("den"):
            value /= float(m.group("den"))
        return value
    try:
        return float(text)
    except ValueError:
        raise CliError(f"cannot parse angle {text!r}") from None


def parse_point(text: str) -> ParamPoint:
    parts = text.split(",")
    if len(parts) != 5:
        raise CliError(f"--point needs 5 comma-separated angles, got {len(parts)}")
    return ParamPoint(*(parse_angle(p) for p in parts))


def parse_poly(spec: str) -> Polyhedron:
    if spec == "cube":
        return cube()
    if spec.startswith("stellated:"):
        try:
            a = float(spec.split(":", 1)[1])
        except ValueError:
            raise CliError(f"bad stellation parameter in {spec!r}") from None
        try:
            return stellated_tetrahedron(a)
        except (InvalidParameter, ValueError) as exc:
            raise CliError(str(exc)) from None
    if spec.startswith("file:"):
        path = spec.split(":", 1)[1]
        try:
            return load_polyhedron(path)
        except (OSError, ValueError) as exc:
            raise CliError(f"cannot load polyhedron from {path}: {exc}") from None
    raise CliError(f"unknown polyhedron spec {spec!r} (use cube, stellated:<a>, file:<path>)")


def _manifest(args: argparse.Namespace, poly: Optional[Polyhedron], seeds: Dict[str, int]) -> Dict[str, object]:
    entry: Dict[str, object] = {
        "command": " ".join(sys.argv),
        "version": __version__,
        "started": datetime.now(timezone.utc).isoformat(),
        "config": {k: v for k, v in sorted(vars(args).items()) if k != "func"},
        "seeds": seeds,
    }
    if poly is not None:
        entry["polyhedron"] = {"label": poly.label, "vertex_hash": poly.vertex_hash()}
    return entry


def _finish_manifest(manifest: Dict[str, object]) -> Dict[str, object]:
    manifest["finished"] = datetime.now(timezone.utc).isoformat()
    return manifest


def _atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _write_sidecar_manifest(out_path: str, manifest: Dict[str, object]) -> None:
    manifest = dict(manifest)
    manifest["output"] = os.path.basename(out_path)
    _atomic_write(out_path + ".manifest.json", json.dumps(manifest, indent=2))


# ---------------------------------------------------------------------------


def cmd_certify(args: argparse.Namespace) -> int:
    poly = parse_poly(args.poly)
    point = parse_point(args.point)
    cfg = CheckConfig(
        delta_init=args.delta_init,
        decay=args.decay,
        threshold_b=parse_angle(args.threshold) if isinstance(args.threshold, str) else args.threshold,
        buffer_mode=args.buffer_mode,
        certify_ruled_out=not args.no_lp_certificates,
    )
    manifest = _manifest(args, poly, seeds={})
    outcome = check(point, poly, cfg)
    payload = {
        "outcome": {
            "kind": outcome.kind,
            "witness_scales": list(outcome.witness_scales),
            "epsilon": outcome.epsilon,
            "delta_success": outcome.delta_success,
            "passage_scale": outcome.passage_scale,
            "passage_translation": list(outcome.passage_translation)
            if outcome.passage_translation
            else None,
            "passage_direction": outcome.passage_direction,
        },
        "point": list(point.as_tuple()),
        "polyhedron": poly.label,
        "manifest": _finish_manifest(manifest),
    }
    json.dump(payload, sys.stdout, indent=2)
    print()
    return {"ruled_out": 0, "exhausted": 2, "invalid": 3}[outcome.kind]


def cmd_search(args: argparse.Namespace) -> int:
    poly = parse_poly(args.poly)
    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("RUPERT_WORKERS", "1"))
    cfg = SearchConfig(
        min_side=parse_angle(args.min_side),
        buffer_mode=args.buffer_mode,
        workers=workers,
        max_checks=args.max_checks,
        results_path=args.out,
        checkpoint_path=args.checkpoint,
    )
    manifest = _manifest(args, poly, seeds={})
    try:
        state = run_search(
            poly,
            cfg,
            resume_from=args.resume,
            log=(lambda msg: print(msg, file=sys.stderr)) if args.verbose else None,
        )
    except CheckpointCorrupt as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    report = coverage_report(state)
    if args.out:
        _write_sidecar_manifest(args.out, manifest)
    payload = {
        "report": report,
        "run": {"checks_run": state.checks_run, "boxes_finalized": state.boxes_finalized},
        "manifest": _finish_manifest(manifest),
    }
    json.dump(payload, sys.stdout, indent=2)
    print()
    return 3 if state.invalid_count() > 0 else 0


def _depth_from_side(side: float) -> Optional[int]:
    from .search import _depth_side

    if side <= 0:
        return None
    d = round(math.log2((0.5 * math.pi) / side))
    if d < 0 or d > 60 or _depth_side(d) != side:
        return None
    return d


def cmd_report(args: argparse.Namespace) -> int:
    from .search import _depth_side

    path = args.infile
    ruled: Dict[int, int] = {}
    small: Dict[int, int] = {}
    invalid: Dict[int, int] = {}
    seen = set()
    records = 0
    try:
        fh = open(path)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    with fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                center = rec["center"]
                side = float(rec["side"])
                status = rec["status"]
                if len(center) != 5 or status not in ("ruled_out", "small", "invalid"):
                    raise ValueError("bad record shape")
            except (ValueError, KeyError, TypeError) as exc:
                print(f"error: {path}:{lineno}: malformed record: {exc}", file=sys.stderr)
                return 1
            depth = _depth_from_side(side)
            if depth is None:
                print(f"error: {path}:{lineno}: side {side} is not a grid size", file=sys.stderr)
                return 1
            digest = hashlib.blake2b(line.encode(), digest_size=16).digest()
            if digest in seen:
                print(f"error: {path}:{lineno}: duplicate box record", file=sys.stderr)
                return 1
            seen.add(digest)
            records += 1
            target = {"ruled_out": ruled, "small": small, "invalid": invalid}[status]
            target[depth] = target.get(depth, 0) + 1

    if records == 0:
        print("warning: results file holds no box records", file=sys.stderr)

    report = tallies_report(ruled, small, invalid, complete=False, wall_time=None)
    report["complete"] = abs(report["pending_volume"]) <= 1e-6 * LAMBDA_VOLUME
    if report["pending_volume"] < -1e-6 * LAMBDA_VOLUME:
        covered = report["ruled_out_volume"] + report["small_volume"]
        print(
            f"error: volume conservation failed: records cover {covered:.9f} "
            f"of {LAMBDA_VOLUME:.9f} (overlapping or duplicated boxes)",
            file=sys.stderr,
        )
        return 1

    if args.csv:
        depths = sorted(set(ruled) | set(small) | set(invalid))
        lines = ["depth,side,ruled_out,small,invalid,ruled_out_volume"]
        for d in depths:
            s = _depth_side(d)
            lines.append(
                f"{d},{s:.17g},{ruled.get(d, 0)},{small.get(d, 0)},{invalid.get(d, 0)},"
                f"{ruled.get(d, 0) * s**5:.17g}"
            )
        _atomic_write(args.csv, "\n".join(lines) + "\n")
    json.dump({"report": report}, sys.stdout, indent=2)
    print()
    return 0


def cmd_passage(args: argparse.Namespace) -> int:
    poly = parse_poly(args.poly)
    manifest = _manifest(args, poly, seeds={"seed": args.seed})
    cand = find_passage(poly, args.budget, seed=args.seed)
    payload = {
        "candidate": {
            "point": list(cand.point.as_tuple()),
            "scale": cand.scale,
            "translation": list(cand.translation),
            "direction": cand.direction,
        },
        "is_passage": cand.scale > 1.0 + 1e-9,
        "manifest": _finish_manifest(manifest),
    }
    json.dump(payload, sys.stdout, indent=2)
    print()
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    manifest = _manifest(args, None, seeds={"seed": args.seed})
    rows = nieuwland_sweep(
        args.start,
        args.stop,
        args.step,
        args.budget,
        seed=args.seed,
        progress=(
            (lambda a, cand: print(f"a={a:.6g} best={cand.scale:.12g}", file=sys.stderr))
            if args.verbose
            else None
        ),
    )
    lines = sweep_csv_lines(rows)
    if args.out:
        _atomic_write(args.out, "\n".join(lines) + "\n")
        _write_sidecar_manifest(args.out, _finish_manifest(manifest))
        print(f"wrote {args.out} ({len(rows)} rows)", file=sys.stderr)
    else:
        print("\n".join(lines))
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rupert", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_poly(p):
        p.add_argument("--poly", required=True, help="cube | stellated:<a> | file:<path>")

    p = sub.add_parser("certify", help="certify one orientation pair")
    add_poly(p)
    p.add_argument("--point", required=True, help="alpha,theta,phi,theta',phi' (radians or pi fractions)")
    p.add_argument("--threshold", default="1e-3", help="stop once delta falls to this (default 1e-3)")
    p.add_argument("--buffer-mode", choices=BUFFER_MODES, default=BUFFER_VERTEX)
    p.add_argument("--delta-init", type=float, default=0.25)
    p.add_argument("--decay", type=float, default=0.8)
    p.add_argument("--no-lp-certificates", action="store_true", help="skip exact LP optimality certificates")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("search", help="sweep the whole parameter space")
    add_poly(p)
    p.add_argument("--min-side", required=True, help="smallest cube side to test (radians or pi fraction)")
    p.add_argument("--buffer-mode", choices=BUFFER_MODES, default=BUFFER_VERTEX)
    p.add_argument("--workers", type=int, default=None, help="default: $RUPERT_WORKERS or 1")
    p.add_argument("--max-checks", type=int, default=None, help="stop after this many cube tests")
    p.add_argument("--out", default=None, help="results file (JSON lines)")
    p.add_argument("--checkpoint", default=None, help="checkpoint file to write")
    p.add_argument("--resume", default=None, help="checkpoint file to resume from")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("report", help="rebuild a report from a results file")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--csv", default=None, help="also write coverage-by-depth CSV")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("passage", help="search for a passage by direct optimization")
    add_poly(p)
    p.add_argument("--budget", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_passage)

    p = sub.add_parser("sweep", help="passage search over a stellation-parameter grid")
    p.add_argument("--from", dest="start", type=float, required=True)
    p.add_argument("--to", dest="stop", type=float, required=True)
    p.add_argument("--step", type=float, default=0.005)
    p.add_argument("--budget", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="CSV output path (default: stdout)")
    p.add_argument("--verbose", action="store_true")
    p.set_defaults(func=cmd_sweep)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad usage; fold into the documented code 1.
        return 1 if exc.code not in (0, None) else 0
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
