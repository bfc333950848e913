"""``regularframe`` command line.

Every subcommand assembles a scenario object from its flags and runs it
through the same pipeline as ``regularframe run <file>``. Exit codes:
0 when all checks pass, 1 when a check fails, 2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import scenario as sc
from .errors import ConfigError, SchemaError


def _json_arg(text: str, base: Path = Path.cwd()):
    """Inline JSON, ``@file`` / plain path to a JSON file, or a bare word."""
    text = text.strip()
    if text.startswith(("{", "[")):
        return json.loads(text)
    path = Path(text[1:] if text.startswith("@") else text)
    if path.suffix == ".json" or path.exists():
        return json.loads((base / path).read_text())
    return text


def _metric(text: str):
    val = _json_arg(text)
    return {"family": val} if isinstance(val, str) else val


def _floats(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _grid(text: str) -> dict:
    vals = text.split(",")
    if len(vals) < 2:
        raise argparse.ArgumentTypeError("grid is n,L[,dim[,dt]]")
    g = {"n": int(vals[0]), "L": float(vals[1])}
    if len(vals) > 2 and vals[2]:
        g["dim"] = int(vals[2])
    if len(vals) > 3 and vals[3]:
        g["dt"] = float(vals[3])
    return g


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", type=Path, help="write the JSON report here (CSV series go alongside)")
    p.add_argument("--seed", type=int, help="seed for randomized draws")
    p.add_argument("--threads", type=int, help="worker threads (default: $REGULARFRAME_THREADS or 1)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="regularframe", description="Regular-frame verification pipelines.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario file")
    p.add_argument("scenario", type=Path)
    _common(p)

    p = sub.add_parser("suite", help="run every scenario in a directory (default: the acceptance suite)")
    p.add_argument("directory", type=Path, nargs="?")
    _common(p)

    p = sub.add_parser("chart", help="build a regular chart around a point")
    p.add_argument("--metric", required=True, type=_metric)
    p.add_argument("--center", type=_floats, default=[0.0, 0.0, 0.0, 0.0])
    p.add_argument("--rcap", type=float, default=1.0)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--closed-form", action="store_true", help="compare against the flat-space chart law")
    p.add_argument("--cover", type=_floats, help="cover the box t0,t1,x0,x1,y0,y1,z0,z1 by charts")
    p.add_argument("--cover-density", type=int, default=5)
    _common(p)

    p = sub.add_parser("interpolate", help="verify the interpolating metric")
    p.add_argument("--metric", required=True, type=_metric)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--t2", type=float, required=True)
    p.add_argument("--lattice", type=_json_arg, default={"samples": 1000},
                   help='sample count or JSON like {"samples": 10000, "t": [..], "x": [..]}')
    _common(p)

    p = sub.add_parser("evolve", help="evolve a packet and track the Klein-Gordon norm")
    p.add_argument("--metric", required=True, type=_metric)
    p.add_argument("--mass", type=float, default=1.0)
    p.add_argument("--grid", type=_grid, required=True, help="n,L[,dim[,dt]]")
    p.add_argument("--packet", type=_json_arg, default={"center": 0.0, "width": 2.0, "p0": 1.0})
    p.add_argument("--times", type=_floats, default=[0.5, 1.0, 1.5, 2.0])
    p.add_argument("--refine", type=int, default=1)
    _common(p)

    p = sub.add_parser("transport", help="certify flat-to-curved transport on a packet basis")
    p.add_argument("--metric", required=True, type=_metric)
    p.add_argument("--t1", type=float, required=True)
    p.add_argument("--t2", type=float, required=True)
    p.add_argument("--m", type=float, default=1.0)
    p.add_argument("--grid", type=_grid, required=True, help="n,L[,dim[,dt]]")
    p.add_argument("--basis", type=_json_arg, default={"k": 5})
    p.add_argument("--t-start", type=float, default=0.0)
    p.add_argument("--t-end", type=float)
    p.add_argument("--refine", type=int, default=1)
    _common(p)

    p = sub.add_parser("shell", help="mass-shell measure and the unitary chain")
    p.add_argument("--m", type=float, default=0.0)
    p.add_argument("--measure-box", type=_floats, help="lo1,lo2,lo3,hi1,hi2,hi3")
    p.add_argument("--ball", type=float)
    p.add_argument("--expected", type=float)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--chain", type=int, help="number of random vectors for the norm chain")
    _common(p)

    p = sub.add_parser("fock", help="truncated Fock space algebra checks")
    p.add_argument("--system", type=_json_arg, required=True, help="particle-system JSON (inline or file)")
    p.add_argument("--modes", type=int, default=4)
    p.add_argument("--cutoff", type=int, default=3)
    p.add_argument("--check", action="append", choices=["ccr", "gamma", "spectrum", "registry"])
    _common(p)
    return parser


def scenario_from_args(args) -> dict:
    c = args.command
    if c == "chart":
        s = {"kind": "chart", "metric": args.metric, "center": args.center, "rcap": args.rcap, "step": args.step}
        if args.closed_form:
            s["closed_form"] = True
        if args.cover:
            if len(args.cover) != 8:
                raise SchemaError("--cover needs 8 numbers", "--cover")
            s["cover"] = {"region": [args.cover[i:i + 2] for i in range(0, 8, 2)], "density": args.cover_density}
        return s
    if c == "interpolate":
        lat = args.lattice if isinstance(args.lattice, dict) else {"samples": int(args.lattice)}
        return {"kind": "interpolate", "metric": args.metric, "t1": args.t1, "t2": args.t2, "lattice": lat}
    if c == "evolve":
        return {"kind": "evolve", "metric": args.metric, "mass": args.mass, "grid": args.grid,
                "packet": args.packet, "times": args.times, "refine": args.refine}
    if c == "transport":
        s = {"kind": "transport", "metric": args.metric, "t1": args.t1, "t2": args.t2, "m": args.m,
             "grid": args.grid, "basis": args.basis, "t_start": args.t_start, "refine": args.refine}
        if args.t_end is not None:
            s["t_end"] = args.t_end
        return s
    if c == "shell":
        s = {"kind": "shell", "m": args.m, "tolerances": {"measure": args.tol}}
        if args.measure_box:
            if len(args.measure_box) != 6:
                raise SchemaError("--measure-box needs 6 numbers", "--measure-box")
            s["box"] = [args.measure_box[:3], args.measure_box[3:]]
        if args.ball is not None:
            s["ball"] = args.ball
        if args.expected is not None:
            s["expected"] = args.expected
        if args.chain:
            s["chain"] = {"count": args.chain, "masses": [args.m] if args.m > 0 else [0.5, 1.0, 2.0]}
        return s
    if c == "fock":
        return {"kind": "fock", "system": args.system, "modes": args.modes, "cutoff": args.cutoff,
                "checks": args.check or ["ccr", "gamma", "spectrum", "registry"]}
    raise AssertionError(c)


def _emit(outcome: sc.Outcome, out: Path | None) -> int:
    if out is not None:
        sc.write_outputs(outcome, out)
        failed = [c.name for c in outcome.report.checks if not c.passed]
        verdict = "pass" if not failed else f"fail ({', '.join(failed)})"
        print(f"{outcome.report.kind}: {len(outcome.report.checks)} checks, {verdict} -> {out}")
    else:
        sys.stdout.write(sc.report_json(outcome.report))
    return 0 if outcome.report.passed else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        threads = sc.thread_count(args.threads)
        if args.command == "run":
            outcome = sc.run(sc.load_scenario(args.scenario), args.seed, threads, args.scenario.resolve().parent)
        elif args.command == "suite":
            outcome = sc.suite(args.directory or sc.acceptance_dir(), args.seed, threads)
        else:
            outcome = sc.run(scenario_from_args(args), args.seed, threads)
    except (SchemaError, ConfigError, json.JSONDecodeError, OSError) as exc:
        print(f"regularframe: error: {exc}", file=sys.stderr)
        return 2
    return _emit(outcome, args.out)


if __name__ == "__main__":
    sys.exit(main())
