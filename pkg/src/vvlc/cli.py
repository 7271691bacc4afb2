"""Command-line entry point: ``vvlc <subcommand> [options]``.

Exit codes: 0 success, 2 configuration error, 3 runtime error.
"""

from __future__ import annotations

import argparse
import dataclasses
import math
import sys

from .config import ConfigError, emit_scenario, load_scenario, preset
from .geometry import BACKENDS
from .optics import LENS_MODES
from .sweeps import ALL_COLUMNS, NOISE_COLUMNS, SNR_COLUMNS, SweepSpec, compare_2d3d, run_sweep, validate

LOS_COLUMNS = ("los_lsh_W", "los_rsh_W", "los_W", "total_W", "total_bare_W")
SB_COLUMNS = tuple(c for c in ALL_COLUMNS if c.startswith("sb"))


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--scenario", help="scenario file (default: built-in paper-table preset)")
    common.add_argument("--seed", type=int, help="root seed for Monte-Carlo work")
    common.add_argument("--out", help="output path (default: stdout)")
    common.add_argument("--geometry-backend", choices=BACKENDS)
    common.add_argument("--lens-mode", choices=LENS_MODES)

    p = argparse.ArgumentParser(prog="vvlc", description="Vehicular VLC MISO channel simulator")
    sub = p.add_subparsers(dest="command", required=True)
    los = sub.add_parser("los-sweep", parents=[common], help="LoS received power along the approach")
    los.add_argument("--mode-number", type=float, help="override the Lambertian mode number")
    sb = sub.add_parser("sb-sweep", parents=[common], help="single-bounce power over distance, k or alpha0")
    sb.add_argument("--variable", choices=("distance", "k", "alpha0"), default="distance")
    sb.add_argument("--values", type=float, nargs="+", help="k values, or alpha0 in degrees")
    sb.add_argument("--at-distance", type=float, default=10.0, help="separation for k/alpha0 sweeps (m)")
    sub.add_parser("snr-sweep", parents=[common], help="noise budget and SNR along the approach")
    sub.add_parser("compare-2d3d", parents=[common], help="3D model against its planar reduction")
    val = sub.add_parser("validate", parents=[common], help="closed-form vs oracle discrepancy report")
    val.add_argument("--draws", type=int, default=1000)
    val.add_argument("--mc-samples", type=int, default=1_000_000)
    em = sub.add_parser("emit-preset", parents=[common], help="print a scenario file")
    em.add_argument("name", nargs="?", default="paper-table")
    return p


def _scenario(args):
    scn = load_scenario(args.scenario) if args.scenario else preset()
    if args.seed is not None:
        scn = dataclasses.replace(scn, seed=args.seed)
    if args.geometry_backend:
        scn = dataclasses.replace(scn, backend=args.geometry_backend)
    if args.lens_mode:
        scn = dataclasses.replace(scn, receiver=dataclasses.replace(scn.receiver, lens_mode=args.lens_mode))
    return scn


def _run(args) -> str:
    if args.command == "emit-preset":
        return emit_scenario(preset(args.name) if not args.scenario else _scenario(args))
    scn = _scenario(args)
    if args.command == "los-sweep":
        if args.mode_number is not None:
            scn = dataclasses.replace(scn, lamp=dataclasses.replace(scn.lamp, mode_number=args.mode_number))
        return run_sweep(scn, SweepSpec.distance_grid(scn, outputs=LOS_COLUMNS))
    if args.command == "sb-sweep":
        if args.variable == "distance":
            return run_sweep(scn, SweepSpec.distance_grid(scn, outputs=SB_COLUMNS))
        defaults = {"k": (3.0, 10.0, 30.0), "alpha0": (10.0, 30.0, 45.0)}
        vals = tuple(args.values) if args.values else defaults[args.variable]
        if args.variable == "alpha0":
            vals = tuple(math.radians(v) for v in vals)
        return run_sweep(scn, SweepSpec(args.variable, vals, args.at_distance, SB_COLUMNS))
    if args.command == "snr-sweep":
        cols = ("total_W",) + tuple(NOISE_COLUMNS) + tuple(SNR_COLUMNS)
        return run_sweep(scn, SweepSpec.distance_grid(scn, outputs=cols))
    if args.command == "compare-2d3d":
        return compare_2d3d(scn)
    return validate(scn, n_draws=args.draws, mc_samples=args.mc_samples)


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        text = _run(args)
    except ConfigError as exc:
        print(f"vvlc: config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - any failure past configuration is a runtime error
        print(f"vvlc: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
