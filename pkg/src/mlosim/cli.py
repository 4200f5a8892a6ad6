"""Command line: ``mlosim simulate`` and ``mlosim sweep``.

Exit codes: 0 success, 1 simulation failure, 2 invalid configuration or
arguments, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

from mlosim import checks, output
from mlosim.config import load_config
from mlosim.errors import ConfigError, MloSimError
from mlosim.sim import Simulation
from mlosim.sweep import SweepSpec, parse_loads, sweep

SEED_ENV = "MLO_SIM_SEED"

EXIT_OK, EXIT_SIM, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3


def _resolve_seed(args, cfg) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer", key=SEED_ENV) from None
    return cfg.seed


def _prepare(args):
    cfg = load_config(args.config)
    if args.duration is not None:
        if args.duration <= cfg.warmup_s:
            raise ConfigError(f"duration {args.duration} s must exceed warm-up {cfg.warmup_s} s",
                              key="--duration")
        cfg = replace(cfg, duration_s=args.duration)
    return replace(cfg, seed=_resolve_seed(args, cfg))


def cmd_simulate(args) -> int:
    cfg = _prepare(args)
    sim = Simulation(cfg)
    report = sim.run()
    if args.check:
        failed = {k: v for k, v in checks.run_all(sim).items() if v}
        for name, problems in failed.items():
            print(f"check {name} FAILED: {problems[0]}", file=sys.stderr)
        if failed:
            return EXIT_SIM
    out_dir = Path(args.output) if args.output else None
    if args.format == "csv":
        text = output.to_csv([report])
        if out_dir:
            output.write_text(out_dir / "simulate.csv", text)
        else:
            sys.stdout.write(text)
    else:
        sys.stdout.write(output.summary(report))
        if out_dir:
            output.write_text(out_dir / "simulate.csv", output.to_csv([report]))
    if args.trace:
        n = output.write_trace((out_dir or Path(".")) / "trace.csv", sim)
        print(f"wrote {n} delivery records", file=sys.stderr)
    return EXIT_OK


def cmd_sweep(args) -> int:
    cfg = _prepare(args)
    reps = args.reps if args.reps is not None else cfg.replications
    spec = SweepSpec(parse_loads(args.loads), reps)
    for p in spec.loads:
        cfg.with_loads(p)  # validate every point before running anything
    points = sweep(cfg, spec, workers=args.workers)
    out_dir = Path(args.output) if args.output else None
    table = output.to_csv(p.mean_report() for p in points)
    if args.format == "csv" and not out_dir:
        sys.stdout.write(table)
    else:
        sys.stdout.write(output.sweep_summary(points))
    if out_dir:
        output.write_text(out_dir / "sweep.csv", table)
        runs = [replace(r, seed=s) for p in points for r, s in zip(p.reports, p.seeds)]
        output.write_text(out_dir / "sweep_runs.csv", output.to_csv(runs))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mlosim", description="Wi-Fi 7 multi-link operation simulator")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("config", help="scenario configuration file")
        p.add_argument("--seed", type=int, help=f"master seed (else ${SEED_ENV}, else config)")
        p.add_argument("--duration", type=float, help="simulated seconds (overrides sim.duration_s)")
        p.add_argument("--output", help="directory for CSV output")
        p.add_argument("--format", choices=("summary", "csv"), default="summary")

    p = sub.add_parser("simulate", help="run one scenario")
    common(p)
    p.add_argument("--trace", action="store_true", help="also write every delivery to trace.csv")
    p.add_argument("--check", action="store_true", help="run post-run invariant checks")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="run a load sweep with replications")
    common(p)
    p.add_argument("--loads", required=True,
                   help="load points, e.g. 0.1,0.3,0.5 or per-BSS 90%%/70%%/10%%,50%%/70%%/50%%")
    p.add_argument("--reps", type=int, help="replications per point (else sim.replications)")
    p.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc.strerror or exc}", file=sys.stderr)
        return EXIT_IO
    except MloSimError as exc:
        print(f"simulation failed: {exc}", file=sys.stderr)
        return EXIT_SIM


if __name__ == "__main__":
    sys.exit(main())
