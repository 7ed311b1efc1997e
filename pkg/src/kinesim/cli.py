"""Command-line interface.

Subcommands: simulate | capacity | optimize | trips | reproduce.
Exit codes: 0 success, 2 configuration error, 3 data-integrity error.
Worker count falls back to the KINESIM_WORKERS environment variable.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

from . import experiments, optimizer
from .errors import ConfigError, DataIntegrityError
from .geometry import perimeter, shape_from_literal, shape_to_literal
from .infotheory import estimate_pmf, write_pmf_json

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated integer list, got {text!r}") from exc


def _parse_float_list(text: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise ConfigError(f"expected a comma-separated number list, got {text!r}") from exc


def _load_config(path: str) -> experiments.ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return experiments.ExperimentConfig.from_dict(data)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args) -> int:
    config = _load_config(args.config)
    if args.seed is not None:
        config = replace(config, seed=args.seed)
    if args.trials is not None:
        config = replace(config, trials_per_x=args.trials)
    records = experiments.run_trials(config, workers=args.workers)
    out = _out_dir(args)
    path = out / "trials.jsonl"
    experiments.write_records_jsonl(records, path)
    (out / "simulate_config.json").write_text(json.dumps(config.to_dict(), indent=2))
    print(f"wrote {len(records)} trial records to {path}")
    return EXIT_OK


def cmd_capacity(args) -> int:
    records = experiments.read_records_jsonl(args.records)
    if not records:
        raise DataIntegrityError(f"no trial records in {args.records}")
    if args.xmax_list:
        x_max_list = _parse_int_list(args.xmax_list)
    else:
        x_max_list = [max(r.x for r in records)]
    rows = experiments.capacity_rows(records, x_max_list)
    out = _out_dir(args)
    pmf = estimate_pmf(experiments.records_to_pairs(records), max(x_max_list))
    write_pmf_json(pmf, out / "pmf.json")
    path = out / "capacity.csv"
    experiments.write_csv(path, ["x_max", "capacity_bits", "iters", "gap_bits"], rows)
    for row in rows:
        print(f"x_max={row['x_max']}: {row['capacity_bits']:.6f} bits "
              f"({row['iters']} iters, gap {row['gap_bits']:.2e} bits)")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_optimize(args) -> int:
    if args.family == "rectangle":
        best = optimizer.optimize_rectangle(args.T, args.v)
    elif args.family == "polygon":
        best = optimizer.optimize_polygon(args.T, args.v, n=args.n)
    elif args.family == "ring":
        best = optimizer.optimize_ring(args.T, args.v)
    else:  # argparse choices guard this
        raise ConfigError(f"unknown family {args.family!r}")
    report = {
        "family": args.family,
        "T": args.T,
        "v": args.v,
        "solution": shape_to_literal(best.shape),
        "objective_um": best.objective_um,
        "constraint_binding": best.binding,
        "perimeter_um": perimeter(best.shape),
    }
    if best.circle_radius_um is not None:
        report["circle_radius_um"] = best.circle_radius_um
    text = json.dumps(report, indent=2)
    print(text)
    if args.out:
        out = _out_dir(args)
        (out / f"optimal_{args.family}.json").write_text(text)
    return EXIT_OK


def cmd_trips(args) -> int:
    try:
        shape = shape_from_literal(json.loads(args.shape))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"--shape is not valid JSON: {exc}") from exc
    T_list = _parse_float_list(args.T_list)
    rows = experiments.trips_rows(shape, T_list, args.trials, args.seed,
                                  workers=args.workers)
    out = _out_dir(args)
    path = out / "trips.csv"
    experiments.write_csv(
        path, ["T_s", "mean_trips_mc", "trips_estimate", "rel_error"], rows)
    for row in rows:
        print(f"T={row['T_s']:g}s: simulated {row['mean_trips_mc']:.4f} trips, "
              f"estimate {row['trips_estimate']:.4f} "
              f"(rel err {row['rel_error']:.1%})")
    print(f"wrote {path}")
    return EXIT_OK


def cmd_reproduce(args) -> int:
    report = experiments.reproduce(args.figure, trials=args.trials,
                                   seed=args.seed, x_max=args.xmax,
                                   workers=args.workers, out_dir=args.out)
    print(f"{args.figure}: {len(report.rows)} rows in "
          f"{report.wall_clock_s:.1f}s -> {Path(args.out) / (args.figure + '.csv')}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="kinesim",
        description="Simulate and optimize kinesin-driven microtubule "
                    "transport channels.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a channel-use sweep to JSONL records")
    p.add_argument("--config", required=True, help="experiment config JSON file")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--trials", type=int, default=None, help="override trials_per_x")
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("capacity", help="estimate the PMF and capacity from records")
    p.add_argument("--records", required=True, help="trials.jsonl path")
    p.add_argument("--xmax-list", default=None,
                   help="comma-separated alphabet truncations, e.g. 5,10,20")
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_capacity)

    p = sub.add_parser("optimize", help="closed-form optimal shape per family")
    p.add_argument("--family", required=True,
                   choices=["rectangle", "polygon", "ring"])
    p.add_argument("--T", type=float, required=True, help="time per channel use (s)")
    p.add_argument("--v", type=float, default=0.5, help="average MT speed (um/s)")
    p.add_argument("--n", type=int, default=None,
                   help="fixed polygon side count (default: unbounded)")
    p.add_argument("--out", default=None, help="optional output directory")
    p.set_defaults(func=cmd_optimize)

    p = sub.add_parser("trips", help="single-MT trip statistics vs the estimate")
    p.add_argument("--shape", required=True, help='shape literal JSON, e.g. '
                   '\'{"kind":"rectangle","w":40,"l":40}\'')
    p.add_argument("--T-list", default="160,320,640")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_trips)

    p = sub.add_parser("reproduce", help="desk-scale reproduction of a figure")
    p.add_argument("--figure", required=True, choices=list(experiments.FIGURE_IDS))
    p.add_argument("--trials", type=int, default=500)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--xmax", type=int, default=20)
    p.add_argument("--workers", type=int, default=None)
    p.add_argument("--out", default=".", help="output directory")
    p.set_defaults(func=cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataIntegrityError as exc:
        print(f"data integrity error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
