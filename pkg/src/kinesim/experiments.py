"""Experiment orchestration: configs, seeded trial farms, figure recipes.

A trial is one channel use; its random stream is derived from
(master seed, x, trial index) through a SeedSequence mix, so sweeps are
reproducible regardless of worker count or scheduling, and any single trial
can be replayed from the seed stored in its record.
"""

from __future__ import annotations

import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace
from functools import lru_cache
from multiprocessing import get_context
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .errors import ConfigError, DataIntegrityError, ZoneCapacityError
from .geometry import (
    ChannelShape,
    PolygonRing,
    Rectangle,
    RegularPolygon,
    shape_from_literal,
    shape_to_literal,
)
from .infotheory import CapacityResult, blahut_arimoto, capacity_vs_xmax, estimate_pmf
from .motility import MotilityParams
from .optimizer import expected_single_mt_trips
from .transport import (
    DEFAULT_MAX_LOAD,
    ZoneLayout,
    build_zones,
    mt_count_for,
    run_channel_use,
)

WORKERS_ENV_VAR = "KINESIM_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to (re)run one channel-use sweep."""

    shape: ChannelShape
    motility: MotilityParams = MotilityParams()
    particle_diameter_um: float = 1.0
    zone_depth_um: float = 2.0
    zone_arc_fraction: float = 0.25
    min_separation_um: float = 10.0
    T_s: float = 320.0
    x_max: int = 40
    trials_per_x: int = 500
    mt_count: Optional[int] = None  # None: floor(A*h*C)
    height_um: float = 10.0
    concentration_per_fL: float = 1e-3
    max_load: int = DEFAULT_MAX_LOAD
    seed: int = 0

    def __post_init__(self):
        if self.trials_per_x < 1:
            raise ConfigError("trials_per_x must be >= 1")
        if self.x_max < 0:
            raise ConfigError("x_max must be >= 0")
        if self.T_s <= 0:
            raise ConfigError("T_s must be positive")
        if self.seed < 0:
            raise ConfigError("seed must be a non-negative integer")

    def resolved_mt_count(self) -> int:
        if self.mt_count is not None:
            if self.mt_count < 0:
                raise ConfigError("mt_count must be >= 0")
            return self.mt_count
        return mt_count_for(self.shape, self.height_um, self.concentration_per_fL)

    def to_dict(self) -> dict:
        return {
            "shape": shape_to_literal(self.shape),
            "motility": asdict(self.motility),
            "zones": {
                "particle_diameter_um": self.particle_diameter_um,
                "zone_depth_um": self.zone_depth_um,
                "zone_arc_fraction": self.zone_arc_fraction,
                "min_separation_um": self.min_separation_um,
            },
            "T_s": self.T_s,
            "x_max": self.x_max,
            "trials_per_x": self.trials_per_x,
            "mt_count": self.mt_count,
            "height_um": self.height_um,
            "concentration_per_fL": self.concentration_per_fL,
            "max_load": self.max_load,
            "seed": self.seed,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        try:
            shape = shape_from_literal(d["shape"])
            kwargs = {}
            if "motility" in d:
                kwargs["motility"] = MotilityParams(**d["motility"])
            for key, target in (
                ("particle_diameter_um", "particle_diameter_um"),
                ("zone_depth_um", "zone_depth_um"),
                ("zone_arc_fraction", "zone_arc_fraction"),
                ("min_separation_um", "min_separation_um"),
            ):
                if "zones" in d and key in d["zones"]:
                    kwargs[target] = d["zones"][key]
            for key in ("T_s", "x_max", "trials_per_x", "mt_count", "height_um",
                        "concentration_per_fL", "max_load", "seed"):
                if key in d:
                    kwargs[key] = d[key]
            return cls(shape=shape, **kwargs)
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"malformed experiment config: {exc}") from exc


@dataclass(frozen=True)
class TrialRecord:
    """One channel use: particles released, delivered, per-MT trips, seed."""

    x: int
    y: int
    trips: list[int]
    seed: int

    def to_json_line(self) -> str:
        return json.dumps({"x": self.x, "y": self.y, "trips": self.trips,
                           "seed": self.seed})

    @classmethod
    def from_json_line(cls, line: str) -> "TrialRecord":
        try:
            d = json.loads(line)
            return cls(x=int(d["x"]), y=int(d["y"]),
                       trips=[int(t) for t in d["trips"]], seed=int(d["seed"]))
        except (KeyError, TypeError, ValueError, json.JSONDecodeError) as exc:
            raise DataIntegrityError(f"malformed trial record {line!r}: {exc}") from exc


def derive_stream_seed(master_seed: int, row: int, trial: int) -> int:
    """64-bit mix of (master seed, row, trial); collision-resistant across
    rows and trials, unlike a plain xor."""
    ss = np.random.SeedSequence([int(master_seed), int(row), int(trial)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def resolve_workers(workers: Optional[int] = None) -> int:
    if workers is None:
        env = os.environ.get(WORKERS_ENV_VAR)
        if env is not None:
            try:
                workers = int(env)
            except ValueError as exc:
                raise ConfigError(
                    f"{WORKERS_ENV_VAR}={env!r} is not an integer") from exc
        else:
            workers = os.cpu_count() or 1
    if workers < 1:
        raise ConfigError("worker count must be >= 1")
    return workers


@lru_cache(maxsize=64)
def _layout_for(shape: ChannelShape, particle_diameter_um: float,
                zone_depth_um: float, zone_arc_fraction: float,
                min_separation_um: float) -> ZoneLayout:
    return build_zones(shape, particle_diameter_um, zone_depth_um,
                       zone_arc_fraction, min_separation_um)


def layout_for(config: ExperimentConfig) -> ZoneLayout:
    return _layout_for(config.shape, config.particle_diameter_um,
                       config.zone_depth_um, config.zone_arc_fraction,
                       config.min_separation_um)


def _run_x_chunk(args) -> tuple[int, int, list[TrialRecord]]:
    config, x, t0, t1 = args
    layout = layout_for(config)
    mt = config.resolved_mt_count()
    records = []
    for trial in range(t0, t1):
        seed = derive_stream_seed(config.seed, x, trial)
        res = run_channel_use(config.shape, layout, x, config.T_s,
                              config.motility, mt, config.max_load, seed)
        records.append(TrialRecord(x=x, y=res.delivered,
                                   trips=res.per_mt_trips, seed=seed))
    return x, t0, records


def _chunks(trials: int, chunk: int):
    for t0 in range(0, trials, chunk):
        yield t0, min(t0 + chunk, trials)


def _farm(tasks: list, workers: int) -> list:
    """Run chunk tasks, returning results in task order regardless of
    scheduling."""
    if workers <= 1 or len(tasks) <= 1:
        return [_run_x_chunk(t) for t in tasks]
    ctx = get_context("fork")
    with ProcessPoolExecutor(max_workers=workers, mp_context=ctx) as pool:
        return list(pool.map(_run_x_chunk, tasks, chunksize=1))


def run_trials(config: ExperimentConfig, workers: Optional[int] = None,
               chunk: int = 250) -> list[TrialRecord]:
    """All trials_per_x * (x_max+1) channel uses of a config, ordered by
    (x, trial).  Identical output for any worker count."""
    layout = layout_for(config)  # validates the zone layout up front
    if config.x_max > layout.tx_cell_count:
        raise ZoneCapacityError(config.x_max, layout.tx_cell_count)
    workers = resolve_workers(workers)
    tasks = [(config, x, t0, t1)
             for x in range(config.x_max + 1)
             for t0, t1 in _chunks(config.trials_per_x, chunk)]
    out: list[TrialRecord] = []
    for _x, _t0, records in _farm(tasks, workers):
        out.extend(records)
    return out


def write_records_jsonl(records: Sequence[TrialRecord], path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json_line() + "\n")


def read_records_jsonl(path) -> list[TrialRecord]:
    records = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(TrialRecord.from_json_line(line))
    return records


def records_to_pairs(records: Sequence[TrialRecord]) -> list[tuple[int, int]]:
    return [(r.x, r.y) for r in records]


def capacity_rows(records: Sequence[TrialRecord],
                  x_max_list: Sequence[int]) -> list[dict]:
    """x_max,capacity_bits,iters,gap_bits rows from trial records."""
    curve = capacity_vs_xmax(records_to_pairs(records), x_max_list)
    return [
        {
            "x_max": m,
            "capacity_bits": res.capacity_bits,
            "iters": res.iterations,
            "gap_bits": res.upper_bound_bits - res.lower_bound_bits,
        }
        for m, res in curve
    ]


def write_csv(path, fieldnames: Sequence[str], rows: Sequence[dict]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(fieldnames))
        writer.writeheader()
        for row in rows:
            writer.writerow(row)


# ---------------------------------------------------------------------------
# trip-rate validation (single MT vs the closed-form estimate)

def mean_trips_mc(shape: ChannelShape, T_s: float, trials: int, seed: int,
                  config: Optional[ExperimentConfig] = None,
                  workers: Optional[int] = None) -> float:
    """Monte Carlo mean single-MT trips over `trials` channel uses."""
    base = config or ExperimentConfig(shape=shape)
    cfg = replace(base, shape=shape, T_s=T_s, x_max=0, trials_per_x=trials,
                  mt_count=1, seed=seed)
    records = run_trials(cfg, workers=workers)
    return float(np.mean([sum(r.trips) for r in records]))


def trips_rows(shape: ChannelShape, T_list: Sequence[float], trials: int,
               seed: int, config: Optional[ExperimentConfig] = None,
               workers: Optional[int] = None) -> list[dict]:
    """T_s, simulated mean trips, closed-form estimate, relative error."""
    base = config or ExperimentConfig(shape=shape)
    rows = []
    for i, T in enumerate(T_list):
        mc = mean_trips_mc(shape, T, trials, derive_stream_seed(seed, i, 0),
                           config=base, workers=workers)
        est = expected_single_mt_trips(shape, T, base.motility.v_avg_um_s)
        rows.append({
            "T_s": T,
            "mean_trips_mc": mc,
            "trips_estimate": est,
            "rel_error": abs(mc - est) / est,
        })
    return rows


# ---------------------------------------------------------------------------
# figure reproduction recipes

FIGURE_IDS = ("fig4", "fig5a", "fig5b", "fig6", "fig7", "fig8")

#: self-chosen representatives for the trip-rate figure (one per family);
#: the ring is the example channel used to illustrate the simulator
FIG4_SHAPES = (
    ("rectangle", Rectangle(40.0, 40.0)),
    ("polygon", RegularPolygon(20, 25.57)),
    ("ring", PolygonRing(8, 20.0, 25.0)),
)
FIG4_T_LIST = (80.0, 160.0, 240.0, 320.0, 480.0, 640.0)


def _perimeter_matched_polygon(n: int, perimeter_um: float) -> RegularPolygon:
    return RegularPolygon(n, perimeter_um / (2.0 * n * math.sin(math.pi / n)))


def figure_shapes(figure: str) -> list[tuple[str, ChannelShape, float]]:
    """(label, shape, T_s) sweep for a capacity figure."""
    if figure in ("fig5a", "fig5b"):
        T = 160.0 if figure == "fig5a" else 240.0
        dims = [20.0 + 5.0 * k for k in range(7)]
        return [(f"rect_{w:g}x{l:g}", Rectangle(w, l), T)
                for w in dims for l in dims]
    if figure == "fig6":
        return [(f"poly_n{n}", _perimeter_matched_polygon(n, 160.0), 320.0)
                for n in (4, 8, 12, 16, 20)]
    if figure == "fig7":
        return [(f"circle_r{r:g}", RegularPolygon(20, r), 250.0)
                for r in (17.0, 20.0, 22.75, 25.57)]
    if figure == "fig8":
        return [(f"ring_ri{ri:g}", PolygonRing(20, ri, 25.57), 320.0)
                for ri in (0.0, 10.0, 15.0, 20.0)]
    raise ConfigError(f"unknown figure id {figure!r}; expected one of {FIGURE_IDS}")


@dataclass
class ExperimentReport:
    """Config echo plus result rows; the echo alone reproduces the run."""

    figure: str
    config: dict
    rows: list[dict] = field(default_factory=list)
    wall_clock_s: float = 0.0

    def to_json(self) -> str:
        return json.dumps(
            {"figure": self.figure, "config": self.config, "rows": self.rows,
             "wall_clock_s": self.wall_clock_s},
            indent=2,
        )


def reproduce(figure: str, trials: int = 500, seed: int = 0,
              x_max: int = 20, workers: Optional[int] = None,
              out_dir=None) -> ExperimentReport:
    """Run one figure's shape sweep at desk scale and emit plot-ready rows.

    fig4 compares Monte Carlo trip counts against the closed-form estimate;
    fig5a/fig5b sweep rectangles at fixed T; fig6/fig7/fig8 produce capacity
    curves versus x_max for the polygon / circle-radius / ring sweeps.
    """
    t_start = time.time()
    base = ExperimentConfig(shape=Rectangle(40.0, 40.0), trials_per_x=trials,
                            x_max=x_max, seed=seed)
    echo = {
        "figure": figure,
        "trials_per_x": trials,
        "seed": seed,
        "x_max": x_max,
        "motility": asdict(base.motility),
        "zones": base.to_dict()["zones"],
        "height_um": base.height_um,
        "concentration_per_fL": base.concentration_per_fL,
        "max_load": base.max_load,
    }

    if figure == "fig4":
        rows = []
        for fi, (family, shape) in enumerate(FIG4_SHAPES):
            for row in trips_rows(shape, FIG4_T_LIST, trials,
                                  derive_stream_seed(seed, fi, 0),
                                  workers=workers):
                rows.append({"family": family,
                             "shape": json.dumps(shape_to_literal(shape)),
                             **row})
        fieldnames = ["family", "shape", "T_s", "mean_trips_mc",
                      "trips_estimate", "rel_error"]
    elif figure in ("fig5a", "fig5b"):
        rows = []
        for label, shape, T in figure_shapes(figure):
            cfg = replace(base, shape=shape, T_s=T)
            records = run_trials(cfg, workers=workers)
            res = blahut_arimoto(estimate_pmf(records_to_pairs(records), x_max))
            rows.append({
                "label": label,
                "w_um": shape.width_um,
                "l_um": shape.length_um,
                "T_s": T,
                "x_max": x_max,
                "capacity_bits": res.capacity_bits,
                "iters": res.iterations,
                "gap_bits": res.upper_bound_bits - res.lower_bound_bits,
            })
        fieldnames = ["label", "w_um", "l_um", "T_s", "x_max",
                      "capacity_bits", "iters", "gap_bits"]
    else:
        rows = []
        for label, shape, T in figure_shapes(figure):
            cfg = replace(base, shape=shape, T_s=T)
            records = run_trials(cfg, workers=workers)
            for crow in capacity_rows(records, list(range(1, x_max + 1))):
                rows.append({"label": label,
                             "shape": json.dumps(shape_to_literal(shape)),
                             "T_s": T, **crow})
        fieldnames = ["label", "shape", "T_s", "x_max", "capacity_bits",
                      "iters", "gap_bits"]

    report = ExperimentReport(figure=figure, config=echo, rows=rows,
                              wall_clock_s=time.time() - t_start)
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_csv(out / f"{figure}.csv", fieldnames, rows)
        (out / f"{figure}_report.json").write_text(report.to_json())
    return report
