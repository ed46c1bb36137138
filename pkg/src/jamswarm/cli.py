"""Command-line front end.

    jamswarm run CONFIG [--seed N] [--omni] [--time-budget S] [--out DIR] [--workers N]
    jamswarm compare DIR_A DIR_B
    jamswarm validate CONFIG

``run`` writes into the output directory (default ``$JAMSWARM_OUT`` or
``./results``):

    convergence.csv    window,generation,best_of,avg_of
    timing.csv         window,generation,elapsed_s
    topology_<w>.json  swarm state, capacities, routes and jammer per window
    topology_<w>.svg   plot of the same
    convergence.svg    objective per generation
    manifest.json      resolved config, seed, version, start time
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import datetime
import json
import logging
import math
import os
import sys
from pathlib import Path

from . import __version__
from .config import config_from_dict, config_to_dict, parse_config
from .errors import ConfigurationError
from .plotting import plot_convergence, plot_topology
from .scenarios import ScenarioConfig, run_scenario

log = logging.getLogger("jamswarm")

OUT_ENV = "JAMSWARM_OUT"


def apply_overrides(config: ScenarioConfig, seed=None, omni=False, time_budget=None) -> ScenarioConfig:
    ga = config.ga
    if seed is not None:
        ga = dataclasses.replace(ga, rng_seed=seed)
    if time_budget is not None:
        ga = dataclasses.replace(ga, time_budget=time_budget)
    config = dataclasses.replace(config, ga=ga)
    if omni:
        config = config.with_omni()
    return config


def _matrix(a):
    return [[float(v) for v in row] for row in a]


def topology_document(record, config: ScenarioConfig) -> dict:
    snap = record.snapshot
    routing = snap["routing"]
    chrom = record.report.best_chromosome
    uavs = []
    for i, ((x, y), b) in enumerate(zip(snap["positions"].tolist(), snap["beams"].tolist())):
        uav = {"id": i, "x": x, "y": y, "beam_deg": b}
        if chrom is not None:
            uav["cell"] = [int(v) for v in chrom.cells[i]]
        uavs.append(uav)
    jam = config.jammer
    return {
        "window": record.window_index,
        "area_origin": [record.area_origin.x, record.area_origin.y],
        "area_size": [record.grid.width, record.grid.height],
        "spacing": record.grid.spacing,
        "jammer": {
            "x": jam.position.x,
            "y": jam.position.y,
            "power_dbm": "off" if jam.is_off else jam.power_dbm,
        },
        "uavs": uavs,
        "capacity_bps": _matrix(snap["capacity"]),
        "e2e_bps": _matrix(routing.e2e_capacity),
        "paths": routing.paths,
        "avg_e2e_bps": routing.avg_capacity,
        "min_e2e_bps": routing.min_capacity,
        "objective": snap["objective"],
        "best_of": record.report.best_of,
        "baseline_of": record.report.baseline_of,
        "generations_run": record.report.generations_run,
    }


def write_outputs(records, config: ScenarioConfig, out: Path, manifest: dict):
    out.mkdir(parents=True, exist_ok=True)
    rows = []
    with open(out / "convergence.csv", "w", newline="") as fh, open(
        out / "timing.csv", "w", newline=""
    ) as th:
        conv, timing = csv.writer(fh), csv.writer(th)
        conv.writerow(["window", "generation", "best_of", "avg_of"])
        timing.writerow(["window", "generation", "elapsed_s"])
        for rec in records:
            rep = rec.report
            for g, (best, avg) in enumerate(zip(rep.of_history, rep.avg_history)):
                row = (rec.window_index, g, best, avg)
                rows.append(row)
                conv.writerow([rec.window_index, g, repr(best), repr(avg)])
            for g, t in enumerate(rep.time_history):
                timing.writerow([rec.window_index, g, f"{t:.6f}"])

    for rec in records:
        doc = topology_document(rec, config)
        with open(out / f"topology_{rec.window_index}.json", "w") as fh:
            json.dump(doc, fh, indent=1)
            fh.write("\n")
        plot_topology(
            out / f"topology_{rec.window_index}.svg",
            rec.grid,
            rec.snapshot["positions"],
            rec.snapshot["beams"],
            config.jammer,
            rec.snapshot["routing"],
            title=f"{config.kind} window {rec.window_index}: OF = {rec.snapshot['objective']:.4g}",
        )
    plot_convergence(out / "convergence.svg", rows, records[0].report.baseline_of)

    manifest = dict(manifest)
    manifest["windows"] = [
        {
            "window": r.window_index,
            "generations_run": r.report.generations_run,
            "elapsed_s": r.report.elapsed,
            "evaluations": r.report.evaluations,
        }
        for r in records
    ]
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=1)
        fh.write("\n")


def run(config_path, out=None, seed=None, omni=False, time_budget=None, workers=1) -> int:
    """Execute a scenario file and write all outputs; returns an exit status."""
    started = datetime.datetime.now(datetime.timezone.utc).isoformat()
    config = apply_overrides(parse_config(config_path), seed, omni, time_budget)
    out = Path(out or os.environ.get(OUT_ENV, "results"))
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create output directory {out}: {exc}") from exc
    records = run_scenario(config, workers=workers)
    manifest = {
        "config_path": str(config_path),
        "config": config_to_dict(config),
        "rng_seed": config.ga.rng_seed,
        "version": __version__,
        "started": started,
        "omni": omni,
        "workers": workers,
    }
    write_outputs(records, config, out, manifest)
    final = records[-1].snapshot
    print(
        f"{config.kind}: OF={final['objective']:.6g} "
        f"avg={final['routing'].avg_capacity:.6g} bps "
        f"min={final['routing'].min_capacity:.6g} bps -> {out}"
    )
    return 0


def load_run(path) -> dict:
    path = Path(path)
    with open(path / "manifest.json") as fh:
        manifest = json.load(fh)
    windows = sorted(path.glob("topology_*.json"), key=lambda p: int(p.stem.split("_")[1]))
    topologies = [json.loads(p.read_text()) for p in windows]
    with open(path / "convergence.csv", newline="") as fh:
        conv = [
            (int(r["window"]), int(r["generation"]), float(r["best_of"]), float(r["avg_of"]))
            for r in csv.DictReader(fh)
        ]
    if not topologies:
        raise ConfigurationError(f"{path}: no topology files")
    return {"manifest": manifest, "topologies": topologies, "convergence": conv}


def _ratio(a: float, b: float) -> float:
    if b == 0:
        return 1.0 if a == 0 else math.inf
    return a / b


def compare(dir_a, dir_b, stream=sys.stdout) -> dict:
    """OF ratio, E2E rates and per-generation OF deltas of two finished runs."""
    a, b = load_run(dir_a), load_run(dir_b)
    kind_a, kind_b = a["manifest"]["config"]["kind"], b["manifest"]["config"]["kind"]
    if kind_a != kind_b:
        raise ConfigurationError(f"cannot compare a {kind_a} run with a {kind_b} run")
    ta, tb = a["topologies"][-1], b["topologies"][-1]
    ratio = _ratio(ta["objective"], tb["objective"])
    best_b = {(w, g): v for w, g, v, _ in b["convergence"]}
    deltas = [
        (w, g, v - best_b[(w, g)]) for w, g, v, _ in a["convergence"] if (w, g) in best_b
    ]
    summary = {
        "kind": kind_a,
        "of_a": ta["objective"],
        "of_b": tb["objective"],
        "of_ratio": ratio,
        "avg_e2e_bps": (ta["avg_e2e_bps"], tb["avg_e2e_bps"]),
        "min_e2e_bps": (ta["min_e2e_bps"], tb["min_e2e_bps"]),
        "deltas": deltas,
    }
    print(f"kind            {kind_a}", file=stream)
    print(f"OF              {ta['objective']:.6g} vs {tb['objective']:.6g}", file=stream)
    print(f"OF ratio        {ratio:.6g}", file=stream)
    print(f"avg E2E [bps]   {ta['avg_e2e_bps']:.6g} vs {tb['avg_e2e_bps']:.6g}", file=stream)
    print(f"min E2E [bps]   {ta['min_e2e_bps']:.6g} vs {tb['min_e2e_bps']:.6g}", file=stream)
    print("window,generation,delta_best_of", file=stream)
    for w, g, d in deltas:
        print(f"{w},{g},{d!r}", file=stream)
    return summary


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jamswarm", description="Anti-jamming UAV swarm formation and beam optimizer"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a scenario config")
    p.add_argument("config")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--omni", action="store_true", help="use omnidirectional antennas")
    p.add_argument("--time-budget", type=float, default=None, metavar="S")
    p.add_argument("--out", default=None, help=f"output directory (default ${OUT_ENV} or ./results)")
    p.add_argument("--workers", type=int, default=1, help="processes for fitness evaluation")

    p = sub.add_parser("compare", help="compare two run directories")
    p.add_argument("dir_a")
    p.add_argument("dir_b")

    p = sub.add_parser("validate", help="check a config file and print it resolved")
    p.add_argument("config")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        if args.command == "run":
            return run(args.config, args.out, args.seed, args.omni, args.time_budget, args.workers)
        if args.command == "compare":
            compare(args.dir_a, args.dir_b)
            return 0
        config = parse_config(args.config)
        json.dump(config_to_dict(config), sys.stdout, indent=1)
        print()
        return 0
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
