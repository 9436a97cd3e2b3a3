"""Command line entry point: ``quav plan | benchmark | sweep | list``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys
from pathlib import Path

from .errors import ScenarioParseError, ScenarioValidationError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NO_PATH = 3

log = logging.getLogger("quav")


def parse_seeds(text: str) -> list[int]:
    """``"0..9"`` (inclusive) or ``"1,4,7"``."""
    text = text.strip()
    if ".." in text:
        a, b = text.split("..", 1)
        lo, hi = int(a), int(b)
        if hi < lo:
            raise argparse.ArgumentTypeError(f"empty seed range {text!r}")
        return list(range(lo, hi + 1))
    try:
        return [int(t) for t in text.split(",") if t.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"bad seed list {text!r}") from e


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="quav", description="QAOA-assisted UAV path planning")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def scenario_args(sp):
        sp.add_argument("-v", "--verbose", action="store_true", default=argparse.SUPPRESS)
        sp.add_argument("scenario", help="scenario JSON file or bundled scenario name")
        sp.add_argument("--out", type=Path, default=Path("out"), help="output directory")
        sp.add_argument("--steps", type=int, help="override optimisation steps")
        sp.add_argument("--shots", type=int, help="estimate the loss from N shots")

    sp = sub.add_parser("plan", help="plan one path and write GeoJSON, CSV and SVG")
    scenario_args(sp)
    sp.add_argument("--planner", choices=("quav", "astar", "rrt"), default="quav")
    sp.add_argument("--seed", type=int, default=None)

    sb = sub.add_parser("benchmark", help="compare planners over a seed range")
    scenario_args(sb)
    sb.add_argument("--seeds", type=parse_seeds, default=parse_seeds("0..9"))
    sb.add_argument("--workers", type=int, default=1)

    sw = sub.add_parser("sweep", help="sweep one QAOA or cost parameter")
    scenario_args(sw)
    sw.add_argument("--param", choices=("k", "lr", "lambda"), required=True)
    sw.add_argument("--values", type=float, nargs="+", required=True)
    sw.add_argument("--seeds", type=parse_seeds, default=parse_seeds("0..2"))
    sw.add_argument("--workers", type=int, default=1)

    sub.add_parser("list", help="list bundled scenarios")
    return p


def _load(args):
    from .harness.scenario import load_scenario

    s = load_scenario(args.scenario)
    over = {}
    if getattr(args, "steps", None) is not None:
        over["steps"] = args.steps
    if getattr(args, "shots", None) is not None:
        over["shots"] = args.shots
    return s.with_qaoa(**over) if over else s


def _cmd_plan(args) -> int:
    from .harness.benchmark import CSV_COLUMNS, csv_row, write_benchmark_csv
    from .harness.output import emit_geojson
    from .harness.pipeline import run_planner
    from .harness.plots import emit_loss_svg, emit_plot_svg

    s = _load(args)
    seed = s.qaoa.seed if args.seed is None else args.seed
    r = run_planner(s, args.planner, seed)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{s.name}_{r.planner}_s{seed}"
    write_benchmark_csv([r], out / "results.csv")
    w = csv.writer(sys.stdout)
    w.writerow(CSV_COLUMNS)
    w.writerow(csv_row(r))
    if r.diagnostic:
        log.warning("%s", r.diagnostic)
    if len(r.waypoints) >= 2:
        emit_geojson(r, out / f"{stem}.geojson", s)
        emit_plot_svg(r, s, out / f"{stem}.svg")
    if r.trace is not None:
        r.trace.write_csv(out / f"{stem}_loss.csv")
        emit_loss_svg(r.trace, out / f"{stem}_loss.svg", f"{s.name} seed {seed}")
        (out / f"{stem}_params.txt").write_text(r.extra["params"])
    return EXIT_OK if r.feasible else EXIT_NO_PATH


def _cmd_benchmark(args) -> int:
    from .harness.benchmark import CSV_COLUMNS, csv_row, run_benchmark, summarize, write_benchmark_csv
    from .harness.plots import plot_paths

    s = _load(args)
    rows = run_benchmark(s, args.seeds, workers=args.workers)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    write_benchmark_csv(rows, out / "benchmark.csv")
    w = csv.writer(sys.stdout)
    w.writerow(CSV_COLUMNS)
    for r in rows:
        w.writerow(csv_row(r))
    first = args.seeds[0]
    plot_paths([r for r in rows if r.seed == first], s, out / f"{s.name}_benchmark_s{first}.svg",
               title=f"{s.name}, seed {first}")
    for p, sm in summarize(rows).items():
        log.info("%s: %d/%d feasible, median length %.2f m", p, sm.feasible, sm.runs,
                 sm.median_length)
    return EXIT_OK if any(r.feasible for r in rows) else EXIT_NO_PATH


def _cmd_sweep(args) -> int:
    from .harness.benchmark import run_sweep, write_sweep_csv

    s = _load(args)
    res = run_sweep(s, args.param, args.values, args.seeds, args.workers)
    out = args.out
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"{s.name}_sweep_{args.param}.csv"
    write_sweep_csv(res, args.param, path)
    sys.stdout.write(path.read_text())
    return EXIT_OK


def _cmd_list(args) -> int:
    from .harness.scenario import bundled_scenarios

    for name in bundled_scenarios():
        print(name)
    return EXIT_OK


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s", stream=sys.stderr)
    cmd = {"plan": _cmd_plan, "benchmark": _cmd_benchmark, "sweep": _cmd_sweep,
           "list": _cmd_list}[args.command]
    try:
        return cmd(args)
    except (ScenarioParseError, ScenarioValidationError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
