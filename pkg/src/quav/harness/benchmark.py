"""Multi-planner, multi-seed comparisons and parameter sweeps."""
from __future__ import annotations

import csv
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .pipeline import PLANNERS, PlanResult, run_planner
from .scenario import Scenario

CSV_COLUMNS = ("scenario", "planner", "seed", "length_m", "feasible", "buffer_violations",
               "wall_ms")


def _run(args) -> PlanResult:
    s, planner, seed = args
    return run_planner(s, planner, seed)


def _map(jobs: list, workers: int) -> list:
    if workers <= 1 or len(jobs) <= 1:
        return [_run(j) for j in jobs]
    with ProcessPoolExecutor(max_workers=workers) as ex:
        return list(ex.map(_run, jobs))


def run_benchmark(s: Scenario, seeds: Iterable[int], planners: Sequence[str] = PLANNERS,
                  workers: int = 1) -> list[PlanResult]:
    """Every planner on every seed; rows sorted by (planner, seed).

    A failing planner yields an infeasible row with a diagnostic instead of
    aborting the run.
    """
    jobs = [(s, p, int(seed)) for p in planners for seed in seeds]
    rows = _map(jobs, workers)
    return sorted(rows, key=lambda r: (r.planner, r.seed))


def csv_row(r: PlanResult) -> list[str]:
    length = "" if math.isnan(r.length) else f"{r.length:.6f}"
    return [r.scenario, r.planner, str(r.seed), length, str(bool(r.feasible)).lower(),
            str(r.buffer_violations), f"{r.wall_ms:.1f}"]


def write_benchmark_csv(rows: Iterable[PlanResult], path, append: bool = True) -> None:
    """Write rows; appending to an existing file requires the same header."""
    path = Path(path)
    exists = append and path.exists() and path.stat().st_size > 0
    if exists:
        with open(path, newline="") as fh:
            header = next(csv.reader(fh), None)
        if tuple(header or ()) != CSV_COLUMNS:
            raise ValueError(f"{path} has a different header: {header}")
    with open(path, "a" if exists else "w", newline="") as fh:
        w = csv.writer(fh)
        if not exists:
            w.writerow(CSV_COLUMNS)
        for r in rows:
            w.writerow(csv_row(r))


def read_benchmark_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


@dataclass
class PlannerSummary:
    planner: str
    runs: int
    feasible: int
    median_length: float
    mean_length: float


def summarize(rows: Sequence[PlanResult]) -> dict[str, PlannerSummary]:
    """Per-planner statistics; lengths are taken over feasible runs only."""
    out = {}
    for p in sorted({r.planner for r in rows}):
        sub = [r for r in rows if r.planner == p]
        L = [r.length for r in sub if r.feasible]
        out[p] = PlannerSummary(p, len(sub), len(L),
                                float(np.median(L)) if L else math.nan,
                                float(np.mean(L)) if L else math.nan)
    return out


SWEEP_PARAMS = {"k": "layers", "lr": "lr", "lambda": "lam"}
SWEEP_COLUMNS = ("scenario", "param", "value", "seed", "length_m", "feasible",
                 "buffer_violations", "final_best_loss")


def apply_param(s: Scenario, param: str, value: float) -> Scenario:
    if param == "k":
        return s.with_qaoa(layers=int(value))
    if param == "lr":
        return s.with_qaoa(lr=float(value))
    if param == "lambda":
        return s.with_cost(lam=float(value))
    raise ValueError(f"unknown sweep parameter {param!r}; choose from {sorted(SWEEP_PARAMS)}")


def run_sweep(s: Scenario, param: str, values: Sequence[float], seeds: Iterable[int],
              workers: int = 1) -> list[tuple[float, PlanResult]]:
    seeds = list(seeds)
    jobs, keys = [], []
    for v in values:
        sv = apply_param(s, param, v)
        for seed in seeds:
            jobs.append((sv, "quav", int(seed)))
            keys.append(v)
    return list(zip(keys, _map(jobs, workers)))


def write_sweep_csv(results, param: str, path) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for v, r in results:
            best = r.trace.best_losses[-1] if r.trace is not None and len(r.trace) else math.nan
            length = "" if math.isnan(r.length) else f"{r.length:.6f}"
            w.writerow([r.scenario, param, repr(v), r.seed, length, str(r.feasible).lower(),
                        r.buffer_violations, repr(best)])
