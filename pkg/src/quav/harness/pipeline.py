"""End-to-end planning runs producing :class:`PlanResult` records."""
from __future__ import annotations

import math
import time
from contextlib import contextmanager
from dataclasses import dataclass, field
from functools import lru_cache

from ..baselines import AStarConfig, RrtConfig, astar_plan, rrt_plan
from ..encoding import (Encoding, RepairPlanner, decode_select, repair_segments,
                        segment_encoding, select_encoding)
from ..errors import NoFeasibleSample, PipelineError, QuavError
from ..geo import Point, Segment, min_obstacle_distance, segment_intersects
from ..graphplan import path_length
from ..qaoa import LossTrace, decode_path, final_state, optimize
from ..qsim import sample_bitstrings
from .scenario import Scenario

PLANNERS = ("astar", "quav", "rrt")


@dataclass
class PlanResult:
    planner: str
    scenario: str
    seed: int
    waypoints: list[Point]                  # UTM meters
    latlon: list[tuple[float, float]]       # (lat, lon) degrees
    length: float
    feasible: bool
    buffer_violations: int
    trace: LossTrace | None = None
    wall_ms: float = 0.0
    diagnostic: str = ""
    extra: dict = field(default_factory=dict)


def path_metrics(waypoints, obstacles, buffer_distance: float) -> tuple[bool, int]:
    """(no segment touches an obstacle, number of segments closer than the buffer)."""
    feasible = True
    violations = 0
    for a, b in zip(waypoints, waypoints[1:]):
        if a == b:
            continue
        s = Segment(a, b)
        if any(segment_intersects(s, o) for o in obstacles):
            feasible = False
        if min_obstacle_distance(s, obstacles) < buffer_distance:
            violations += 1
    return feasible, violations


def _result(planner, s: Scenario, seed, pts, t0, **kw) -> PlanResult:
    pts = [(float(x), float(y)) for x, y in pts]
    feasible, viol = path_metrics(pts, s.obstacles, s.cost.buffer_distance)
    ll = [(g.lat, g.lon) for g in s.to_latlon(pts)]
    return PlanResult(planner, s.name, int(seed), pts, ll, path_length(pts), feasible, viol,
                      wall_ms=(time.perf_counter() - t0) * 1e3, **kw)


@lru_cache(maxsize=16)
def _repair_planner(obstacles: tuple, bounds, buffer: float, resolution: float,
                    anchor) -> RepairPlanner:
    return RepairPlanner(obstacles, bounds, buffer, resolution, anchor)


def repair_planner_for(s: Scenario) -> RepairPlanner:
    return _repair_planner(tuple(s.obstacles), s.bounds, s.cost.buffer_distance,
                           s.planning.repair_resolution_m, s.start_xy)


@contextmanager
def _stage(name: str):
    try:
        yield
    except PipelineError:
        raise
    except Exception as e:
        raise PipelineError(name, e) from e


def encode(s: Scenario) -> Encoding:
    q = s.qaoa
    if q.encoding == "segment":
        return segment_encoding(s.start_xy, s.end_xy, s.obstacles, q.qubits, s.cost,
                                q.discontinuity_penalty, q.hamiltonian, q.coupling)
    return select_encoding(s.start_xy, s.end_xy, s.obstacles, q.qubits, s.cost,
                           q.discontinuity_penalty, q.select_resolution_m, s.bounds,
                           q.hamiltonian, q.coupling)


def run_quav(s: Scenario, seed: int | None = None) -> PlanResult:
    """Encode, optimise, sample, decode and repair; errors carry the failing stage."""
    t0 = time.perf_counter()
    seed = s.qaoa.seed if seed is None else int(seed)
    q = s.qaoa
    with _stage("preprocess"):
        start, end = s.start_xy, s.end_xy
    with _stage("encode"):
        enc = encode(s)
    with _stage("optimize"):
        params, trace = optimize(enc.problem, q.steps, seed, q.layers, q.lr, q.shots)
    with _stage("sample"):
        state = final_state(enc.problem, params)
        samples = sample_bitstrings(state, q.decode_shots, seed + 7919)
    extra: dict = {"encoding": enc.mode, "qubits": enc.n, "params": params.to_text()}
    with _stage("decode"):
        if enc.mode == "segment":
            try:
                decoded = decode_path(enc.problem, samples, enc.edges, s.obstacles, start, end)
            except NoFeasibleSample as e:
                decoded = e.best
            extra["bitstring"] = decoded.bitstring
            extra["decoded_feasible"] = decoded.feasible
        else:
            pts, decoded = decode_select(enc, samples, s.obstacles)
            extra["bitstring"] = decoded.bitstring if decoded else ""
            extra["decoded_feasible"] = decoded is not None
    with _stage("repair"):
        if enc.mode == "segment":
            rep = repair_segments(decoded.bits, enc, repair_planner_for(s))
            pts = rep.waypoints
            extra["repaired_runs"] = len(rep.repaired_runs)
    with _stage("metrics"):
        r = _result("quav", s, seed, pts, t0, trace=trace, extra=extra)
    if not r.feasible:
        r.diagnostic = "path intersects an obstacle"
    return r


def run_astar(s: Scenario, seed: int = 0) -> PlanResult:
    t0 = time.perf_counter()
    a = s.planning.astar
    cfg = AStarConfig(a.resolution, "euclidean", a.smoothing, s.cost.buffer_distance)
    p = astar_plan(s.start_xy, s.end_xy, s.obstacles, cfg, s.bounds)
    return _result("astar", s, seed, p.waypoints, t0)


def run_rrt(s: Scenario, seed: int = 0) -> PlanResult:
    t0 = time.perf_counter()
    r = s.planning.rrt
    cfg = RrtConfig(r.step, r.max_iterations, r.goal_bias, int(seed), s.cost.buffer_distance)
    p = rrt_plan(s.start_xy, s.end_xy, s.obstacles, cfg, s.bounds)
    return _result("rrt", s, seed, p.waypoints, t0)


RUNNERS = {"astar": run_astar, "quav": run_quav, "rrt": run_rrt}


def run_planner(s: Scenario, planner: str, seed: int) -> PlanResult:
    """Run one planner; a planner failure becomes an infeasible row with a diagnostic."""
    if planner not in RUNNERS:
        raise ValueError(f"unknown planner {planner!r}")
    t0 = time.perf_counter()
    try:
        return RUNNERS[planner](s, seed)
    except QuavError as e:
        return PlanResult(planner, s.name, int(seed), [], [], math.nan, False, 0,
                          wall_ms=(time.perf_counter() - t0) * 1e3,
                          diagnostic=f"{type(e).__name__}: {e}")
