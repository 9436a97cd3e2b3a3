"""Problem encodings that turn a planning scenario into a QAOA problem, and the
classical repair that turns a decoded selection into a flyable path.

``segment`` mode puts one qubit on each step of the straight start->end line.
Selected, clear segments are kept; every maximal run of excluded or
buffer-violating segments is replaced by a shortest detour on a clearance
grid.

``select`` mode puts one qubit on each edge of a small corridor subgraph made
of the shortest obstacle-free monotone grid paths; the decoder chains the
selected edges from the start.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .baselines import Bounds, dijkstra_oracle, grid_search_graph, planning_grid
from .cost import CostConfig, CostVector, assign_costs
from .errors import NoFeasibleSample, NoPathExists
from .geo import ObstaclePolygon, Point, Segment, clearance, min_obstacle_distance
from .graphplan import (CandidatePath, Grid, SearchGraph, enumerate_candidate_paths,
                        path_length, segment_straight_path)
from .qaoa import ANCHOR, DecodedPath, QaoaProblem, chain_links, decode_path

SQRT2 = math.sqrt(2.0)


@dataclass
class Encoding:
    mode: str
    start: Point
    end: Point
    edges: list[Segment]
    costs: CostVector
    problem: QaoaProblem
    step: float
    candidates: list[CandidatePath] = field(default_factory=list)

    @property
    def n(self) -> int:
        return len(self.edges)


def _make_problem(costs: CostVector, mu: float, links, hamiltonian: str,
                  coupling: float) -> QaoaProblem:
    if hamiltonian == "selection":
        return QaoaProblem.from_costs(costs, mu, links)
    if hamiltonian == "literal":
        return QaoaProblem.literal(costs, coupling, mu, links)
    raise ValueError(f"unknown hamiltonian {hamiltonian!r}")


def segment_encoding(start: Point, end: Point, obstacles: Sequence[ObstaclePolygon], n: int,
                     cost_cfg: CostConfig | None = None, mu: float | None = None,
                     hamiltonian: str = "selection", coupling: float = 0.5) -> Encoding:
    """One qubit per straight-line step; ``mu`` defaults to twice the step length."""
    seg = segment_straight_path(start, end, n)
    costs = assign_costs(seg, obstacles, cost_cfg)
    mu = 2.0 * seg.step if mu is None else float(mu)
    problem = _make_problem(costs, mu, chain_links(n), hamiltonian, coupling)
    return Encoding("segment", seg.waypoints[0], seg.waypoints[-1], list(seg.edges), costs,
                    problem, seg.step)


# ---------------------------------------------------------------------------
# Repair grid

class RepairPlanner:
    """Shortest detours whose every segment keeps ``buffer`` meters of clearance.

    Grid nodes are kept when their clearance is at least
    ``buffer + resolution / sqrt 2``; the clearance of any 8-neighbour edge
    between two kept nodes is then at least ``buffer``.  Off-grid endpoints
    join nearby nodes only through exactly checked segments.
    """

    def __init__(self, obstacles: Sequence[ObstaclePolygon], bounds: Bounds, buffer: float,
                 resolution: float = 1.0, anchor: Point | None = None, reach: float = 3.0):
        self.obstacles = list(obstacles)
        self.buffer = float(buffer)
        self.resolution = float(resolution)
        self.reach = reach * resolution
        anchor = anchor if anchor is not None else (bounds[0], bounds[1])
        self.grid = planning_grid(anchor, bounds, resolution)
        self.graph, self.remap = grid_search_graph(
            self.grid, self.obstacles, self.buffer + resolution / SQRT2)

    def segment_clear(self, a: Point, b: Point) -> bool:
        if a == b:
            return True
        d = min_obstacle_distance(Segment(a, b), self.obstacles)
        return d > 0.0 and d >= self.buffer

    def _attach(self, p: Point) -> list[tuple[int, float]]:
        nodes = self.graph.nodes
        if not len(nodes):
            return []
        d = np.hypot(nodes[:, 0] - p[0], nodes[:, 1] - p[1])
        near = np.flatnonzero(d <= self.reach)
        if not len(near):
            near = np.argsort(d, kind="stable")[:8]
        out = []
        for k in near[np.argsort(d[near], kind="stable")]:
            if self.segment_clear(p, tuple(nodes[k])):
                out.append((int(k), float(d[k])))
        return out

    def route(self, a: Point, b: Point) -> list[Point]:
        """Waypoints from ``a`` to ``b`` (both included)."""
        a = (float(a[0]), float(a[1]))
        b = (float(b[0]), float(b[1]))
        if self.segment_clear(a, b):
            return [a, b]
        sa, sb = self._attach(a), self._attach(b)
        if not sa or not sb:
            raise NoPathExists("repair endpoints cannot reach the clearance grid")
        V = len(self.graph.nodes)
        ia, ib = V, V + 1
        links = [(ia, k) for k, _ in sa] + [(ib, k) for k, _ in sb]
        g = self.graph.with_extra([a, b], links)
        path = dijkstra_oracle(g, ia, ib)
        return _collapse(list(path.waypoints))


def _collapse(pts: list[Point]) -> list[Point]:
    pts = [(float(x), float(y)) for x, y in pts]
    out = [pts[0]]
    for k in range(1, len(pts) - 1):
        a, b, c = out[-1], pts[k], pts[k + 1]
        if b == a:
            continue
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1])
        if abs(cross) > 1e-9 or dot < 0:
            out.append(b)
    if pts[-1] != out[-1]:
        out.append(pts[-1])
    return out


@dataclass
class Repaired:
    waypoints: list[Point]
    repaired_runs: list[tuple[int, int]]   # [first, last) segment index ranges


def repair_segments(bits: Sequence[int], enc: Encoding, planner: RepairPlanner) -> Repaired:
    """Keep selected clear segments; reroute every run of the others."""
    n = enc.n
    d = enc.costs.distances
    bad = [not bits[i] or not d[i] >= planner.buffer for i in range(n)]
    pts = [enc.edges[0].a]
    runs = []
    i = 0
    while i < n:
        if not bad[i]:
            pts.append(enc.edges[i].b)
            i += 1
            continue
        j = i
        while j < n and bad[j]:
            j += 1
        detour = planner.route(pts[-1], enc.edges[j - 1].b)
        pts.extend(detour[1:])
        runs.append((i, j))
        i = j
    return Repaired(_collapse(pts), runs)


# ---------------------------------------------------------------------------
# Select mode

def select_encoding(start: Point, end: Point, obstacles: Sequence[ObstaclePolygon], n: int,
                    cost_cfg: CostConfig | None = None, mu: float | None = None,
                    resolution: float | None = None, bounds: Bounds | None = None,
                    hamiltonian: str = "selection", coupling: float = 0.5,
                    max_paths: int = 200) -> Encoding:
    """Qubits on the union of the shortest clear monotone corridor paths.

    Paths are added shortest first while the edge union stays within ``n``.
    """
    cost_cfg = cost_cfg or CostConfig()
    start = (float(start[0]), float(start[1]))
    end = (float(end[0]), float(end[1]))
    D = math.dist(start, end)
    r = resolution if resolution is not None else D / 8.0
    if bounds is None:
        m = max(2 * r, 2 * cost_cfg.buffer_distance)
        bounds = (min(start[0], end[0]) - m, min(start[1], end[1]) - m,
                  max(start[0], end[0]) + m, max(start[1], end[1]) + m)
    grid = planning_grid(start, bounds, r)
    graph, remap = grid_search_graph(grid, obstacles, cost_cfg.buffer_distance + r / SQRT2)
    s_old = grid.snap(start)
    e_old = grid.snap(end)
    if remap[s_old] < 0 or remap[e_old] < 0:
        raise NoPathExists("corridor grid endpoints are blocked")
    cands = enumerate_candidate_paths(graph, int(remap[s_old]), int(remap[e_old]),
                                      max_paths=max_paths)
    tail = [] if tuple(cands[0].waypoints[-1]) == end else [end]
    edge_ids: dict[tuple[Point, Point], int] = {}
    edges: list[Segment] = []
    kept: list[CandidatePath] = []
    links: set[tuple[int, int]] = set()
    for c in cands:
        pts = [tuple(map(float, p)) for p in c.waypoints] + tail
        segs = [(pts[i], pts[i + 1]) for i in range(len(pts) - 1)]
        new = [s for s in segs if s not in edge_ids]
        if len(edges) + len(new) > n:
            continue
        if any(min_obstacle_distance(Segment(*s), obstacles) < cost_cfg.buffer_distance
               for s in new):
            continue
        for s in new:
            edge_ids[s] = len(edges)
            edges.append(Segment(*s))
        ids = [edge_ids[s] for s in segs]
        links.add((ANCHOR, ids[0]))
        links.add((ids[-1], ANCHOR))
        links.update(zip(ids, ids[1:]))
        kept.append(CandidatePath(pts, []))
        if len(edges) == n:
            break
    if not edges:
        raise NoPathExists("no corridor path fits the qubit budget")
    costs = assign_costs(edges, obstacles, cost_cfg)
    mu = 2.0 * r if mu is None else float(mu)
    problem = _make_problem(costs, mu, sorted(links), hamiltonian, coupling)
    return Encoding("select", start, end, edges, costs, problem, r, kept)


def decode_select(enc: Encoding, samples, obstacles) -> tuple[list[Point], DecodedPath | None]:
    """Chain the best feasible sample; fall back to the shortest corridor path."""
    try:
        d = decode_path(enc.problem, samples, enc.edges, obstacles, enc.start, enc.end)
        return d.waypoints, d
    except NoFeasibleSample:
        return list(enc.candidates[0].waypoints), None
