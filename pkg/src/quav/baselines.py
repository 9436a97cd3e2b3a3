"""Classical comparison planners: grid A*, RRT, shortcut smoothing and a Dijkstra oracle."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EndInObstacle, MaxIterationsExceeded, NoPathExists, StartInObstacle
from .geo import ObstaclePolygon, Point, Segment, clearance, min_obstacle_distance, point_in_polygon
from .graphplan import CandidatePath, Grid, SearchGraph, build_graph, path_length

SQRT2 = math.sqrt(2.0)

Bounds = tuple[float, float, float, float]   # xmin, ymin, xmax, ymax


@dataclass(frozen=True)
class AStarConfig:
    resolution: float = 0.5
    heuristic: str = "euclidean"
    smoothing: float = 0.2
    clearance: float = 0.0        # nodes closer than this to an obstacle are removed

    def __post_init__(self):
        if not self.resolution > 0:
            raise ValueError("resolution must be > 0")
        if not 0.0 <= self.smoothing <= 1.0:
            raise ValueError("smoothing must lie in [0, 1]")
        if self.heuristic != "euclidean":
            raise ValueError("only the euclidean heuristic is supported")
        if self.clearance < 0:
            raise ValueError("clearance must be >= 0")


@dataclass(frozen=True)
class RrtConfig:
    step: float = 1.0
    max_iterations: int = 1000
    goal_bias: float = 0.05
    seed: int = 0
    clearance: float = 0.0

    def __post_init__(self):
        if not self.step > 0:
            raise ValueError("step must be > 0")
        if not 0.0 <= self.goal_bias <= 1.0:
            raise ValueError("goal_bias must lie in [0, 1]")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


def default_bounds(start: Point, end: Point, margin: float) -> Bounds:
    return (min(start[0], end[0]) - margin, min(start[1], end[1]) - margin,
            max(start[0], end[0]) + margin, max(start[1], end[1]) + margin)


def _check_endpoints(start: Point, end: Point, obstacles, margin: float) -> None:
    pts = np.array([start, end], dtype=float)
    c = clearance(pts, obstacles)
    if any(point_in_polygon(start, o) for o in obstacles) or c[0] < margin:
        raise StartInObstacle("start lies inside a (buffered) obstacle")
    if any(point_in_polygon(end, o) for o in obstacles) or c[1] < margin:
        raise EndInObstacle("end lies inside a (buffered) obstacle")


def _clear(a: Point, b: Point, obstacles, margin: float) -> bool:
    if a[0] == b[0] and a[1] == b[1]:
        return True
    d = min_obstacle_distance(Segment(a, b), obstacles)
    return d > 0.0 and d >= margin


# ---------------------------------------------------------------------------
# Planning grid shared by A* and the Dijkstra oracle

def planning_grid(start: Point, bounds: Bounds, resolution: float) -> Grid:
    """Grid covering ``bounds`` whose lattice passes exactly through ``start``."""
    xmin, ymin, xmax, ymax = bounds
    i0 = math.ceil((start[0] - xmin) / resolution - 1e-9)
    j0 = math.ceil((start[1] - ymin) / resolution - 1e-9)
    origin = (start[0] - i0 * resolution, start[1] - j0 * resolution)
    nx = int(math.floor((xmax - origin[0]) / resolution + 1e-9)) + 1
    ny = int(math.floor((ymax - origin[1]) / resolution + 1e-9)) + 1
    return Grid(origin, resolution, max(nx, 2), max(ny, 2))


def blocked_mask(grid: Grid, obstacles: Sequence[ObstaclePolygon], margin: float) -> np.ndarray:
    """True for nodes inside an obstacle or closer than ``margin`` to one."""
    c = clearance(grid.points(), obstacles)
    return (c == 0.0) | (c < margin)


def _needs_edge_check(resolution: float, margin: float) -> bool:
    # two nodes with clearance >= margin bound the clearance of a diagonal
    # edge below by margin - resolution / sqrt(2); grazing needs that <= 0
    return margin <= resolution / SQRT2


def _edge_provably_clear(cu: float, cv: float, length: float) -> bool:
    # clearance along a segment is at least (c_u + c_v - length) / 2
    return cu + cv > length


def grid_search_graph(grid: Grid, obstacles: Sequence[ObstaclePolygon], margin: float
                      ) -> tuple[SearchGraph, np.ndarray]:
    """Explicit 8-connected graph of free nodes (plus the old->new index map)."""
    graph = build_graph(grid, "eight")
    c = clearance(grid.points(), obstacles)
    blocked = (c == 0.0) | (c < margin)
    sub, remap = graph.subgraph(~blocked)
    if _needs_edge_check(grid.resolution, margin) and len(sub.edges):
        old = np.flatnonzero(~blocked)
        cs = c[old]
        w = sub.weights
        ok = np.ones(len(sub.edges), dtype=bool)
        for k in np.flatnonzero(cs[sub.edges[:, 0]] + cs[sub.edges[:, 1]] <= w):
            u, v = sub.edges[k]
            ok[k] = _clear(tuple(sub.nodes[u]), tuple(sub.nodes[v]), obstacles, 0.0)
        sub = SearchGraph(sub.nodes, sub.edges[ok], sub.connectivity)
    return sub, remap


def grid_path_length(grid: Grid, nodes: Sequence[int]) -> float:
    """Exact octile length ``r * (straight + diagonal * sqrt 2)`` of a grid node path."""
    straight = diagonal = 0
    for u, v in zip(nodes, nodes[1:]):
        ju, iu = divmod(u, grid.nx)
        jv, iv = divmod(v, grid.nx)
        if abs(iu - iv) + abs(ju - jv) == 1:
            straight += 1
        else:
            diagonal += 1
    return grid.resolution * (straight + diagonal * SQRT2)


# ---------------------------------------------------------------------------
# A*

_NEIGHBOURS = ((1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
               (1, 1, SQRT2), (-1, 1, SQRT2), (1, -1, SQRT2), (-1, -1, SQRT2))


def astar_search(grid: Grid, blocked: np.ndarray, start: int, goal: int,
                 obstacles: Sequence[ObstaclePolygon] = (), edge_check: bool = False,
                 node_clearance: np.ndarray | None = None) -> list[int]:
    """Shortest 8-connected node path; ties go to lower heuristic, then lower index.

    With ``edge_check`` each edge is also tested against ``obstacles`` unless
    the endpoint clearances already prove it clear.
    """
    if blocked[start] or blocked[goal]:
        raise NoPathExists("start or goal node is blocked")
    nx, ny, r = grid.nx, grid.ny, grid.resolution
    gy, gx = divmod(goal, nx)

    def h(idx: int) -> float:
        j, i = divmod(idx, nx)
        return r * math.hypot(i - gx, j - gy)

    g = {start: 0.0}
    parent = {start: -1}
    closed = set()
    heap = [(h(start), h(start), start)]
    edge_ok: dict[tuple[int, int], bool] = {}
    while heap:
        f, hu, u = heapq.heappop(heap)
        if u in closed:
            continue
        if u == goal:
            path = [u]
            while parent[path[-1]] != -1:
                path.append(parent[path[-1]])
            return path[::-1]
        closed.add(u)
        ju, iu = divmod(u, nx)
        gu = g[u]
        for di, dj, w in _NEIGHBOURS:
            i, j = iu + di, ju + dj
            if not (0 <= i < nx and 0 <= j < ny):
                continue
            v = j * nx + i
            if blocked[v] or v in closed:
                continue
            if edge_check and not (node_clearance is not None and _edge_provably_clear(
                    node_clearance[u], node_clearance[v], w * r)):
                key = (min(u, v), max(u, v))
                if key not in edge_ok:
                    edge_ok[key] = _clear(grid.node(u), grid.node(v), obstacles, 0.0)
                if not edge_ok[key]:
                    continue
            gv = gu + w * r
            if gv < g.get(v, math.inf):
                g[v] = gv
                parent[v] = u
                hv = h(v)
                heapq.heappush(heap, (gv + hv, hv, v))
    raise NoPathExists("goal unreachable on the planning grid")


def _free_node_near(grid: Grid, blocked: np.ndarray, p: Point, obstacles, margin: float) -> int:
    """Nearest free node that sees ``p`` along a clear segment."""
    fi = (p[0] - grid.origin[0]) / grid.resolution
    fj = (p[1] - grid.origin[1]) / grid.resolution
    cands = []
    for dj in range(-2, 3):
        for di in range(-2, 3):
            i, j = int(math.floor(fi)) + di, int(math.floor(fj)) + dj
            if 0 <= i < grid.nx and 0 <= j < grid.ny:
                idx = j * grid.nx + i
                x, y = grid.node(idx)
                cands.append((math.hypot(x - p[0], y - p[1]), idx))
    for _, idx in sorted(cands):
        if not blocked[idx] and _clear(grid.node(idx), p, obstacles, min(margin, 1e-12)):
            return idx
    raise NoPathExists("no free grid node near the endpoint")


def astar_grid_path(start: Point, end: Point, obstacles: Sequence[ObstaclePolygon],
                    cfg: AStarConfig = AStarConfig(), bounds: Bounds | None = None,
                    ) -> tuple[CandidatePath, Grid]:
    """Unsmoothed A* node path from ``start`` to the free node nearest ``end``."""
    start = (float(start[0]), float(start[1]))
    end = (float(end[0]), float(end[1]))
    _check_endpoints(start, end, obstacles, cfg.clearance)
    if bounds is None:
        bounds = default_bounds(start, end, 20.0)
    grid = planning_grid(start, bounds, cfg.resolution)
    c = clearance(grid.points(), obstacles)
    blocked = (c == 0.0) | (c < cfg.clearance)
    s = grid.snap(start)
    goal = _free_node_near(grid, blocked, end, obstacles, cfg.clearance)
    nodes = astar_search(grid, blocked, s, goal, obstacles,
                         _needs_edge_check(cfg.resolution, cfg.clearance), c)
    return CandidatePath([grid.node(i) for i in nodes], nodes,
                         grid_path_length(grid, nodes)), grid


def astar_plan(start: Point, end: Point, obstacles: Sequence[ObstaclePolygon],
               cfg: AStarConfig = AStarConfig(), bounds: Bounds | None = None) -> CandidatePath:
    """Grid-optimal A* path, extended to the exact end point, then smoothed."""
    raw, _ = astar_grid_path(start, end, obstacles, cfg, bounds)
    pts = list(raw.waypoints)
    end = (float(end[0]), float(end[1]))
    if pts[-1] != end:
        pts.append(end)
    pts = _drop_collinear(pts)
    path = CandidatePath(pts, raw.nodes)
    if cfg.smoothing > 0:
        path = smooth_path(path, obstacles, cfg.smoothing, margin=cfg.clearance)
    return path


def _drop_collinear(pts: list[Point]) -> list[Point]:
    out = [pts[0]]
    for k in range(1, len(pts) - 1):
        a, b, c = out[-1], pts[k], pts[k + 1]
        cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0])
        if abs(cross) > 1e-12:
            out.append(b)
    out.append(pts[-1])
    return out


# ---------------------------------------------------------------------------
# Smoothing

def smooth_path(p: CandidatePath, obstacles: Sequence[ObstaclePolygon], factor: float = 0.2,
                passes: int = 10, margin: float = 0.0) -> CandidatePath:
    """Shortcut plus pull-toward-chord smoothing.

    Each pass first drops waypoints whose neighbours see each other along a
    clear segment, then moves every interior waypoint ``factor`` of the way
    toward the midpoint of its neighbours.  A move is kept only when both
    adjacent segments stay clear and the local length does not grow, so the
    result is never longer than the input and stays collision-free.
    """
    pts = [(float(x), float(y)) for x, y in p.waypoints]
    if len(pts) < 3:
        return CandidatePath(pts, list(p.nodes))

    def ok(a, b):
        return _clear(a, b, obstacles, margin)

    def seg(a, b):
        return math.hypot(b[0] - a[0], b[1] - a[1])

    for _ in range(passes):
        i = 0
        while i < len(pts) - 2:
            if ok(pts[i], pts[i + 2]):
                del pts[i + 1]
            else:
                i += 1
        for j in range(1, len(pts) - 1):
            a, b, c = pts[j - 1], pts[j], pts[j + 1]
            mid = ((a[0] + c[0]) / 2, (a[1] + c[1]) / 2)
            nb = (b[0] + factor * (mid[0] - b[0]), b[1] + factor * (mid[1] - b[1]))
            if nb == b or nb == a or nb == c:
                continue
            if seg(a, nb) + seg(nb, c) <= seg(a, b) + seg(b, c) and ok(a, nb) and ok(nb, c):
                pts[j] = nb
    return CandidatePath(pts, [])


# ---------------------------------------------------------------------------
# Dijkstra oracle

def dijkstra_oracle(graph: SearchGraph, start: int, end: int) -> CandidatePath:
    """Exact shortest path on an explicit weighted graph."""
    n = len(graph.nodes)
    if not (0 <= start < n and 0 <= end < n):
        raise NoPathExists("start or end is not a graph node")
    adj = graph.adjacency()
    dist = [math.inf] * n
    prev = [-1] * n
    dist[start] = 0.0
    heap = [(0.0, start)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        if u == end:
            break
        for v, w in adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if math.isinf(dist[end]):
        raise NoPathExists(f"node {end} unreachable from {start}")
    path = [end]
    while path[-1] != start:
        path.append(prev[path[-1]])
    path.reverse()
    return CandidatePath([tuple(graph.nodes[i]) for i in path], path)


# ---------------------------------------------------------------------------
# RRT

@dataclass
class RrtTree:
    nodes: np.ndarray       # (m, 2)
    parents: np.ndarray     # (m,), -1 for the root
    path: CandidatePath


def rrt_tree(start: Point, end: Point, obstacles: Sequence[ObstaclePolygon],
             cfg: RrtConfig = RrtConfig(), bounds: Bounds | None = None) -> RrtTree:
    start = (float(start[0]), float(start[1]))
    end = (float(end[0]), float(end[1]))
    _check_endpoints(start, end, obstacles, cfg.clearance)
    if bounds is None:
        bounds = default_bounds(start, end, 20.0)
    xmin, ymin, xmax, ymax = bounds
    rng = np.random.default_rng(cfg.seed)
    cap = cfg.max_iterations + 2
    nodes = np.empty((cap, 2))
    parents = np.full(cap, -1, dtype=int)
    nodes[0] = start
    m = 1

    def finish(last: int) -> RrtTree:
        chain = [last]
        while parents[chain[-1]] != -1:
            chain.append(int(parents[chain[-1]]))
        chain.reverse()
        pts = [tuple(map(float, nodes[i])) for i in chain]
        return RrtTree(nodes[:m].copy(), parents[:m].copy(), CandidatePath(pts, chain))

    if _clear(start, end, obstacles, cfg.clearance) and math.dist(start, end) <= cfg.step:
        nodes[1] = end
        parents[1] = 0
        m = 2
        return finish(1)
    for _ in range(cfg.max_iterations):
        if rng.random() < cfg.goal_bias:
            q = end
        else:
            q = (float(rng.uniform(xmin, xmax)), float(rng.uniform(ymin, ymax)))
        d2 = (nodes[:m, 0] - q[0]) ** 2 + (nodes[:m, 1] - q[1]) ** 2
        near = int(np.argmin(d2))
        dist = math.sqrt(float(d2[near]))
        if dist == 0.0:
            continue
        base = (float(nodes[near, 0]), float(nodes[near, 1]))
        if dist <= cfg.step:
            new = q
        else:
            t = cfg.step / dist
            new = (base[0] + (q[0] - base[0]) * t, base[1] + (q[1] - base[1]) * t)
        if not _clear(base, new, obstacles, cfg.clearance):
            continue
        nodes[m] = new
        parents[m] = near
        m += 1
        if new == end:
            return finish(m - 1)
        if math.dist(new, end) <= cfg.step and _clear(new, end, obstacles, cfg.clearance):
            nodes[m] = end
            parents[m] = m - 1
            m += 1
            return finish(m - 1)
    raise MaxIterationsExceeded(f"no path after {cfg.max_iterations} iterations")


def rrt_plan(start: Point, end: Point, obstacles: Sequence[ObstaclePolygon],
             cfg: RrtConfig = RrtConfig(), bounds: Bounds | None = None) -> CandidatePath:
    """Plain RRT path (no smoothing); deterministic for a given ``cfg.seed``."""
    return rrt_tree(start, end, obstacles, cfg, bounds).path


__all__ = [
    "AStarConfig", "RrtConfig", "RrtTree", "astar_plan", "astar_grid_path", "astar_search",
    "rrt_plan", "rrt_tree", "smooth_path", "dijkstra_oracle", "planning_grid", "blocked_mask",
    "grid_search_graph", "grid_path_length", "default_bounds", "path_length",
]
