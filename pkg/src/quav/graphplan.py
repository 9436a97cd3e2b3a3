"""Grid discretisation, search graphs, candidate paths and straight-line segmentation."""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DegenerateStep, NoPathExists, ResolutionTooCoarse, ZeroDistance
from .geo import Point, Segment


@dataclass(frozen=True)
class Grid:
    """Regular lattice ``x0 + i*r, y0 + j*r``; node index is ``j*nx + i``."""

    origin: Point
    resolution: float
    nx: int
    ny: int

    def __post_init__(self):
        if self.resolution <= 0:
            raise ValueError("grid resolution must be positive")
        if self.nx < 2 or self.ny < 2:
            raise ValueError("grid needs at least 2 nodes per axis")

    @property
    def size(self) -> int:
        return self.nx * self.ny

    def node(self, idx: int) -> Point:
        j, i = divmod(idx, self.nx)
        return (self.origin[0] + i * self.resolution, self.origin[1] + j * self.resolution)

    def points(self) -> np.ndarray:
        i = np.arange(self.nx)
        j = np.arange(self.ny)
        xs = self.origin[0] + i * self.resolution
        ys = self.origin[1] + j * self.resolution
        X, Y = np.meshgrid(xs, ys)  # rows follow j
        return np.column_stack([X.ravel(), Y.ravel()])

    def snap(self, p: Point) -> int:
        """Nearest node; ties resolve to the lowest index."""
        fi = (p[0] - self.origin[0]) / self.resolution
        fj = (p[1] - self.origin[1]) / self.resolution
        best = None
        for j in (math.floor(fj), math.ceil(fj)):
            for i in (math.floor(fi), math.ceil(fi)):
                i_c = min(max(i, 0), self.nx - 1)
                j_c = min(max(j, 0), self.ny - 1)
                idx = j_c * self.nx + i_c
                x, y = self.node(idx)
                key = (math.hypot(x - p[0], y - p[1]), idx)
                if best is None or key < best:
                    best = key
        return best[1]


def build_grid(start: Point, end: Point, r: float, margin: float = 0.0) -> Grid:
    """Grid spanning the start/end bounding box grown by ``margin``.

    The origin sits at the lower-left corner of the grown box so the extreme
    coordinates fall on nodes.
    """
    if r <= 0:
        raise ValueError("resolution must be positive")
    if tuple(start) == tuple(end):
        raise ZeroDistance("start and end coincide")
    x0 = min(start[0], end[0]) - margin
    y0 = min(start[1], end[1]) - margin
    x1 = max(start[0], end[0]) + margin
    y1 = max(start[1], end[1]) + margin
    nx = max(2, int(math.ceil((x1 - x0) / r - 1e-9)) + 1)
    ny = max(2, int(math.ceil((y1 - y0) / r - 1e-9)) + 1)
    g = Grid((x0, y0), float(r), nx, ny)
    if g.size < 4 or g.snap(start) == g.snap(end):
        raise ResolutionTooCoarse(f"resolution {r} m cannot separate start and end")
    return g


@dataclass
class SearchGraph:
    nodes: np.ndarray                 # (V, 2) coordinates
    edges: np.ndarray                 # (E, 2) node-index pairs, i < j
    connectivity: str = "eight"
    _adj: list | None = field(default=None, repr=False, compare=False)

    @property
    def weights(self) -> np.ndarray:
        d = self.nodes[self.edges[:, 1]] - self.nodes[self.edges[:, 0]]
        return np.hypot(d[:, 0], d[:, 1])

    def adjacency(self) -> list[list[tuple[int, float]]]:
        if self._adj is None:
            adj: list[list[tuple[int, float]]] = [[] for _ in range(len(self.nodes))]
            for (u, v), w in zip(self.edges.tolist(), self.weights.tolist()):
                adj[u].append((v, w))
                adj[v].append((u, w))
            for lst in adj:
                lst.sort()
            self._adj = adj
        return self._adj

    def subgraph(self, keep: np.ndarray) -> tuple["SearchGraph", np.ndarray]:
        """Induced subgraph on nodes where ``keep`` is true.

        Returns the new graph and the old->new index map (-1 for dropped).
        """
        keep = np.asarray(keep, dtype=bool)
        remap = np.full(len(self.nodes), -1, dtype=int)
        remap[keep] = np.arange(int(keep.sum()))
        e = self.edges[keep[self.edges[:, 0]] & keep[self.edges[:, 1]]]
        return SearchGraph(self.nodes[keep], remap[e], self.connectivity), remap

    def with_extra(self, points: Sequence[Point], links: Sequence[tuple[int, int]]) -> "SearchGraph":
        """Copy with appended nodes and edges (indices refer to the enlarged node list)."""
        nodes = np.vstack([self.nodes, np.asarray(points, dtype=float).reshape(-1, 2)])
        extra = np.asarray(links, dtype=int).reshape(-1, 2)
        extra = np.sort(extra, axis=1)
        return SearchGraph(nodes, np.vstack([self.edges, extra]), self.connectivity)


_FOUR = ((1, 0), (0, 1))
_EIGHT = ((1, 0), (0, 1), (1, 1), (-1, 1))


def build_graph(g: Grid, connectivity: str = "eight") -> SearchGraph:
    if connectivity not in ("four", "eight"):
        raise ValueError("connectivity must be 'four' or 'eight'")
    offsets = _FOUR if connectivity == "four" else _EIGHT
    I, J = np.meshgrid(np.arange(g.nx), np.arange(g.ny))
    I = I.ravel()
    J = J.ravel()
    src = J * g.nx + I
    parts = []
    for di, dj in offsets:
        ok = (I + di >= 0) & (I + di < g.nx) & (J + dj < g.ny)
        dst = (J[ok] + dj) * g.nx + I[ok] + di
        parts.append(np.column_stack([src[ok], dst]))
    edges = np.sort(np.vstack(parts), axis=1)
    edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    return SearchGraph(g.points(), edges, connectivity)


# ---------------------------------------------------------------------------
# Path metrics

def path_length(waypoints) -> float:
    w = [(float(x), float(y)) for x, y in waypoints]
    if len(w) < 2:
        raise ValueError("path needs at least 2 waypoints")
    return math.fsum(math.hypot(b[0] - a[0], b[1] - a[1]) for a, b in zip(w, w[1:]))


def angular_deviation(waypoints) -> float:
    """Sum of absolute turn angles at interior waypoints, in radians."""
    w = np.asarray(waypoints, dtype=float)
    if len(w) < 3:
        return 0.0
    d = np.diff(w, axis=0)
    if np.any(np.hypot(d[:, 0], d[:, 1]) == 0.0):
        raise DegenerateStep("path has a zero-length step")
    cross = d[:-1, 0] * d[1:, 1] - d[:-1, 1] * d[1:, 0]
    dot = (d[:-1] * d[1:]).sum(axis=1)
    return float(np.abs(np.arctan2(cross, dot)).sum())


@dataclass
class CandidatePath:
    waypoints: list[Point]
    nodes: list[int] = field(default_factory=list)
    # exact length when known combinatorially (grid paths); overrides re-summation
    known_length: float | None = None

    @property
    def length(self) -> float:
        if self.known_length is not None:
            return self.known_length
        if len(self.waypoints) < 2:
            return 0.0
        return path_length(self.waypoints)

    @property
    def angular_deviation(self) -> float:
        return angular_deviation(self.waypoints)


def enumerate_candidate_paths(graph: SearchGraph, start: int, end: int,
                              max_paths: int = 10_000, monotone: bool = True,
                              max_expansions: int | None = None) -> list[CandidatePath]:
    """Simple start->end paths, shortest first.

    Best-first over partial paths with the straight-line remainder as a
    consistent heuristic, so complete paths come out in non-decreasing length.
    With ``monotone`` each step must not move backwards along the start->end
    axis.
    """
    _require_connected(graph, start, end)
    nodes = graph.nodes
    adj = graph.adjacency()
    axis = nodes[end] - nodes[start]
    axis = axis / np.hypot(*axis)
    proj = nodes @ axis
    goal = nodes[end]
    remaining = np.hypot(*(nodes - goal).T)
    budget = max_expansions if max_expansions is not None else 50 * max_paths + 1000

    out: list[tuple[float, tuple[int, ...]]] = []
    heap = [(remaining[start], 0.0, (start,))]
    pops = 0
    while heap and len(out) < max_paths and pops < budget:
        _, g, path = heapq.heappop(heap)
        pops += 1
        u = path[-1]
        if u == end:
            out.append((g, path))
            continue
        on_path = set(path)
        for v, w in adj[u]:
            if v in on_path:
                continue
            if monotone and proj[v] < proj[u] - 1e-9:
                continue
            g2 = g + w
            heapq.heappush(heap, (g2 + remaining[v], g2, path + (v,)))
    if not out:
        raise NoPathExists("no candidate path satisfies the constraints")
    out.sort(key=lambda t: (round(t[0], 9), t[1]))
    return [CandidatePath([tuple(nodes[i]) for i in p], list(p)) for _, p in out]


def _require_connected(graph: SearchGraph, start: int, end: int) -> None:
    adj = graph.adjacency()
    seen = {start}
    stack = [start]
    while stack:
        u = stack.pop()
        if u == end:
            return
        for v, _ in adj[u]:
            if v not in seen:
                seen.add(v)
                stack.append(v)
    raise NoPathExists(f"nodes {start} and {end} are disconnected")


# ---------------------------------------------------------------------------
# Segmentation

@dataclass
class SegmentedPath:
    waypoints: list[Point]
    edges: list[Segment]
    step: float

    @property
    def count(self) -> int:
        return len(self.edges)


def segment_straight_path(start: Point, end: Point, n: int) -> SegmentedPath:
    """Split the straight start->end line into ``n`` equal steps.

    Each waypoint advances by ``step`` along the direction toward ``end``
    recomputed from the current waypoint; the last one is pinned to ``end``.
    """
    if n < 1:
        raise ValueError("segment count must be >= 1")
    start = (float(start[0]), float(start[1]))
    end = (float(end[0]), float(end[1]))
    D = math.hypot(end[0] - start[0], end[1] - start[1])
    if D == 0.0:
        raise ZeroDistance("start and end coincide")
    step = D / n
    pts = [start]
    cur = start
    for _ in range(n - 1):
        dx, dy = end[0] - cur[0], end[1] - cur[1]
        d = math.hypot(dx, dy)
        cur = (cur[0] + dx / d * step, cur[1] + dy / d * step)
        pts.append(cur)
    pts.append(end)
    edges = [Segment(pts[i], pts[i + 1]) for i in range(n)]
    return SegmentedPath(pts, edges, step)
