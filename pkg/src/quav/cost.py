"""Per-edge cost assignment feeding the QAOA cost Hamiltonian.

Three cases per edge, in priority order:

* edge crosses an obstacle -> flat ``obstacle_penalty`` (1e6 by default);
* otherwise distance plus the proximity term ``lam * exp(-d_min / d_s)``;
* the first (start) edge additionally receives ``start_bias`` (-1e3).

The start bias is added on top of the ordinary cost rather than replacing
it, so the start edge keeps its obstacle information.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import EmptyPath
from .geo import ObstaclePolygon, Segment, min_obstacle_distance


@dataclass(frozen=True)
class CostConfig:
    obstacle_penalty: float = 1e6
    start_bias: float = -1e3
    buffer_distance: float = 5.0     # d_s, meters
    lam: float = 100.0
    smoothness_weight: float = 0.0

    def __post_init__(self):
        if not self.obstacle_penalty > 0:
            raise ValueError("obstacle_penalty must be > 0")
        if not self.buffer_distance > 0:
            raise ValueError("buffer_distance must be > 0")
        if self.lam < 0:
            raise ValueError("lam must be >= 0")


@dataclass
class CostVector:
    raw: np.ndarray
    normalized: np.ndarray
    scale: float
    # per-edge diagnostics, same order as ``raw``
    distances: np.ndarray = field(default_factory=lambda: np.zeros(0))
    intersects: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=bool))

    @property
    def n(self) -> int:
        return len(self.raw)

    def buffer_violations(self, d_s: float) -> np.ndarray:
        """Edges closer than ``d_s`` to an obstacle (intersections included)."""
        return self.distances < d_s

    @classmethod
    def from_raw(cls, raw, distances=None, intersects=None) -> "CostVector":
        raw = np.asarray(raw, dtype=float)
        if raw.size == 0:
            raise EmptyPath("cost vector needs at least one edge")
        scale = float(np.max(np.abs(raw)))
        if scale == 0.0:
            scale = 1.0
        if distances is None:
            distances = np.full(raw.size, np.inf)
        if intersects is None:
            intersects = np.zeros(raw.size, dtype=bool)
        return cls(raw, raw / scale, scale, np.asarray(distances, float),
                   np.asarray(intersects, bool))


def distance_cost(e: Segment) -> float:
    return e.length


def obstacle_penalty(e: Segment, obstacles: Sequence[ObstaclePolygon], cfg: CostConfig) -> float:
    d_min = min_obstacle_distance(e, obstacles)
    if d_min == 0.0:
        return cfg.obstacle_penalty
    if math.isinf(d_min):
        return 0.0
    return cfg.lam * math.exp(-d_min / cfg.buffer_distance)


def _turn(prev: Segment, cur: Segment) -> float:
    ax, ay = prev.b[0] - prev.a[0], prev.b[1] - prev.a[1]
    bx, by = cur.b[0] - cur.a[0], cur.b[1] - cur.a[1]
    return abs(math.atan2(ax * by - ay * bx, ax * bx + ay * by))


def assign_costs(edges, obstacles: Sequence[ObstaclePolygon], cfg: CostConfig | None = None,
                 ) -> CostVector:
    """Cost for every edge of a segmented path (or plain edge list).

    Edge 0 is the start segment.
    """
    cfg = cfg or CostConfig()
    edges = list(getattr(edges, "edges", edges))
    if not edges:
        raise EmptyPath("no edges to cost")
    raw = np.empty(len(edges))
    dists = np.empty(len(edges))
    hits = np.zeros(len(edges), dtype=bool)
    for i, e in enumerate(edges):
        d_min = min_obstacle_distance(e, obstacles)
        dists[i] = d_min
        if d_min == 0.0:
            hits[i] = True
            raw[i] = cfg.obstacle_penalty
            continue
        c = distance_cost(e)
        if not math.isinf(d_min):
            c += cfg.lam * math.exp(-d_min / cfg.buffer_distance)
        if cfg.smoothness_weight and i > 0 and edges[i - 1].b == e.a:
            c += cfg.smoothness_weight * _turn(edges[i - 1], e)
        if i == 0:
            c += cfg.start_bias
        raw[i] = c
    return CostVector.from_raw(raw, dists, hits)
