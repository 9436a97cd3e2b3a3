"""Scenario files: JSON with lat/lon endpoints and GeoJSON obstacle polygons."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from importlib import resources
from pathlib import Path
from typing import Any

import numpy as np

from ..baselines import Bounds
from ..cost import CostConfig
from ..errors import DegeneratePolygon, OutOfBounds, ScenarioParseError, ScenarioValidationError
from ..geo import (GeoPoint, ObstaclePolygon, Point, UtmPoint, buffer_obstacle, clearance,
                   point_in_polygon, project_to_utm, unproject_from_utm)
from ..qsim import MAX_QUBITS


@dataclass(frozen=True)
class QaoaSettings:
    qubits: int = 20
    layers: int = 5
    steps: int = 60
    lr: float = 0.1
    shots: int | None = None          # None: exact expectation during optimisation
    decode_shots: int = 1024
    seed: int = 0
    encoding: str = "segment"         # or "select"
    hamiltonian: str = "selection"    # or "literal"
    discontinuity_penalty: float | None = None   # meters; default 2 * step
    coupling: float = 0.5             # literal mode only
    select_resolution_m: float | None = None


@dataclass(frozen=True)
class AStarSettings:
    resolution: float = 0.5
    smoothing: float = 0.2


@dataclass(frozen=True)
class RrtSettings:
    step: float = 1.0
    max_iterations: int = 1000
    goal_bias: float = 0.05


@dataclass(frozen=True)
class PlanningSettings:
    margin_m: float = 25.0
    repair_resolution_m: float = 1.0
    astar: AStarSettings = AStarSettings()
    rrt: RrtSettings = RrtSettings()


@dataclass
class Scenario:
    name: str
    start: GeoPoint
    end: GeoPoint
    obstacles: list[ObstaclePolygon]          # UTM, scale-buffered
    utm_zone: int = 49
    cost: CostConfig = field(default_factory=CostConfig)
    qaoa: QaoaSettings = field(default_factory=QaoaSettings)
    planning: PlanningSettings = field(default_factory=PlanningSettings)
    obstacle_scale: tuple[float, float] = (1.0, 1.0)
    source: dict = field(default_factory=dict, repr=False)

    @property
    def start_xy(self) -> Point:
        return project_to_utm(self.start, self.utm_zone).xy

    @property
    def end_xy(self) -> Point:
        return project_to_utm(self.end, self.utm_zone).xy

    @property
    def bounds(self) -> Bounds:
        (x0, y0), (x1, y1) = self.start_xy, self.end_xy
        m = self.planning.margin_m
        return (min(x0, x1) - m, min(y0, y1) - m, max(x0, x1) + m, max(y0, y1) + m)

    @property
    def distance(self) -> float:
        return math.dist(self.start_xy, self.end_xy)

    def to_latlon(self, pts) -> list[GeoPoint]:
        return [unproject_from_utm(UtmPoint(float(x), float(y), self.utm_zone)) for x, y in pts]

    def with_seed(self, seed: int) -> "Scenario":
        return replace(self, qaoa=replace(self.qaoa, seed=int(seed)))

    def with_qaoa(self, **kw) -> "Scenario":
        return replace(self, qaoa=replace(self.qaoa, **kw))

    def with_cost(self, **kw) -> "Scenario":
        return replace(self, cost=replace(self.cost, **kw))


_TOP_KEYS = {"name", "start", "end", "utm_zone", "obstacles", "obstacle_scale", "cost", "qaoa",
             "planning", "description"}


def _reject_unknown(d: dict, allowed, where: str) -> None:
    extra = sorted(set(d) - set(allowed))
    if extra:
        raise ScenarioParseError(f"unknown key(s) in {where}: {', '.join(extra)}")


def _section(cls, d: Any, where: str, nested: dict | None = None):
    if d is None:
        return cls()
    if not isinstance(d, dict):
        raise ScenarioParseError(f"{where} must be an object")
    names = {f.name for f in fields(cls)}
    _reject_unknown(d, names, where)
    kw = dict(d)
    for key, sub in (nested or {}).items():
        if key in kw:
            kw[key] = _section(sub, kw[key], f"{where}.{key}")
    try:
        return cls(**kw)
    except (TypeError, ValueError) as e:
        raise ScenarioValidationError(f"{where}: {e}") from e


def _geopoint(d: Any, where: str) -> GeoPoint:
    if not isinstance(d, dict):
        raise ScenarioParseError(f"{where} must be an object with lat and lon")
    _reject_unknown(d, {"lat", "lon"}, where)
    try:
        return GeoPoint(float(d["lat"]), float(d["lon"]))
    except KeyError as e:
        raise ScenarioParseError(f"{where} is missing {e.args[0]}") from e
    except (TypeError, ValueError, OutOfBounds) as e:
        raise ScenarioValidationError(f"{where}: {e}") from e


def _obstacles(fc: Any, zone: int, scale) -> list[ObstaclePolygon]:
    if fc is None:
        return []
    if not isinstance(fc, dict) or fc.get("type") != "FeatureCollection":
        raise ScenarioParseError("obstacles must be a GeoJSON FeatureCollection")
    out = []
    for k, feat in enumerate(fc.get("features", [])):
        geom = (feat or {}).get("geometry") or {}
        if geom.get("type") != "Polygon":
            raise ScenarioParseError(f"obstacles.features[{k}] is not a Polygon")
        ring = geom["coordinates"][0]
        name = ((feat.get("properties") or {}).get("name")) or f"obstacle-{k}"
        try:
            pts = [project_to_utm(GeoPoint(float(lat), float(lon)), zone).xy
                   for lon, lat, *_ in ring]
            poly = ObstaclePolygon(tuple(pts), name=name)
            if scale != (1.0, 1.0):
                poly = buffer_obstacle(poly, *scale)
        except (DegeneratePolygon, OutOfBounds, ValueError) as e:
            raise ScenarioValidationError(f"obstacles.features[{k}]: {e}") from e
        out.append(poly)
    return out


def parse_scenario(text: str, default_name: str = "scenario") -> Scenario:
    """Parse and validate scenario JSON text."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ScenarioParseError(f"line {e.lineno}, column {e.colno}: {e.msg}") from e
    if not isinstance(data, dict):
        raise ScenarioParseError("scenario must be a JSON object")
    _reject_unknown(data, _TOP_KEYS, "scenario")
    for key in ("start", "end"):
        if key not in data:
            raise ScenarioParseError(f"missing required key {key!r}")
    zone = data.get("utm_zone", 49)
    if not isinstance(zone, int) or not 1 <= zone <= 60:
        raise ScenarioValidationError("utm_zone must be an integer in 1..60")
    scale = data.get("obstacle_scale", [1.0, 1.0])
    try:
        scale = (float(scale[0]), float(scale[1]))
    except (TypeError, ValueError, IndexError) as e:
        raise ScenarioParseError("obstacle_scale must be [sx, sy]") from e
    if scale[0] < 1.0 or scale[1] < 1.0:
        raise ScenarioValidationError("obstacle_scale factors must be >= 1")
    s = Scenario(
        name=str(data.get("name", default_name)),
        start=_geopoint(data["start"], "start"),
        end=_geopoint(data["end"], "end"),
        obstacles=_obstacles(data.get("obstacles"), zone, scale),
        utm_zone=zone,
        cost=_section(CostConfig, data.get("cost"), "cost"),
        qaoa=_section(QaoaSettings, data.get("qaoa"), "qaoa"),
        planning=_section(PlanningSettings, data.get("planning"), "planning",
                          {"astar": AStarSettings, "rrt": RrtSettings}),
        obstacle_scale=scale,
        source=data,
    )
    validate_scenario(s)
    return s


def validate_scenario(s: Scenario) -> None:
    q = s.qaoa
    if not 1 <= q.qubits <= MAX_QUBITS:
        raise ScenarioValidationError(f"qubits must lie in 1..{MAX_QUBITS}")
    if q.layers < 1 or q.steps < 1:
        raise ScenarioValidationError("layers and steps must be >= 1")
    if not q.lr > 0:
        raise ScenarioValidationError("lr must be > 0")
    if q.shots is not None and q.shots < 1:
        raise ScenarioValidationError("shots must be >= 1")
    if q.encoding not in ("segment", "select"):
        raise ScenarioValidationError(f"unknown encoding {q.encoding!r}")
    if q.hamiltonian not in ("selection", "literal"):
        raise ScenarioValidationError(f"unknown hamiltonian {q.hamiltonian!r}")
    if s.planning.margin_m < 0 or s.planning.repair_resolution_m <= 0:
        raise ScenarioValidationError("planning margin must be >= 0 and resolution > 0")
    a, b = s.start_xy, s.end_xy
    if a == b:
        raise ScenarioValidationError("start and end coincide")
    c = clearance(np.array([a, b]), s.obstacles) if s.obstacles else np.full(2, np.inf)
    d_s = s.cost.buffer_distance
    for label, p, ci in (("start", a, c[0]), ("end", b, c[1])):
        if any(point_in_polygon(p, o) for o in s.obstacles) or ci < d_s:
            raise ScenarioValidationError(f"{label} in obstacle")


def load_scenario(path) -> Scenario:
    """Read a scenario file, or a bundled scenario by name."""
    p = Path(path)
    if not p.exists() and p.suffix == "":
        bundled = resources.files("quav") / "scenarios" / f"{path}.json"
        if bundled.is_file():
            return parse_scenario(bundled.read_text(), str(path))
    try:
        text = p.read_text()
    except OSError as e:
        raise ScenarioParseError(f"cannot read {path}: {e}") from e
    return parse_scenario(text, p.stem)


def bundled_scenarios() -> list[str]:
    root = resources.files("quav") / "scenarios"
    return sorted(f.name[:-5] for f in root.iterdir() if f.name.endswith(".json"))


def scenario_to_json(s: Scenario) -> dict:
    """Inverse of :func:`parse_scenario` for programmatically built scenarios."""
    return dict(s.source)
