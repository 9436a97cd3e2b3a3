"""GeoJSON export of planned paths and its inverse."""
from __future__ import annotations

import json
from pathlib import Path

from ..geo import UtmPoint, unproject_from_utm
from .pipeline import PlanResult
from .scenario import Scenario


def _ring_lonlat(poly, zone: int) -> list[list[float]]:
    ring = []
    for x, y in poly.vertices:
        g = unproject_from_utm(UtmPoint(x, y, zone))
        ring.append([g.lon, g.lat])
    ring.append(ring[0])
    return ring


def result_to_geojson(r: PlanResult, s: Scenario | None = None) -> dict:
    if len(r.latlon) < 2:
        raise ValueError("a path needs at least 2 waypoints to export")
    feats = [{
        "type": "Feature",
        "properties": {"kind": "path", "planner": r.planner, "scenario": r.scenario,
                       "seed": r.seed, "length_m": r.length, "feasible": r.feasible,
                       "buffer_violations": r.buffer_violations},
        "geometry": {"type": "LineString",
                     "coordinates": [[lon, lat] for lat, lon in r.latlon]},
    }]
    if s is not None:
        for o in s.obstacles:
            feats.append({
                "type": "Feature",
                "properties": {"kind": "obstacle", "name": o.name},
                "geometry": {"type": "Polygon", "coordinates": [_ring_lonlat(o, s.utm_zone)]},
            })
    return {"type": "FeatureCollection", "features": feats}


def emit_geojson(r: PlanResult, path, s: Scenario | None = None) -> None:
    Path(path).write_text(json.dumps(result_to_geojson(r, s), indent=1) + "\n")


def load_geojson_path(path) -> list[tuple[float, float]]:
    """Waypoints ``(lat, lon)`` of the first LineString feature."""
    data = json.loads(Path(path).read_text())
    for f in data.get("features", []):
        g = f.get("geometry") or {}
        if g.get("type") == "LineString":
            return [(float(lat), float(lon)) for lon, lat, *_ in g["coordinates"]]
    raise ValueError(f"{path} holds no LineString feature")
