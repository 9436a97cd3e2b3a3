"""Regenerate the bundled scenario files.

Geometry is laid out in local UTM meters relative to an origin near
Guangzhou (zone 49) and written as lat/lon JSON.

    python3 tools/build_scenarios.py
"""
from __future__ import annotations

import json
from pathlib import Path

from quav.geo import GeoPoint, UtmPoint, project_to_utm, unproject_from_utm

ZONE = 49
ORIGIN = project_to_utm(GeoPoint(23.13, 113.26), ZONE).xy
OUT = Path(__file__).resolve().parents[1] / "src" / "quav" / "scenarios"


def rect(x0, y0, x1, y1):
    return [(x0, y0), (x1, y0), (x1, y1), (x0, y1)]


def ngon(cx, cy, r, k=6):
    import math
    return [(cx + r * math.cos(2 * math.pi * i / k), cy + r * math.sin(2 * math.pi * i / k))
            for i in range(k)]


SCENARIOS = {
    "single_block": {
        "description": "One building straddling the direct line.",
        "start": (0, 0), "end": (70, 0),
        "obstacles": {"block": rect(28, -10, 42, 12)},
    },
    "corridor": {
        "description": "Two staggered walls forcing an S-shaped route.",
        "start": (0, 0), "end": (80, 10),
        "obstacles": {"wall-south": rect(20, -32, 26, 8), "wall-north": rect(50, 2, 56, 42)},
    },
    "dense_cluster": {
        "description": "Cluster of small buildings with gaps wide enough for the buffer.",
        "start": (0, 0), "end": (75, 5),
        "obstacles": {
            "b1": rect(14, -6, 22, 4), "b2": ngon(38, 6, 5), "b3": rect(33, -24, 41, -14),
            "b4": rect(54, -2, 61, 9), "b5": ngon(52, 28, 4), "b6": rect(20, 18, 28, 26),
        },
    },
    "open_field": {
        "description": "Open field with a single tower just off the direct line.",
        "start": (0, 0), "end": (65, 20),
        "obstacles": {"tower": [(30, 5), (36, 5), (33, 9)]},
    },
    "l_shape": {
        "description": "Concave L-shaped building whose pocket faces the goal.",
        "start": (0, 0), "end": (70, -5),
        "obstacles": {"l-block": [(30, -12), (46, -12), (46, -6), (36, -6), (36, 9),
                                  (30, 9)]},
    },
    "diagonal_gap": {
        "description": "Diagonal route through a gap narrower than twice the buffer.",
        "start": (0, 0), "end": (55, 45),
        "obstacles": {"west": rect(14, 26, 26, 38), "east": rect(26, 8, 40, 19)},
    },
}


def to_geo(x, y):
    g = unproject_from_utm(UtmPoint(ORIGIN[0] + x, ORIGIN[1] + y, ZONE))
    return round(g.lat, 10), round(g.lon, 10)


def build(name, spec) -> dict:
    feats = []
    for oname, ring in spec["obstacles"].items():
        coords = [[to_geo(x, y)[1], to_geo(x, y)[0]] for x, y in ring]
        coords.append(coords[0])
        feats.append({"type": "Feature", "properties": {"name": oname},
                      "geometry": {"type": "Polygon", "coordinates": [coords]}})
    (slat, slon), (elat, elon) = to_geo(*spec["start"]), to_geo(*spec["end"])
    return {
        "name": name,
        "description": spec["description"],
        "start": {"lat": slat, "lon": slon},
        "end": {"lat": elat, "lon": elon},
        "utm_zone": ZONE,
        "obstacles": {"type": "FeatureCollection", "features": feats},
    }


def main() -> None:
    OUT.mkdir(parents=True, exist_ok=True)
    for name, spec in SCENARIOS.items():
        (OUT / f"{name}.json").write_text(json.dumps(build(name, spec), indent=2) + "\n")
        print("wrote", name)


if __name__ == "__main__":
    main()
