"""Geodetic projection and planar polygon geometry.

All planning happens in UTM meters.  Points inside this module are plain
``(x, y)`` float pairs (easting, northing); the :class:`UtmPoint` and
:class:`GeoPoint` records only appear at the projection boundary.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DegeneratePolygon, OutOfBounds, ZoneMismatch

Point = tuple[float, float]

# WGS84
WGS84_A = 6378137.0
WGS84_F = 1.0 / 298.257223563
UTM_K0 = 0.9996
FALSE_EASTING = 500000.0
FALSE_NORTHING_SOUTH = 10000000.0


@dataclass(frozen=True)
class GeoPoint:
    lat: float
    lon: float

    def __post_init__(self):
        if not (math.isfinite(self.lat) and math.isfinite(self.lon)):
            raise OutOfBounds(f"non-finite coordinate ({self.lat}, {self.lon})")
        if not -90.0 <= self.lat <= 90.0:
            raise OutOfBounds(f"latitude {self.lat} outside [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise OutOfBounds(f"longitude {self.lon} outside [-180, 180]")


@dataclass(frozen=True)
class UtmPoint:
    easting: float
    northing: float
    zone: int
    hemisphere: str = "north"

    @property
    def xy(self) -> Point:
        return (self.easting, self.northing)


# ---------------------------------------------------------------------------
# Transverse Mercator, 6th-order Krueger series

def _krueger_coefficients():
    n = WGS84_F / (2.0 - WGS84_F)
    n2, n3, n4, n5, n6 = n**2, n**3, n**4, n**5, n**6
    A = WGS84_A / (1.0 + n) * (1.0 + n2 / 4.0 + n4 / 64.0 + n6 / 256.0)
    alpha = (
        n / 2 - 2 * n2 / 3 + 5 * n3 / 16 + 41 * n4 / 180 - 127 * n5 / 288 + 7891 * n6 / 37800,
        13 * n2 / 48 - 3 * n3 / 5 + 557 * n4 / 1440 + 281 * n5 / 630 - 1983433 * n6 / 1935360,
        61 * n3 / 240 - 103 * n4 / 140 + 15061 * n5 / 26880 + 167603 * n6 / 181440,
        49561 * n4 / 161280 - 179 * n5 / 168 + 6601661 * n6 / 7257600,
        34729 * n5 / 80640 - 3418889 * n6 / 1995840,
        212378941 * n6 / 319334400,
    )
    beta = (
        n / 2 - 2 * n2 / 3 + 37 * n3 / 96 - n4 / 360 - 81 * n5 / 512 + 96199 * n6 / 604800,
        n2 / 48 + n3 / 15 - 437 * n4 / 1440 + 46 * n5 / 105 - 1118711 * n6 / 3870720,
        17 * n3 / 480 - 37 * n4 / 840 - 209 * n5 / 4480 + 5569 * n6 / 90720,
        4397 * n4 / 161280 - 11 * n5 / 504 - 830251 * n6 / 7257600,
        4583 * n5 / 161280 - 108847 * n6 / 3991680,
        20648693 * n6 / 638668800,
    )
    return A, alpha, beta


_A, _ALPHA, _BETA = _krueger_coefficients()
_E = math.sqrt(WGS84_F * (2.0 - WGS84_F))


def central_meridian(zone: int) -> float:
    return -183.0 + 6.0 * zone


def utm_zone_for(lon: float) -> int:
    return int(min(max((lon + 180.0) // 6.0 + 1, 1), 60))


def project_to_utm(p: GeoPoint, zone: int) -> UtmPoint:
    """Project a WGS84 point onto the given UTM zone."""
    if not isinstance(zone, int) or not 1 <= zone <= 60:
        raise OutOfBounds(f"UTM zone {zone!r} outside 1..60")
    dlon = (p.lon - central_meridian(zone) + 180.0) % 360.0 - 180.0
    if abs(dlon) > 18.0:
        warnings.warn(
            f"longitude {p.lon} is {abs(dlon):.1f} deg from zone {zone} central meridian",
            ZoneMismatch, stacklevel=2)
    if abs(p.lat) == 90.0:
        raise OutOfBounds("UTM is undefined at the poles")

    phi = math.radians(p.lat)
    lam = math.radians(dlon)
    t = math.sinh(math.atanh(math.sin(phi)) - _E * math.atanh(_E * math.sin(phi)))
    xi_p = math.atan2(t, math.cos(lam))
    eta_p = math.atanh(math.sin(lam) / math.sqrt(1.0 + t * t))
    xi, eta = xi_p, eta_p
    for j, a in enumerate(_ALPHA, start=1):
        xi += a * math.sin(2 * j * xi_p) * math.cosh(2 * j * eta_p)
        eta += a * math.cos(2 * j * xi_p) * math.sinh(2 * j * eta_p)

    easting = FALSE_EASTING + UTM_K0 * _A * eta
    northing = UTM_K0 * _A * xi
    hemisphere = "north"
    if p.lat < 0:
        northing += FALSE_NORTHING_SOUTH
        hemisphere = "south"
    return UtmPoint(easting, northing, zone, hemisphere)


def unproject_from_utm(p: UtmPoint) -> GeoPoint:
    """Inverse of :func:`project_to_utm`."""
    if not (math.isfinite(p.easting) and math.isfinite(p.northing)):
        raise OutOfBounds("non-finite UTM coordinate")
    if not 1 <= p.zone <= 60:
        raise OutOfBounds(f"UTM zone {p.zone!r} outside 1..60")
    if not 0.0 <= p.easting <= 1_000_000.0 or not 0.0 <= p.northing <= FALSE_NORTHING_SOUTH:
        raise OutOfBounds(f"unphysical UTM coordinate ({p.easting}, {p.northing})")
    if p.hemisphere not in ("north", "south"):
        raise OutOfBounds(f"unknown hemisphere {p.hemisphere!r}")

    northing = p.northing - (FALSE_NORTHING_SOUTH if p.hemisphere == "south" else 0.0)
    xi = northing / (UTM_K0 * _A)
    eta = (p.easting - FALSE_EASTING) / (UTM_K0 * _A)
    xi_p, eta_p = xi, eta
    for j, b in enumerate(_BETA, start=1):
        xi_p -= b * math.sin(2 * j * xi) * math.cosh(2 * j * eta)
        eta_p -= b * math.cos(2 * j * xi) * math.sinh(2 * j * eta)

    tau_p = math.sin(xi_p) / math.hypot(math.sinh(eta_p), math.cos(xi_p))
    lam = math.atan2(math.sinh(eta_p), math.cos(xi_p))

    # Newton on tau = tan(phi) given the conformal tau'
    tau = tau_p
    for _ in range(8):
        sig = math.sinh(_E * math.atanh(_E * tau / math.sqrt(1.0 + tau * tau)))
        tau_i = tau * math.sqrt(1.0 + sig * sig) - sig * math.sqrt(1.0 + tau * tau)
        dtau = ((tau_p - tau_i) / math.sqrt(1.0 + tau_i * tau_i)
                * (1.0 + (1.0 - _E * _E) * tau * tau)
                / ((1.0 - _E * _E) * math.sqrt(1.0 + tau * tau)))
        tau += dtau
        if abs(dtau) < 1e-15:
            break

    lat = math.degrees(math.atan(tau))
    lon = central_meridian(p.zone) + math.degrees(lam)
    lon = (lon + 180.0) % 360.0 - 180.0
    return GeoPoint(lat, lon)


# ---------------------------------------------------------------------------
# Polygons and segments

@dataclass(frozen=True)
class Segment:
    a: Point
    b: Point

    def __post_init__(self):
        object.__setattr__(self, "a", (float(self.a[0]), float(self.a[1])))
        object.__setattr__(self, "b", (float(self.b[0]), float(self.b[1])))
        if self.a == self.b:
            raise ValueError("segment endpoints coincide")

    @property
    def length(self) -> float:
        return math.hypot(self.b[0] - self.a[0], self.b[1] - self.a[1])

    def reversed(self) -> "Segment":
        return Segment(self.b, self.a)


@dataclass(frozen=True)
class ObstaclePolygon:
    """Simple polygon in UTM meters; the closing vertex is implicit."""

    vertices: tuple[Point, ...]
    scale: tuple[float, float] = (1.0, 1.0)
    name: str = field(default="", compare=False)

    def __post_init__(self):
        verts = [(float(x), float(y)) for x, y in self.vertices]
        if len(verts) > 1 and verts[0] == verts[-1]:
            verts = verts[:-1]
        if len(verts) < 3:
            raise DegeneratePolygon("polygon needs at least 3 distinct vertices")
        object.__setattr__(self, "vertices", tuple(verts))
        if signed_area(verts) == 0.0:
            raise DegeneratePolygon("polygon has zero area")
        if not _is_simple(verts):
            raise DegeneratePolygon("polygon ring self-intersects")
        xs = [v[0] for v in verts]
        ys = [v[1] for v in verts]
        object.__setattr__(self, "_bounds", (min(xs), min(ys), max(xs), max(ys)))

    @property
    def coords(self) -> np.ndarray:
        return np.asarray(self.vertices, dtype=float)

    def edges(self) -> Iterable[tuple[Point, Point]]:
        v = self.vertices
        for i in range(len(v)):
            yield v[i], v[(i + 1) % len(v)]

    @property
    def area(self) -> float:
        return abs(signed_area(self.vertices))

    @property
    def centroid(self) -> Point:
        return polygon_centroid(self.vertices)

    def bounds(self) -> tuple[float, float, float, float]:
        return self._bounds


def signed_area(verts: Sequence[Point]) -> float:
    s = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        s += x0 * y1 - x1 * y0
    return 0.5 * s


def polygon_centroid(verts: Sequence[Point]) -> Point:
    a = signed_area(verts)
    if a == 0.0:
        raise DegeneratePolygon("centroid of zero-area polygon")
    cx = cy = 0.0
    n = len(verts)
    for i in range(n):
        x0, y0 = verts[i]
        x1, y1 = verts[(i + 1) % n]
        w = x0 * y1 - x1 * y0
        cx += (x0 + x1) * w
        cy += (y0 + y1) * w
    return (cx / (6.0 * a), cy / (6.0 * a))


def _orient(a: Point, b: Point, c: Point) -> int:
    """Sign of the cross product (b - a) x (c - a), exact near zero."""
    det = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
    mag = (abs(b[0] - a[0]) + abs(c[0] - a[0])) * (abs(b[1] - a[1]) + abs(c[1] - a[1]))
    if abs(det) > 1e-12 * mag:
        return 1 if det > 0 else -1
    fa = [Fraction(v) for v in a]
    fb = [Fraction(v) for v in b]
    fc = [Fraction(v) for v in c]
    d = (fb[0] - fa[0]) * (fc[1] - fa[1]) - (fb[1] - fa[1]) * (fc[0] - fa[0])
    return (d > 0) - (d < 0)


def _on_segment(p: Point, a: Point, b: Point) -> bool:
    # assumes collinearity already established
    return (min(a[0], b[0]) <= p[0] <= max(a[0], b[0])
            and min(a[1], b[1]) <= p[1] <= max(a[1], b[1]))


def segments_intersect(p1: Point, p2: Point, q1: Point, q2: Point) -> bool:
    """Closed-segment intersection test (touching and collinear overlap count)."""
    if (max(p1[0], p2[0]) < min(q1[0], q2[0]) or max(q1[0], q2[0]) < min(p1[0], p2[0])
            or max(p1[1], p2[1]) < min(q1[1], q2[1]) or max(q1[1], q2[1]) < min(p1[1], p2[1])):
        return False
    d1 = _orient(q1, q2, p1)
    d2 = _orient(q1, q2, p2)
    d3 = _orient(p1, p2, q1)
    d4 = _orient(p1, p2, q2)
    if d1 * d2 < 0 and d3 * d4 < 0:
        return True
    if d1 == 0 and _on_segment(p1, q1, q2):
        return True
    if d2 == 0 and _on_segment(p2, q1, q2):
        return True
    if d3 == 0 and _on_segment(q1, p1, p2):
        return True
    if d4 == 0 and _on_segment(q2, p1, p2):
        return True
    return False


def _is_simple(verts: Sequence[Point]) -> bool:
    n = len(verts)
    for i in range(n):
        a1, a2 = verts[i], verts[(i + 1) % n]
        for j in range(i + 1, n):
            if j == i or (j + 1) % n == i or j == (i + 1) % n:
                continue  # adjacent edges share a vertex
            b1, b2 = verts[j], verts[(j + 1) % n]
            if segments_intersect(a1, a2, b1, b2):
                return False
    # adjacent edges folding back onto each other
    for i in range(n):
        a, b, c = verts[i - 1], verts[i], verts[(i + 1) % n]
        dot = (b[0] - a[0]) * (c[0] - b[0]) + (b[1] - a[1]) * (c[1] - b[1])
        if _orient(a, b, c) == 0 and dot < 0:
            return False
    return True


def point_in_polygon(p: Point, o: ObstaclePolygon) -> bool:
    """Even-odd rule; points on the boundary count as inside."""
    p = (float(p[0]), float(p[1]))
    inside = False
    x, y = p
    for a, b in o.edges():
        if _orient(a, b, p) == 0 and _on_segment(p, a, b):
            return True
        if (a[1] > y) != (b[1] > y):
            xi = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
            if x < xi:
                inside = not inside
    return inside


def segment_intersects(s: Segment, o: ObstaclePolygon) -> bool:
    """True when the segment touches or crosses the polygon, or lies inside it."""
    x0, y0, x1, y1 = o.bounds()
    if (max(s.a[0], s.b[0]) < x0 or min(s.a[0], s.b[0]) > x1
            or max(s.a[1], s.b[1]) < y0 or min(s.a[1], s.b[1]) > y1):
        return False
    for a, b in o.edges():
        if segments_intersect(s.a, s.b, a, b):
            return True
    return point_in_polygon(s.a, o)


def point_segment_distance(p: Point, a: Point, b: Point) -> float:
    dx, dy = b[0] - a[0], b[1] - a[1]
    L2 = dx * dx + dy * dy
    if L2 == 0.0:
        return math.hypot(p[0] - a[0], p[1] - a[1])
    t = ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2
    t = min(1.0, max(0.0, t))
    return math.hypot(p[0] - (a[0] + t * dx), p[1] - (a[1] + t * dy))


def segment_segment_distance(p1: Point, p2: Point, q1: Point, q2: Point) -> float:
    if segments_intersect(p1, p2, q1, q2):
        return 0.0
    return min(point_segment_distance(p1, q1, q2), point_segment_distance(p2, q1, q2),
               point_segment_distance(q1, p1, p2), point_segment_distance(q2, p1, p2))


def segment_polygon_distance(s: Segment, o: ObstaclePolygon) -> float:
    """Zero when intersecting, otherwise the gap to the polygon boundary."""
    if segment_intersects(s, o):
        return 0.0
    return min(segment_segment_distance(s.a, s.b, a, b) for a, b in o.edges())


def min_obstacle_distance(s: Segment, obstacles: Sequence[ObstaclePolygon]) -> float:
    """Distance from ``s`` to the nearest obstacle; ``inf`` with no obstacles."""
    best = math.inf
    for o in obstacles:
        # bounding-box lower bound prunes far polygons
        x0, y0, x1, y1 = o.bounds()
        gx = max(x0 - max(s.a[0], s.b[0]), min(s.a[0], s.b[0]) - x1, 0.0)
        gy = max(y0 - max(s.a[1], s.b[1]), min(s.a[1], s.b[1]) - y1, 0.0)
        if math.hypot(gx, gy) >= best:
            continue
        best = min(best, segment_polygon_distance(s, o))
        if best == 0.0:
            break
    return best


# ---------------------------------------------------------------------------
# Buffers

def buffer_obstacle(o: ObstaclePolygon, s_x: float, s_y: float) -> ObstaclePolygon:
    """Scale every vertex about the area centroid by ``diag(s_x, s_y)``."""
    if s_x < 1.0 or s_y < 1.0:
        raise ValueError("buffer scale factors must be >= 1")
    if o.area == 0.0:
        raise DegeneratePolygon("cannot buffer a zero-area polygon")
    cx, cy = o.centroid
    verts = tuple((cx + s_x * (x - cx), cy + s_y * (y - cy)) for x, y in o.vertices)
    return ObstaclePolygon(verts, (o.scale[0] * s_x, o.scale[1] * s_y), o.name)


def metric_buffer(o: ObstaclePolygon, margin: float, quad_segs: int = 4) -> ObstaclePolygon:
    """Fixed-distance (Minkowski) outline of ``o``, polygonised by shapely.

    Used for drawing the safety zone; planners test ``clearance < margin``
    directly instead of intersecting with this outline.
    """
    from shapely.geometry import Polygon

    ring = Polygon(o.vertices).buffer(margin, quad_segs=quad_segs).exterior.coords
    return ObstaclePolygon(tuple(ring), o.scale, o.name)


# ---------------------------------------------------------------------------
# Vectorised clearance for grid planners

def points_in_polygon(points: np.ndarray, o: ObstaclePolygon) -> np.ndarray:
    """Vectorised even-odd test (boundary handling is left to ``clearance``)."""
    x = points[:, 0]
    y = points[:, 1]
    inside = np.zeros(len(points), dtype=bool)
    for a, b in o.edges():
        if a[1] == b[1]:
            continue
        crosses = (a[1] > y) != (b[1] > y)
        xi = a[0] + (y - a[1]) * (b[0] - a[0]) / (b[1] - a[1])
        inside ^= crosses & (x < xi)
    return inside


def clearance(points: np.ndarray, obstacles: Sequence[ObstaclePolygon]) -> np.ndarray:
    """Distance from each point to the nearest obstacle (0 inside)."""
    points = np.asarray(points, dtype=float).reshape(-1, 2)
    out = np.full(len(points), np.inf)
    for o in obstacles:
        d = np.full(len(points), np.inf)
        for a, b in o.edges():
            ax, ay = a
            dx, dy = b[0] - ax, b[1] - ay
            t = ((points[:, 0] - ax) * dx + (points[:, 1] - ay) * dy) / (dx * dx + dy * dy)
            np.clip(t, 0.0, 1.0, out=t)
            d = np.minimum(d, np.hypot(points[:, 0] - (ax + t * dx), points[:, 1] - (ay + t * dy)))
        d[points_in_polygon(points, o)] = 0.0
        out = np.minimum(out, d)
    return out


def segment_is_clear(s: Segment, obstacles: Sequence[ObstaclePolygon], margin: float = 0.0) -> bool:
    """No intersection and at least ``margin`` meters from every obstacle."""
    d = min_obstacle_distance(s, obstacles)
    return d > 0.0 and d >= margin


def bbox(points: Iterable[Point]) -> tuple[float, float, float, float]:
    pts = np.asarray(list(points), dtype=float)
    return pts[:, 0].min(), pts[:, 1].min(), pts[:, 0].max(), pts[:, 1].max()
