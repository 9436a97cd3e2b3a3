"""Independent reference implementations used only by the tests."""
from __future__ import annotations

import math
from functools import reduce

import numpy as np

from quav.geo import ObstaclePolygon

# ---------------------------------------------------------------------------
# geometry


def random_star_polygon(rng, center=(0.0, 0.0), radius=1.0, k=None) -> ObstaclePolygon:
    """Simple polygon with vertices at sorted angles around ``center``."""
    k = k or int(rng.integers(3, 9))
    while True:
        ang = np.sort(rng.uniform(0, 2 * math.pi, k))
        gaps = np.diff(np.append(ang, ang[0] + 2 * math.pi))
        # every gap below pi keeps the center in the kernel, so the ring is simple
        if gaps.min() > 0.05 and gaps.max() < math.pi - 0.05:
            break
    r = radius * rng.uniform(0.3, 1.0, k)
    pts = [(center[0] + ri * math.cos(a), center[1] + ri * math.sin(a)) for ri, a in zip(r, ang)]
    return ObstaclePolygon(tuple(pts))


def winding_number_inside(p, ring) -> bool:
    """Winding-number test; a point on the boundary counts as inside."""
    x, y = p
    wn = 0
    n = len(ring)
    for i in range(n):
        (x0, y0), (x1, y1) = ring[i], ring[(i + 1) % n]
        cross = (x1 - x0) * (y - y0) - (x - x0) * (y1 - y0)
        if cross == 0 and min(x0, x1) <= x <= max(x0, x1) and min(y0, y1) <= y <= max(y0, y1):
            return True
        if y0 <= y < y1 and cross > 0:
            wn += 1
        elif y1 <= y < y0 and cross < 0:
            wn -= 1
    return wn != 0


def winding_numbers(pts, ring) -> np.ndarray:
    """Vectorised winding number of each point (boundary points are not special-cased)."""
    ring = np.asarray(ring, float)
    a = ring[None, :, :]
    b = np.roll(ring, -1, axis=0)[None, :, :]
    x = pts[:, None, 0]
    y = pts[:, None, 1]
    cross = (b[..., 0] - a[..., 0]) * (y - a[..., 1]) - (x - a[..., 0]) * (b[..., 1] - a[..., 1])
    up = (a[..., 1] <= y) & (y < b[..., 1]) & (cross > 0)
    down = (b[..., 1] <= y) & (y < a[..., 1]) & (cross < 0)
    return up.sum(axis=1) - down.sum(axis=1)


def _points_to_ring_distance(pts, ring):
    ring = np.asarray(ring, float)
    a = ring
    b = np.roll(ring, -1, axis=0)
    d = b - a
    rel = pts[:, None, :] - a[None, :, :]
    t = np.clip((rel * d[None]).sum(-1) / (d * d).sum(-1)[None], 0.0, 1.0)
    proj = a[None] + t[..., None] * d[None]
    return np.sqrt(((pts[:, None, :] - proj) ** 2).sum(-1)).min(axis=1)


def sampled_segment_distance(a, b, poly: ObstaclePolygon, n: int):
    """(min distance over ``n`` samples along a->b, whether any sample lies inside)."""
    t = np.linspace(0.0, 1.0, n)[:, None]
    pts = np.asarray(a, float)[None] * (1 - t) + np.asarray(b, float)[None] * t
    ring = poly.coords
    inside = winding_numbers(pts, ring) != 0
    d = _points_to_ring_distance(pts, ring)
    d[inside] = 0.0
    return float(d.min()), bool(inside.any())


# ---------------------------------------------------------------------------
# quantum circuits

_I = np.eye(2, dtype=complex)
_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)


def _single(kind, theta):
    if kind == "H":
        return _H
    c, s = math.cos(theta / 2), math.sin(theta / 2)
    if kind == "RX":
        return np.array([[c, -1j * s], [-1j * s, c]])
    return np.array([[np.exp(-0.5j * theta), 0], [0, np.exp(0.5j * theta)]])


def kron_unitary(gate, n: int) -> np.ndarray:
    """Full 2**n unitary built from Kronecker products (qubit 0 = least significant)."""
    if gate.kind != "CNOT":
        ops = [_single(gate.kind, gate.theta) if q == gate.target else _I for q in range(n)]
        # kron lists the most significant qubit first
        return reduce(np.kron, ops[::-1])
    p0 = np.diag([1, 0]).astype(complex)
    p1 = np.diag([0, 1]).astype(complex)
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    a = [p0 if q == gate.control else _I for q in range(n)]
    b = [p1 if q == gate.control else (x if q == gate.target else _I) for q in range(n)]
    return reduce(np.kron, a[::-1]) + reduce(np.kron, b[::-1])


def circuit_unitary(gates, n: int) -> np.ndarray:
    U = np.eye(1 << n, dtype=complex)
    for g in gates:
        U = kron_unitary(g, n) @ U
    return U


def ising_energy(bits, weights, couplings) -> float:
    z = [1 - 2 * b for b in bits]
    return (sum(w * zi for w, zi in zip(weights, z))
            + sum(J * z[i] * z[i + 1] for i, J in enumerate(couplings)))


def buffered_shortest_path_length(a, b, poly: ObstaclePolygon, r: float) -> float:
    """Shortest a->b length avoiding ``poly`` grown by ``r`` (visibility graph over a
    finely resolved shapely buffer).  The inscribed polygon makes this a lower bound."""
    import heapq

    from shapely.geometry import LineString, Polygon

    grown = Polygon(poly.coords).buffer(r, quad_segs=64)
    inner = grown.buffer(-1e-7)
    V = [tuple(a), tuple(b)] + list(grown.exterior.coords)[:-1]
    adj = [[] for _ in V]
    for i in range(len(V)):
        for j in range(i + 1, len(V)):
            if LineString([V[i], V[j]]).intersection(inner).length < 1e-9:
                d = math.dist(V[i], V[j])
                adj[i].append((j, d))
                adj[j].append((i, d))
    dist = [math.inf] * len(V)
    dist[0] = 0.0
    heap = [(0.0, 0)]
    while heap:
        d, u = heapq.heappop(heap)
        if d > dist[u]:
            continue
        for v, w in adj[u]:
            if d + w < dist[v]:
                dist[v] = d + w
                heapq.heappush(heap, (dist[v], v))
    return dist[1]
