import math

import numpy as np
import pytest

from quav.cost import CostConfig, CostVector
from quav.encoding import (RepairPlanner, decode_select, repair_segments, segment_encoding,
                           select_encoding)
from quav.errors import NoPathExists
from quav.geo import ObstaclePolygon, Segment, min_obstacle_distance
from quav.qaoa import QaoaProblem, chain_links, decode_path
from quav.qsim import bits_of

from .oracles import buffered_shortest_path_length, ising_energy


def rect(x0, y0, x1, y1):
    return ObstaclePolygon(((x0, y0), (x1, y0), (x1, y1), (x0, y1)))


BLOCK = [rect(28.0, -10.0, 42.0, 12.0)]
BOUNDS = (-25.0, -35.0, 95.0, 35.0)


def test_segment_encoding_shapes():
    enc = segment_encoding((0.0, 0.0), (70.0, 0.0), BLOCK, 14)
    assert enc.n == enc.problem.n == 14
    assert enc.step == pytest.approx(5.0)
    assert enc.problem.mu == pytest.approx(10.0)
    assert enc.edges[0].a == (0.0, 0.0) and enc.edges[-1].b == (70.0, 0.0)
    hit = [i for i, e in enumerate(enc.edges) if e.b[0] > 28.0 and e.a[0] < 42.0]
    assert all(enc.costs.intersects[i] for i in hit)


@pytest.mark.parametrize("seed", range(4))
def test_selection_energy_is_affine_in_decode_score(seed):
    # with costs inside the clipping window the Ising energy ranks bitstrings
    # exactly like the decode score
    rng = np.random.default_rng(seed)
    n, mu = 6, 2.0
    costs = CostVector.from_raw(rng.uniform(-mu, 3 * mu, n))
    p = QaoaProblem.from_costs(costs, mu)
    scores, energies = [], []
    for idx in range(1 << n):
        bits = bits_of(idx, n)
        scores.append(p.score(bits))
        energies.append(ising_energy(bits, p.weights, p.coupling))
    slope, icpt = np.polyfit(scores, energies, 1)
    assert slope > 0
    assert np.allclose(np.polyval([slope, icpt], scores), energies, atol=1e-12)


def test_selection_weights_normalised():
    p = QaoaProblem.from_costs(CostVector.from_raw([5.0, 1e6, -1e3, 2.0]), 4.0)
    assert max(np.abs(p.weights).max(), np.abs(p.coupling).max()) == pytest.approx(1.0)


def test_literal_mode_uses_fixed_coupling():
    p = QaoaProblem.literal(CostVector.from_raw([2.0, -4.0, 1.0]), 0.5)
    assert p.weights.tolist() == [0.5, -1.0, 0.25]
    assert p.coupling.tolist() == [0.5, 0.5]
    assert p.links == chain_links(3)


def _assert_clear(pts, obstacles, buffer):
    for a, b in zip(pts, pts[1:]):
        assert min_obstacle_distance(Segment(a, b), obstacles) >= buffer - 1e-9


@pytest.mark.parametrize("pattern", ["ones", "zeros", "alternate"])
def test_repair_keeps_buffer_for_any_selection(pattern):
    enc = segment_encoding((0.0, 0.0), (70.0, 0.0), BLOCK, 14)
    planner = RepairPlanner(BLOCK, BOUNDS, 5.0, 1.0, (0.0, 0.0))
    bits = {"ones": [1] * 14, "zeros": [0] * 14,
            "alternate": [i % 2 for i in range(14)]}[pattern]
    rep = repair_segments(bits, enc, planner)
    assert rep.waypoints[0] == (0.0, 0.0) and rep.waypoints[-1] == (70.0, 0.0)
    _assert_clear(rep.waypoints, BLOCK, 5.0)
    assert rep.repaired_runs


def test_repair_of_clear_line_is_straight():
    enc = segment_encoding((0.0, 0.0), (70.0, 0.0), [rect(30, 20, 40, 30)], 7)
    planner = RepairPlanner([rect(30, 20, 40, 30)], BOUNDS, 5.0)
    rep = repair_segments([1] * 7, enc, planner)
    assert rep.waypoints == [(0.0, 0.0), (70.0, 0.0)]
    assert rep.repaired_runs == []


def test_repair_detour_close_to_continuous_shortest():
    planner = RepairPlanner(BLOCK, BOUNDS, 5.0, 1.0, (0.0, 0.0))
    pts = planner.route((0.0, 0.0), (70.0, 0.0))
    L = sum(math.dist(a, b) for a, b in zip(pts, pts[1:]))
    shortest = buffered_shortest_path_length((0.0, 0.0), (70.0, 0.0), BLOCK[0], 5.0)
    # 8-connected grid paths are at most 1/cos(22.5 deg) longer than any-angle ones
    assert shortest - 1e-9 <= L <= shortest / math.cos(math.pi / 8)
    _assert_clear(pts, BLOCK, 5.0)


def test_repair_enclosed_endpoint():
    ring = [rect(60, -10, 80, -8), rect(60, 8, 80, 10), rect(60, -10, 62, 10), rect(78, -10, 80, 10)]
    planner = RepairPlanner(ring, BOUNDS, 1.0)
    with pytest.raises(NoPathExists):
        planner.route((0.0, 0.0), (70.0, 0.0))


def test_select_encoding_best_feasible_decode_is_a_clear_candidate():
    cfg = CostConfig(buffer_distance=2.0)
    obs = [rect(8.0, 8.0, 12.0, 12.0)]
    enc = select_encoding((0.0, 0.0), (20.0, 20.0), obs, 12, cfg, resolution=5.0)
    assert enc.n <= 12
    d = decode_path(enc.problem, range(1 << enc.n), enc.edges, obs, enc.start, enc.end)
    assert d.feasible and d.reached_end
    assert d.waypoints in [list(c.waypoints) for c in enc.candidates]
    _assert_clear(d.waypoints, obs, 2.0)
    pts, dec = decode_select(enc, range(1 << enc.n), obs)
    assert dec is not None and pts == d.waypoints


def test_select_decoder_falls_back_to_shortest_candidate():
    cfg = CostConfig(buffer_distance=2.0)
    obs = [rect(8.0, 8.0, 12.0, 12.0)]
    enc = select_encoding((0.0, 0.0), (20.0, 20.0), obs, 12, cfg, resolution=5.0)
    pts, dec = decode_select(enc, [0], obs)
    assert dec is None
    assert pts == list(enc.candidates[0].waypoints)
