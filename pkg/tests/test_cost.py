import math

import numpy as np
import pytest

from quav.cost import CostConfig, CostVector, assign_costs, distance_cost, obstacle_penalty
from quav.errors import EmptyPath
from quav.geo import ObstaclePolygon, Segment
from quav.graphplan import segment_straight_path

BOX = ObstaclePolygon(((4.0, -1.0), (6.0, -1.0), (6.0, 1.0), (4.0, 1.0)))


def test_intersecting_edge_gets_flat_penalty():
    cv = assign_costs([Segment((0, 5), (1, 5)), Segment((3, 0), (7, 0))], [BOX])
    assert cv.raw[1] == 1e6
    assert cv.intersects.tolist() == [False, True]


def test_start_bias_added_to_first_edge():
    cfg = CostConfig(lam=0.0)
    cv = assign_costs([Segment((0, 0), (2, 0)), Segment((2, 0), (4, 0))], [], cfg)
    assert cv.raw.tolist() == [2.0 - 1e3, 2.0]


def test_proximity_term():
    cfg = CostConfig(lam=10.0, buffer_distance=5.0)
    e = Segment((0.0, 4.0), (10.0, 4.0))
    assert obstacle_penalty(e, [BOX], cfg) == pytest.approx(10.0 * math.exp(-3.0 / 5.0))
    cv = assign_costs([Segment((20, 0), (21, 0)), e], [BOX], cfg)
    assert cv.raw[1] == pytest.approx(10.0 + 10.0 * math.exp(-0.6))


def test_no_obstacles_cost_is_distance():
    seg = segment_straight_path((0, 0), (30, 40), 10)
    cv = assign_costs(seg, [], CostConfig(start_bias=0.0))
    assert np.allclose(cv.raw, 5.0)
    assert distance_cost(seg.edges[0]) == pytest.approx(5.0)


def test_normalisation():
    cv = CostVector.from_raw([2.0, -4.0, 1.0])
    assert cv.scale == 4.0
    assert cv.normalized.tolist() == [0.5, -1.0, 0.25]
    assert np.max(np.abs(cv.normalized)) == 1.0
    z = CostVector.from_raw([0.0, 0.0])
    assert z.normalized.tolist() == [0.0, 0.0]


def test_buffer_violations_flag():
    cv = assign_costs([Segment((0, 3), (10, 3)), Segment((0, 20), (10, 20))], [BOX])
    assert cv.buffer_violations(5.0).tolist() == [True, False]


def test_errors():
    with pytest.raises(EmptyPath):
        assign_costs([], [])
    with pytest.raises(ValueError):
        CostConfig(buffer_distance=0.0)
    with pytest.raises(ValueError):
        CostConfig(lam=-1.0)
