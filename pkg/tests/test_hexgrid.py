import itertools
import math

import numpy as np
import pytest

from windfleet.errors import BoundsError, ScenarioError
from windfleet.hexgrid import AXIAL_DIRECTIONS, HexCoord, HexGrid, SQRT3


@pytest.fixture(scope="module")
def grid10():
    return HexGrid(width_m=18.0, height_m=16.0, side_m=1.0)


def test_origin_hex_is_at_origin(grid10):
    assert grid10.center_position(HexCoord(0, 0)) == (0.0, 0.0)


def test_adjacent_centers_are_sqrt3_apart(grid10):
    a = np.array(grid10.center_position(HexCoord(2, 2)))
    b = np.array(grid10.center_position(HexCoord(3, 2)))
    assert np.linalg.norm(a - b) == pytest.approx(SQRT3, abs=1e-12)


def test_all_six_neighbor_distances_equal(grid10):
    # enumerate the neighbors of an interior hex and compare distances
    h = HexCoord(3, 4)
    c = np.array(grid10.center_position(h))
    dists = [
        np.linalg.norm(np.array(grid10.center_position(n)) - c) for n in grid10.neighbors(h)
    ]
    assert len(dists) == 6
    assert max(dists) - min(dists) < 1e-12
    assert max(dists) / min(dists) == pytest.approx(1.0, abs=1e-12)


def test_interior_hex_has_six_neighbors(grid10):
    assert len(grid10.neighbors(HexCoord(4, 4))) == 6


def test_corner_hex_has_at_most_three_neighbors(grid10):
    corner = min(grid10.hexes)
    assert len(grid10.neighbors(corner)) <= 3


def test_neighbor_order_starts_east_then_counter_clockwise(grid10):
    h = HexCoord(3, 4)
    cx, cy = grid10.center_position(h)
    angles = []
    for n in grid10.neighbors(h):
        nx, ny = grid10.center_position(n)
        angles.append(math.degrees(math.atan2(ny - cy, nx - cx)) % 360.0)
    assert angles == pytest.approx([0.0, 60.0, 120.0, 180.0, 240.0, 300.0], abs=1e-9)


def test_neighbor_relation_is_symmetric(grid10):
    # exhaustive over the whole grid
    for a in grid10.hexes:
        for b in grid10.neighbors(a):
            assert a in grid10.neighbors(b)


def test_containing_hex_round_trip(grid10):
    for h in grid10.hexes:
        assert grid10.containing_hex(grid10.center_position(h)) == h


def _hex_polygon(cx, cy, side):
    # pointy-top: vertices at 30 + 60k degrees
    return [
        (cx + side * math.cos(math.radians(30 + 60 * k)), cy + side * math.sin(math.radians(30 + 60 * k)))
        for k in range(6)
    ]


def _point_in_polygon(px, py, poly):
    inside = False
    n = len(poly)
    for i in range(n):
        x1, y1 = poly[i]
        x2, y2 = poly[(i + 1) % n]
        if (y1 > py) != (y2 > py):
            xin = (x2 - x1) * (py - y1) / (y2 - y1) + x1
            if px < xin:
                inside = not inside
    return inside


def test_points_near_edges_match_polygon_oracle(grid10, rng):
    # sample points slightly inside shared edges and check the owner hex
    # region actually contains them (point-in-polygon oracle)
    hexes = list(grid10.hexes)
    for _ in range(200):
        h = hexes[rng.integers(0, len(hexes))]
        nbrs = grid10.neighbors(h)
        if not nbrs:
            continue
        n = nbrs[rng.integers(0, len(nbrs))]
        a = np.array(grid10.center_position(h))
        b = np.array(grid10.center_position(n))
        m = 0.5 * (a + b)
        p = m + (a - m) * 1e-3  # epsilon toward a: inside hex h
        owner = grid10.containing_hex((p[0], p[1]))
        assert owner == h
        poly = _hex_polygon(*grid10.center_position(owner), grid10.side_m)
        assert _point_in_polygon(p[0], p[1], poly)


def test_edge_midpoint_tie_breaks_to_lexicographic_smallest(grid10):
    a = HexCoord(2, 2)
    for b in grid10.neighbors(a):
        pa = np.array(grid10.center_position(a))
        pb = np.array(grid10.center_position(b))
        mid = 0.5 * (pa + pb)
        winner = grid10.containing_hex((mid[0], mid[1]))
        assert winner == min(a, b)


def test_center_position_out_of_bounds_raises(grid10):
    with pytest.raises(BoundsError):
        grid10.center_position(HexCoord(1000, 1000))
    with pytest.raises(BoundsError):
        grid10.neighbors(HexCoord(-50, -50))


def test_containing_hex_far_outside_raises(grid10):
    with pytest.raises(BoundsError):
        grid10.containing_hex((1e4, 1e4))


def test_nodes_cannot_sit_on_obstacles():
    with pytest.raises(ScenarioError):
        HexGrid(10, 10, 1.0, obstacles=[HexCoord(1, 1)], nodes={1: HexCoord(1, 1)})


def test_two_nodes_cannot_share_a_hex():
    with pytest.raises(ScenarioError):
        HexGrid(10, 10, 1.0, nodes={1: HexCoord(1, 1), 2: HexCoord(1, 1)})


def test_depot_must_be_a_node_and_host_one_uav():
    with pytest.raises(ScenarioError):
        HexGrid(10, 10, 1.0, nodes={1: HexCoord(1, 1)}, depots={1: 99})
    with pytest.raises(ScenarioError):
        HexGrid(
            10,
            10,
            1.0,
            nodes={1: HexCoord(1, 1)},
            depots={1: 1, 2: 1},
        )


def test_obstacle_outside_grid_rejected():
    with pytest.raises(ScenarioError):
        HexGrid(10, 10, 1.0, obstacles=[HexCoord(100, 100)])


def test_free_hexes_excludes_obstacles():
    g = HexGrid(10, 10, 1.0, obstacles=[HexCoord(1, 1), HexCoord(2, 2)])
    free = g.free_hexes()
    assert HexCoord(1, 1) not in free
    assert len(free) == len(g.hexes) - 2
