import heapq
import math

import numpy as np
import pytest

from windfleet.astar import (
    UNREACHABLE,
    cruise_speeds,
    desirable_states,
    expansion_dump,
    plan_path,
    search,
)
from windfleet.errors import InvalidStartError, ScenarioError
from windfleet.hexgrid import HexCoord, HexGrid
from windfleet.quadrotor import travel_energy


def dijkstra_cost(grid, start_hex, goal_hex, wind, params):
    """Independent oracle: plain Dijkstra over the same edge weights."""
    dist = {start_hex: 0.0}
    heap = [(0.0, start_hex.q, start_hex.r)]
    done = set()
    while heap:
        d, q, r = heapq.heappop(heap)
        cur = HexCoord(q, r)
        if cur in done:
            continue
        done.add(cur)
        if cur == goal_hex:
            return d
        for nb in grid.neighbors(cur):
            if nb in grid.obstacles or nb in done:
                continue
            e = travel_energy(
                grid.center_position(cur), grid.center_position(nb), wind, params
            )
            if math.isinf(e):
                continue
            nd = d + e
            if nd < dist.get(nb, math.inf):
                dist[nb] = nd
                heapq.heappush(heap, (nd, nb.q, nb.r))
    return math.inf


@pytest.fixture(scope="module")
def small_grid():
    return HexGrid(
        14.0,
        12.0,
        1.0,
        nodes={1: HexCoord(0, 0), 2: HexCoord(5, 3), 3: HexCoord(1, 0)},
        depots={1: 1},
    )


def test_goal_in_start_hex_is_degenerate(small_grid, params):
    start = small_grid.center_position(HexCoord(5, 3))
    path = plan_path(small_grid, start, 2, (0.0, 0.0), params)
    assert path.waypoints == [small_grid.center_position(HexCoord(5, 3))]
    assert path.cost == 0.0
    assert np.allclose(path.states[:, 3:6], 0.0)


def test_wall_makes_goal_unreachable(params):
    # connected zigzag wall spanning the full height separates start from goal
    wall = [HexCoord(3 - (r // 2), r) for r in range(0, 7)]
    grid = HexGrid(
        10.0,
        10.0,
        1.0,
        obstacles=wall,
        nodes={1: HexCoord(0, 1), 2: HexCoord(5, 1)},
        depots={1: 1},
    )
    start = grid.center_position(HexCoord(0, 1))
    assert plan_path(grid, start, 2, (0.0, 0.0), params) is UNREACHABLE


def test_start_inside_obstacle_rejected(params):
    grid = HexGrid(10, 10, 1.0, obstacles=[HexCoord(1, 1)], nodes={1: HexCoord(3, 3)}, depots={1: 1})
    with pytest.raises(InvalidStartError):
        search(grid, HexCoord(1, 1), HexCoord(3, 3), (0.0, 0.0), params)


def test_unknown_goal_rejected(small_grid, params):
    with pytest.raises(ScenarioError):
        plan_path(small_grid, (0.0, 0.0), 99, (0.0, 0.0), params)


def test_path_avoids_obstacles_and_stays_adjacent(params, rng):
    for trial in range(20):
        grid, start_hex, goal_hex, wind = _random_instance(rng, params)
        rec = search(grid, start_hex, goal_hex, wind, params)
        if not rec.reached:
            continue
        chain = rec.chain()
        for h in chain:
            assert h not in grid.obstacles
        for a, b in zip(chain, chain[1:]):
            assert b in grid.neighbors(a)


def _random_instance(rng, params, width=12.0, height=12.0, n_obstacles=18):
    base = HexGrid(width, height, 1.0)
    hexes = list(base.hexes)
    picks = rng.choice(len(hexes), size=n_obstacles + 2, replace=False)
    obstacles = [hexes[i] for i in picks[:n_obstacles]]
    start_hex = hexes[picks[n_obstacles]]
    goal_hex = hexes[picks[n_obstacles + 1]]
    grid = HexGrid(width, height, 1.0, obstacles=obstacles)
    mag = rng.uniform(0.0, 8.0)
    ang = rng.uniform(0.0, 2 * math.pi)
    wind = (mag * math.cos(ang), mag * math.sin(ang))
    return grid, start_hex, goal_hex, wind


def test_search_cost_matches_dijkstra_oracle(params, rng):
    hits = 0
    for trial in range(40):
        grid, start_hex, goal_hex, wind = _random_instance(rng, params)
        rec = search(grid, start_hex, goal_hex, wind, params)
        oracle = dijkstra_cost(grid, start_hex, goal_hex, wind, params)
        if rec.reached:
            assert rec.g[goal_hex] == pytest.approx(oracle, abs=1e-9)
            hits += 1
        else:
            assert math.isinf(oracle)
    assert hits > 10  # most random instances are solvable


def test_heuristic_never_exceeds_true_cost(params, rng):
    # straight-line energy is a lower bound on the best hex-path energy
    for trial in range(15):
        grid, start_hex, goal_hex, wind = _random_instance(rng, params, n_obstacles=0)
        oracle = dijkstra_cost(grid, start_hex, goal_hex, wind, params)
        h0 = travel_energy(
            grid.center_position(start_hex), grid.center_position(goal_hex), wind, params
        )
        assert h0 <= oracle + 1e-9


def test_search_is_deterministic(params):
    grid = HexGrid(12, 12, 1.0, obstacles=[HexCoord(2, 2), HexCoord(3, 1)])
    a = search(grid, HexCoord(0, 0), HexCoord(4, 4), (1.0, -0.5), params)
    b = search(grid, HexCoord(0, 0), HexCoord(4, 4), (1.0, -0.5), params)
    assert a.expansion_order == b.expansion_order
    assert a.chain() == b.chain()
    assert expansion_dump(a) == expansion_dump(b)


def test_desirable_states_single_waypoint():
    states = desirable_states([(2.0, 3.0)], 1.0, 0.005, settle_s=0.5)
    assert states.shape == (101, 12)
    assert np.allclose(states[:, 0], 2.0)
    assert np.allclose(states[:, 3:], 0.0)


def test_desirable_states_boundary_conditions():
    wps = [(0.0, 0.0), (math.sqrt(3), 0.0), (2 * math.sqrt(3), 0.0)]
    states = desirable_states(wps, 2.0, 0.005, settle_s=0.0)
    assert np.allclose(states[0, 0:2], wps[0], atol=1e-9)
    assert np.allclose(states[-1, 0:2], wps[-1], atol=1e-9)
    assert np.allclose(states[0, 3:6], 0.0, atol=1e-12)
    assert np.allclose(states[-1, 3:6], 0.0, atol=1e-9)
    # attitude references are zero throughout
    assert np.all(states[:, 6:] == 0.0)


def test_desirable_states_pass_through_waypoints():
    wps = [(0.0, 0.0), (math.sqrt(3), 0.0), (math.sqrt(3) * 1.5, 1.5)]
    ts = 0.005
    states = desirable_states(wps, 1.5, ts, settle_s=0.0)
    pos = states[:, 0:2]
    for w in wps:
        d = np.min(np.linalg.norm(pos - np.array(w), axis=1))
        assert d < 1.5 * ts * 1.5  # within one sample of the knot


def test_velocity_is_continuous(params):
    grid = HexGrid(20, 20, 1.0, nodes={1: HexCoord(0, 0), 2: HexCoord(6, 4)}, depots={1: 1})
    path = plan_path(grid, grid.center_position(HexCoord(0, 0)), 2, (1.0, 0.5), params)
    dv = np.diff(path.states[:, 3:5], axis=0)
    # no velocity jump larger than a plausible acceleration*dt bound
    assert np.max(np.linalg.norm(dv, axis=1)) < 60.0 * 0.005


def test_plan_path_invariants(params):
    grid = HexGrid(20, 20, 1.0, nodes={1: HexCoord(0, 0), 2: HexCoord(6, 4)}, depots={1: 1})
    start = grid.center_position(HexCoord(0, 0))
    path = plan_path(grid, start, 2, (0.0, 0.0), params)
    assert path.waypoints[0] == start
    assert path.waypoints[-1] == grid.node_position(2)
    assert path.states.shape[0] == path.predicted_travel_time + 1
    for a, b in zip(path.waypoints, path.waypoints[1:]):
        assert np.hypot(b[0] - a[0], b[1] - a[1]) == pytest.approx(math.sqrt(3), abs=1e-9)


def test_cruise_speeds_depend_on_wind_direction(params):
    wps = [(0.0, 0.0), (10.0, 0.0)]
    with_tail = cruise_speeds(wps, (5.0, 0.0), params)[0]
    with_head = cruise_speeds(wps, (-5.0, 0.0), params)[0]
    calm = cruise_speeds(wps, (0.0, 0.0), params)[0]
    assert with_head < calm < with_tail
