"""Energy-aware A* over the hex grid and reference trajectory generation.

Edge weights are straight-line full-throttle energies between adjacent hex
centers under the current wind, frozen for the whole search; the heuristic
is the same formula applied to the straight line from a hex to the goal.
With a frozen wind below the relative-speed ceiling the reachable-velocity
set is a disk, so the straight-line energy is a consistent heuristic and
the search is exact with respect to its edge weights (verified against a
Dijkstra oracle in the tests).

Waypoints are turned into a time-sampled reference by fitting one quintic
per segment: zero velocity and acceleration at the two path endpoints,
velocity continuous across interior waypoints (bisector direction, with the
magnitude reduced on turns), and segment durations of length/cruise-speed.
The cruise speed is ``cruise_fraction`` times the maximum ground speed for
the segment direction under the frozen wind; flying at the ceiling itself
would leave the controller no thrust margin, so the fraction keeps the
reference trackable (see the tracking tests).
"""

import heapq
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple, Union

import numpy as np

from . import _kernels
from .errors import InvalidStartError, ScenarioError
from .hexgrid import AXIAL_DIRECTIONS, HexCoord, HexGrid, NodeId, Position2D, SQRT3
from .quadrotor import CraftParams, EnergyJ, UavState

# Fraction of the wind-dependent maximum ground speed used as reference
# cruise speed; 0.04 keeps peak reference tilt below ~60 degrees for the
# default craft.
DEFAULT_CRUISE_FRACTION = 0.04

# Hover padding appended to the reference at the goal so the tracking loop
# settles before the prediction ends (the craft has to stop at every node).
DEFAULT_SETTLE_S = 1.0

# Sentinel for plan_path when the open set empties before the goal is found.
UNREACHABLE = None


@dataclass
class SearchRecord:
    """Bookkeeping of one A* invocation (costs, parents, expansion order)."""

    start: HexCoord
    goal: HexCoord
    g: Dict[HexCoord, EnergyJ] = field(default_factory=dict)
    f: Dict[HexCoord, EnergyJ] = field(default_factory=dict)
    parent: Dict[HexCoord, Optional[HexCoord]] = field(default_factory=dict)
    t_reach: Dict[HexCoord, float] = field(default_factory=dict)
    open_set: Set[HexCoord] = field(default_factory=set)
    closed_set: Set[HexCoord] = field(default_factory=set)
    expansion_order: List[HexCoord] = field(default_factory=list)
    reached: bool = False

    def chain(self) -> List[HexCoord]:
        """Start-to-goal hex sequence (empty when the goal was not reached)."""
        if not self.reached:
            return []
        out = [self.goal]
        while out[-1] != self.start:
            out.append(self.parent[out[-1]])
        out.reverse()
        return out


@dataclass
class DesirablePath:
    """A* waypoints plus the sampled reference states tracking them.

    ``states`` is an (N+1, 12) array of state vectors (one per time index,
    N = ``predicted_travel_time``); rows are [p v euler rates] with zero
    attitude and rates.
    """

    waypoints: List[Position2D]
    states: np.ndarray
    predicted_travel_time: int
    cost: EnergyJ

    @property
    def goal_xy(self) -> Position2D:
        return self.waypoints[-1]

    @property
    def ref_p(self) -> np.ndarray:
        return self.states[:, 0:3]

    @property
    def ref_v(self) -> np.ndarray:
        return self.states[:, 3:6]

    def state_at(self, k: int) -> UavState:
        return UavState.from_vector(self.states[k])


def _direction_steps(grid: HexGrid, wind, params: CraftParams):
    """Edge energy and travel time for each of the six hop directions."""
    par = params.kernel_params
    vr = float(par[_kernels.PAR_VR])
    pcoef = float(par[_kernels.PAR_PCOEF])
    s = grid.side_m
    energies = []
    times = []
    for d in AXIAL_DIRECTIONS:
        dx = s * SQRT3 * (d.q + d.r / 2.0)
        dy = s * 1.5 * d.r
        e = _kernels.travel_energy(dx, dy, wind[0], wind[1], vr, pcoef)
        energies.append(e)
        # energy = pcoef * time, so the hop time falls out directly
        times.append(e / pcoef if math.isfinite(e) else math.inf)
    return energies, times


def search(
    grid: HexGrid,
    start_hex: HexCoord,
    goal_hex: HexCoord,
    wind,
    params: CraftParams,
    t_start: float = 0.0,
) -> SearchRecord:
    """A* from ``start_hex`` to ``goal_hex`` under a frozen wind.

    Ties in the priority are broken by lexicographic (q, r) so equal inputs
    always expand in the same order.
    """
    start_hex = HexCoord(*start_hex)
    goal_hex = HexCoord(*goal_hex)
    if start_hex in grid.obstacles:
        raise InvalidStartError(f"start hex {start_hex} is an obstacle")
    rec = SearchRecord(start=start_hex, goal=goal_hex)

    par = params.kernel_params
    vr = float(par[_kernels.PAR_VR])
    pcoef = float(par[_kernels.PAR_PCOEF])
    centers = grid.centers
    gx, gy = grid.center_position(goal_hex)
    h_all = _kernels.travel_energy_field(
        gx - centers[:, 0], gy - centers[:, 1], float(wind[0]), float(wind[1]), vr, pcoef
    )
    edge_e, edge_t = _direction_steps(grid, wind, params)

    h_start = h_all[grid.hex_index(start_hex)]
    rec.g[start_hex] = 0.0
    rec.f[start_hex] = 0.0 + h_start
    rec.parent[start_hex] = None
    rec.t_reach[start_hex] = t_start
    rec.open_set.add(start_hex)
    heap: List[Tuple[float, int, int]] = []
    if math.isfinite(h_start):
        heapq.heappush(heap, (rec.f[start_hex], start_hex.q, start_hex.r))

    while heap:
        fval, q, r = heapq.heappop(heap)
        cur = HexCoord(q, r)
        if cur in rec.closed_set:
            continue
        if fval > rec.f.get(cur, math.inf):
            continue  # stale heap entry superseded by a cheaper path
        rec.expansion_order.append(cur)
        if cur == goal_hex:
            rec.reached = True
            break
        rec.open_set.discard(cur)
        rec.closed_set.add(cur)
        g_cur = rec.g[cur]
        t_cur = rec.t_reach[cur]
        for di, d in enumerate(AXIAL_DIRECTIONS):
            nb = HexCoord(cur.q + d.q, cur.r + d.r)
            if not grid.in_bounds(nb):
                continue
            if nb in grid.obstacles or nb in rec.closed_set:
                continue
            e = edge_e[di]
            if not math.isfinite(e):
                continue
            rec.open_set.add(nb)
            new_g = g_cur + e
            if new_g >= rec.g.get(nb, math.inf):
                continue
            rec.parent[nb] = cur
            rec.g[nb] = new_g
            rec.f[nb] = new_g + h_all[grid.hex_index(nb)]
            rec.t_reach[nb] = t_cur + edge_t[di]
            heapq.heappush(heap, (rec.f[nb], nb.q, nb.r))
    return rec


def expansion_dump(record: SearchRecord) -> str:
    """Expanded-hex order as text, for golden-file comparisons."""
    lines = [f"{h.q} {h.r} {record.f.get(h, math.inf):.9f}" for h in record.expansion_order]
    return "\n".join(lines) + "\n"


def cruise_speeds(
    waypoints: Sequence[Position2D],
    wind,
    params: CraftParams,
    cruise_fraction: float = DEFAULT_CRUISE_FRACTION,
) -> List[float]:
    """Per-segment reference cruise speed under the frozen wind."""
    par = params.kernel_params
    vr = float(par[_kernels.PAR_VR])
    wx, wy = float(wind[0]), float(wind[1])
    speeds = []
    for a, b in zip(waypoints[:-1], waypoints[1:]):
        dx = b[0] - a[0]
        dy = b[1] - a[1]
        dist = math.hypot(dx, dy)
        if dist == 0.0:
            speeds.append(0.0)
            continue
        d_par = (wx * dx + wy * dy) / dist
        d_perp2 = (wx * wx + wy * wy) - d_par * d_par
        radicand = vr * vr - d_perp2
        va = math.sqrt(radicand) + d_par if radicand > 0.0 else 0.0
        if va <= 0.0:
            raise ScenarioError("segment infeasible under the planning wind")
        speeds.append(cruise_fraction * va)
    return speeds


def _quintic_coeffs(p0, v0, a0, p1, v1, a1, T):
    d = p1 - p0
    c0 = p0
    c1 = v0
    c2 = a0 / 2.0
    c3 = (20.0 * d - (8.0 * v1 + 12.0 * v0) * T - (3.0 * a0 - a1) * T**2) / (2.0 * T**3)
    c4 = (-30.0 * d + (14.0 * v1 + 16.0 * v0) * T + (3.0 * a0 - 2.0 * a1) * T**2) / (2.0 * T**4)
    c5 = (12.0 * d - 6.0 * (v1 + v0) * T + (a1 - a0) * T**2) / (2.0 * T**5)
    return (c0, c1, c2, c3, c4, c5)


def desirable_states(
    waypoints: Sequence[Position2D],
    v_cruise: Union[float, Sequence[float]],
    t_s: float,
    settle_s: float = DEFAULT_SETTLE_S,
) -> np.ndarray:
    """Sampled reference states through the waypoints.

    One quintic per segment; zero velocity/acceleration at the first and
    last waypoint, continuous velocity at interior waypoints (bisector
    direction, magnitude scaled by cos(half the turn angle)).  Segment
    durations are length / cruise speed; ``settle_s`` of hover at the goal
    is appended.  Returns an (N+1, 12) state array sampled every ``t_s``
    with attitude and body rates zero.
    """
    pts = [np.array([w[0], w[1]], dtype=np.float64) for w in waypoints]
    if len(pts) == 0:
        raise ValueError("need at least one waypoint")
    if len(pts) == 1:
        n_tail = int(round(settle_s / t_s))
        state = np.zeros((1 + n_tail, 12))
        state[:, 0:2] = pts[0]
        return state

    nseg = len(pts) - 1
    if np.isscalar(v_cruise):
        seg_speed = [float(v_cruise)] * nseg
    else:
        seg_speed = [float(v) for v in v_cruise]
        if len(seg_speed) != nseg:
            raise ValueError("one cruise speed per segment expected")
    lengths = [float(np.linalg.norm(pts[i + 1] - pts[i])) for i in range(nseg)]
    for L, v in zip(lengths, seg_speed):
        if L <= 0.0:
            raise ValueError("repeated waypoint")
        if v <= 0.0:
            raise ValueError("cruise speed must be positive")
    durations = [L / v for L, v in zip(lengths, seg_speed)]

    # knot velocities: zero at the ends, bisector at interior waypoints
    knot_v = [np.zeros(2) for _ in pts]
    for j in range(1, nseg):
        din = (pts[j] - pts[j - 1]) / lengths[j - 1]
        dout = (pts[j + 1] - pts[j]) / lengths[j]
        knot_v[j] = min(seg_speed[j - 1], seg_speed[j]) * 0.5 * (din + dout)

    coeffs = []
    for i in range(nseg):
        cx = _quintic_coeffs(pts[i][0], knot_v[i][0], 0.0, pts[i + 1][0], knot_v[i + 1][0], 0.0, durations[i])
        cy = _quintic_coeffs(pts[i][1], knot_v[i][1], 0.0, pts[i + 1][1], knot_v[i + 1][1], 0.0, durations[i])
        coeffs.append((cx, cy))

    cum = np.concatenate([[0.0], np.cumsum(durations)])
    total = float(cum[-1])
    n_steps = max(1, int(math.ceil(total / t_s - 1e-12)))
    t = np.minimum(np.arange(n_steps + 1) * t_s, total)
    seg = np.minimum(np.searchsorted(cum, t, side="right") - 1, nseg - 1)
    tl = t - cum[seg]
    cx = np.array([c[0] for c in coeffs])[seg]  # (N+1, 6)
    cy = np.array([c[1] for c in coeffs])[seg]
    t2 = tl * tl
    t3 = t2 * tl
    t4 = t3 * tl
    t5 = t4 * tl
    states = np.zeros((n_steps + 1, 12))
    states[:, 0] = cx[:, 0] + cx[:, 1] * tl + cx[:, 2] * t2 + cx[:, 3] * t3 + cx[:, 4] * t4 + cx[:, 5] * t5
    states[:, 1] = cy[:, 0] + cy[:, 1] * tl + cy[:, 2] * t2 + cy[:, 3] * t3 + cy[:, 4] * t4 + cy[:, 5] * t5
    states[:, 3] = cx[:, 1] + 2 * cx[:, 2] * tl + 3 * cx[:, 3] * t2 + 4 * cx[:, 4] * t3 + 5 * cx[:, 5] * t4
    states[:, 4] = cy[:, 1] + 2 * cy[:, 2] * tl + 3 * cy[:, 3] * t2 + 4 * cy[:, 4] * t3 + 5 * cy[:, 5] * t4
    n_tail = int(round(settle_s / t_s))
    if n_tail > 0:
        tail = np.zeros((n_tail, 12))
        tail[:, 0:2] = pts[-1]
        states = np.vstack([states, tail])
    return states


def plan_path(
    grid: HexGrid,
    start: Position2D,
    goal: NodeId,
    d_now,
    params: CraftParams,
    t_s: float = 0.005,
    cruise_fraction: float = DEFAULT_CRUISE_FRACTION,
    settle_s: float = DEFAULT_SETTLE_S,
) -> Optional[DesirablePath]:
    """Minimum-predicted-energy hex path from ``start`` to node ``goal``.

    Returns ``UNREACHABLE`` (None) when no feasible path exists under the
    frozen wind ``d_now``.
    """
    if goal not in grid.nodes:
        raise ScenarioError(f"unknown goal node {goal}")
    start_hex = grid.containing_hex(start)
    goal_hex = grid.node_hex(goal)
    if start_hex == goal_hex:
        waypoints = [grid.center_position(start_hex)]
        states = desirable_states(waypoints, 1.0, t_s, settle_s)
        return DesirablePath(
            waypoints=waypoints,
            states=states,
            predicted_travel_time=states.shape[0] - 1,
            cost=0.0,
        )
    rec = search(grid, start_hex, goal_hex, d_now, params)
    if not rec.reached:
        return UNREACHABLE
    waypoints = [grid.center_position(h) for h in rec.chain()]
    speeds = cruise_speeds(waypoints, d_now, params, cruise_fraction)
    states = desirable_states(waypoints, speeds, t_s, settle_s)
    return DesirablePath(
        waypoints=waypoints,
        states=states,
        predicted_travel_time=states.shape[0] - 1,
        cost=rec.g[goal_hex],
    )
