"""Synchronous node-division protocol partitioning unvisited nodes among UAVs.

Phase 1 (no communication): each UAV scans unvisited nodes in ascending
distance and claims a node only when twice its worst-case roundtrip energy
over everything claimed so far plus the candidate stays below every other
UAV's best-case energy to that candidate -- i.e. the node is uncontested
even under adversarial wind.  Energies are straight-line estimates with
cap-magnitude head/tailwind, since no paths exist yet at division time.

Phase 2 (one bid round): leftovers are auctioned by marginal tour growth.
Each UAV estimates its tour length as c*sqrt(n*A) with A the area of the
minimum enclosing circle of its position plus claimed nodes, bids the
increase for each leftover node, and the strict minimum bidder (ties to the
lowest UAV id) takes it.  Bids cross the bus as fixed-precision decimal
strings so every agent computes the identical argmin.

The resulting goal sets are pairwise disjoint and cover the input node set;
``validate_partition`` asserts this after every run.
"""

import math
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from .disturbance import best_case_wind, worst_case_wind
from .errors import InternalConsistencyError
from .hexgrid import NodeId, Position2D, UavId
from .msgbus import SyncBus
from .quadrotor import CraftParams, travel_energy

# Tour-length constant in L ~ c*sqrt(n*A); the classical uniform-point value.
BHH_CONSTANT = 0.7124

# Bids are serialized to this many decimal places before comparison.
BID_DECIMALS = 9


@dataclass
class GoalSet:
    owner: UavId
    nodes: Set[NodeId] = field(default_factory=set)


@dataclass
class TourEstimate:
    circ_area_m2: float
    est_length: float
    deltas: Optional[Dict[NodeId, float]] = None


def _line_energy(p_a: Position2D, p_v: Position2D, d_cap: float, params: CraftParams, worst: bool) -> float:
    """Straight-line energy with a cap-magnitude head- or tailwind."""
    dx = p_v[0] - p_a[0]
    dy = p_v[1] - p_a[1]
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        return 0.0
    u = (dx / dist, dy / dist)
    wind = worst_case_wind(d_cap, u) if worst else best_case_wind(d_cap, u)
    return travel_energy(p_a, p_v, wind, params)


def phase1_claim(
    agent: UavId,
    candidates: Mapping[NodeId, Position2D],
    own_pos: Position2D,
    other_pos: Mapping[UavId, Position2D],
    d_cap: float,
    params: CraftParams,
) -> GoalSet:
    """Distance-ordered uncontested claims (no communication needed).

    A candidate is claimed iff for every other UAV, twice the worst-case
    energy sum over the claimed set plus the candidate is strictly below
    that UAV's best-case energy to the candidate.
    """
    goal = GoalSet(owner=agent)
    order = sorted(
        candidates.items(),
        key=lambda kv: ((kv[1][0] - own_pos[0]) ** 2 + (kv[1][1] - own_pos[1]) ** 2, kv[0]),
    )
    claimed_worst_sum = 0.0
    for nid, pos in order:
        e_worst = _line_energy(own_pos, pos, d_cap, params, worst=True)
        trial_sum = claimed_worst_sum + e_worst
        ok = True
        for other, opos in other_pos.items():
            if other == agent:
                continue
            e_min_other = _line_energy(opos, pos, d_cap, params, worst=False)
            if not (2.0 * trial_sum < e_min_other):
                ok = False
                break
        if ok:
            goal.nodes.add(nid)
            claimed_worst_sum = trial_sum
    return goal


def min_enclosing_circle(points: Sequence[Position2D]) -> Tuple[float, float, float]:
    """Smallest circle containing all points, as (cx, cy, radius).

    Deterministic incremental construction (no random shuffle): worst case
    O(n^3) but the point sets here are tiny.
    """
    pts = [(float(x), float(y)) for x, y in points]
    if not pts:
        return (0.0, 0.0, 0.0)
    c = (pts[0][0], pts[0][1], 0.0)
    for i, p in enumerate(pts):
        if not _in_circle(c, p):
            c = (p[0], p[1], 0.0)
            for j in range(i):
                q = pts[j]
                if not _in_circle(c, q):
                    c = _diameter(p, q)
                    for k in range(j):
                        s = pts[k]
                        if not _in_circle(c, s):
                            c = _circumcircle(p, q, s)
    return c


_MEC_EPS = 1e-10


def _in_circle(c: Tuple[float, float, float], p: Position2D) -> bool:
    return math.hypot(p[0] - c[0], p[1] - c[1]) <= c[2] * (1.0 + _MEC_EPS) + _MEC_EPS


def _diameter(p: Position2D, q: Position2D) -> Tuple[float, float, float]:
    cx = (p[0] + q[0]) / 2.0
    cy = (p[1] + q[1]) / 2.0
    return (cx, cy, math.hypot(p[0] - cx, p[1] - cy))


def _circumcircle(p, q, s) -> Tuple[float, float, float]:
    ax, ay = p
    bx, by = q
    cx, cy = s
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if abs(d) < 1e-14:
        # collinear: fall back to the widest diameter
        cands = [_diameter(p, q), _diameter(p, s), _diameter(q, s)]
        return max(cands, key=lambda c: c[2])
    ux = ((ax**2 + ay**2) * (by - cy) + (bx**2 + by**2) * (cy - ay) + (cx**2 + cy**2) * (ay - by)) / d
    uy = ((ax**2 + ay**2) * (cx - bx) + (bx**2 + by**2) * (ax - cx) + (cx**2 + cy**2) * (bx - ax)) / d
    r = max(math.hypot(ax - ux, ay - uy), math.hypot(bx - ux, by - uy), math.hypot(cx - ux, cy - uy))
    return (ux, uy, r)


def tour_length_estimate(
    node_positions: Sequence[Position2D],
    own_pos: Position2D,
    c: float = BHH_CONSTANT,
) -> TourEstimate:
    """Expected tour length through the UAV position and its nodes.

    n counts the UAV itself; a solitary UAV has zero tour, and a single
    node makes the segment to it the circle's diameter.
    """
    pts = [own_pos] + list(node_positions)
    n = len(pts)
    if n == 1:
        return TourEstimate(circ_area_m2=0.0, est_length=0.0)
    _, _, radius = min_enclosing_circle(pts)
    area = math.pi * radius * radius
    return TourEstimate(circ_area_m2=area, est_length=c * math.sqrt(n * area))


def bid_deltas(
    claimed_positions: Sequence[Position2D],
    leftover: Mapping[NodeId, Position2D],
    own_pos: Position2D,
    c: float = BHH_CONSTANT,
) -> Dict[NodeId, float]:
    """Marginal tour growth for adding each leftover node to the claimed set."""
    base = tour_length_estimate(claimed_positions, own_pos, c).est_length
    deltas = {}
    for nid, pos in leftover.items():
        grown = tour_length_estimate(list(claimed_positions) + [pos], own_pos, c).est_length
        deltas[nid] = grown - base
    return deltas


def encode_bids(deltas: Mapping[NodeId, float]) -> Dict[str, str]:
    """Fixed-precision wire form of a bid set (keys stringified for JSON)."""
    return {str(nid): f"{delta:.{BID_DECIMALS}f}" for nid, delta in deltas.items()}


def assign_leftovers(bids_by_agent: Mapping[UavId, Mapping[str, str]]) -> Dict[NodeId, UavId]:
    """Winner per leftover node: strict minimum bid, ties to the lowest UAV id.

    Pure function of the gathered bid tables, so every agent derives the
    identical assignment.
    """
    winners: Dict[NodeId, UavId] = {}
    nodes: Set[str] = set()
    for table in bids_by_agent.values():
        nodes.update(table.keys())
    for key in sorted(nodes, key=int):
        best: Optional[Tuple[float, UavId]] = None
        for agent in sorted(bids_by_agent):
            table = bids_by_agent[agent]
            if key not in table:
                raise InternalConsistencyError(f"agent {agent} missing bid for node {key}")
            bid = float(table[key])
            if best is None or bid < best[0]:
                best = (bid, agent)
        winners[int(key)] = best[1]
    return winners


def run_division(
    bus: SyncBus,
    positions: Mapping[UavId, Position2D],
    unvisited: Mapping[NodeId, Position2D],
    d_cap: float,
    params: CraftParams,
    c: float = BHH_CONSTANT,
) -> Dict[UavId, GoalSet]:
    """Full two-phase division over the bus; returns one GoalSet per agent.

    Runs the claims round even when phase 1 is empty and the bid round even
    when nothing is left over, keeping the round structure identical for
    all agents.
    """
    agents = bus.agents
    claims = {
        a: phase1_claim(a, unvisited, positions[a], positions, d_cap, params) for a in agents
    }
    gathered = bus.exchange("claims", {a: sorted(claims[a].nodes) for a in agents})
    claimed_union: Set[NodeId] = set()
    for inbox in gathered.values():
        for nodes in inbox.values():
            claimed_union.update(nodes)
        break
    leftover = {nid: pos for nid, pos in unvisited.items() if nid not in claimed_union}

    bids = {}
    for a in agents:
        claimed_pos = [unvisited[nid] for nid in sorted(claims[a].nodes)]
        bids[a] = encode_bids(bid_deltas(claimed_pos, leftover, positions[a], c))
    gathered = bus.exchange("bids", bids)
    winners = assign_leftovers(next(iter(gathered.values())))

    goal_sets = {a: claims[a] for a in agents}
    for nid, winner in winners.items():
        goal_sets[winner].nodes.add(nid)
    validate_partition(goal_sets, set(unvisited))
    return goal_sets


def validate_partition(goal_sets: Mapping[UavId, GoalSet], universe: Set[NodeId]) -> None:
    """Assert pairwise disjointness and exact coverage of the node universe."""
    seen: Dict[NodeId, UavId] = {}
    for agent, gs in goal_sets.items():
        for nid in gs.nodes:
            if nid in seen:
                raise InternalConsistencyError(
                    f"node {nid} assigned to both {seen[nid]} and {agent}"
                )
            seen[nid] = agent
    if set(seen) != universe:
        missing = universe - set(seen)
        extra = set(seen) - universe
        raise InternalConsistencyError(
            f"partition mismatch: missing={sorted(missing)} extra={sorted(extra)}"
        )
