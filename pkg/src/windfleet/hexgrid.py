"""Hexagonal tessellation of the flight area.

Pointy-top hexagons in axial coordinates (q, r): the east neighbor is
(q+1, r) and centers are

    x = side * sqrt(3) * (q + r/2)        y = side * 1.5 * r

so all six neighbor centers sit exactly ``side * sqrt(3)`` away.  The grid
covers every hex whose center lies inside the [0, width] x [0, height]
rectangle (hexes straddling the boundary are kept iff their center is
inside).  Grids are immutable after construction and safe to share.
"""

import math
from typing import Dict, FrozenSet, Iterable, List, Mapping, NamedTuple, Optional, Tuple

import numpy as np

from .errors import BoundsError, ScenarioError

SQRT3 = math.sqrt(3.0)

NodeId = int
UavId = int
Position2D = Tuple[float, float]


class HexCoord(NamedTuple):
    q: int
    r: int


# East first, then counter-clockwise (60-degree increments).
AXIAL_DIRECTIONS: Tuple[HexCoord, ...] = (
    HexCoord(1, 0),
    HexCoord(0, 1),
    HexCoord(-1, 1),
    HexCoord(-1, 0),
    HexCoord(0, -1),
    HexCoord(1, -1),
)

_EPS = 1e-9


class HexGrid:
    def __init__(
        self,
        width_m: float,
        height_m: float,
        side_m: float = 1.0,
        obstacles: Iterable[HexCoord] = (),
        nodes: Optional[Mapping[NodeId, HexCoord]] = None,
        depots: Optional[Mapping[UavId, NodeId]] = None,
    ):
        if width_m <= 0 or height_m <= 0 or side_m <= 0:
            raise ScenarioError("area dimensions and hex side must be positive")
        self.width_m = float(width_m)
        self.height_m = float(height_m)
        self.side_m = float(side_m)

        hexes: List[HexCoord] = []
        r = 0
        while side_m * 1.5 * r <= height_m + _EPS:
            # x = side*sqrt(3)*(q + r/2) in [0, width]
            q_lo = math.ceil(-r / 2.0 - _EPS)
            q_hi = math.floor(width_m / (side_m * SQRT3) - r / 2.0 + _EPS)
            for q in range(q_lo, q_hi + 1):
                hexes.append(HexCoord(q, r))
            r += 1
        self._hexes: Tuple[HexCoord, ...] = tuple(sorted(hexes))
        self._hex_set: FrozenSet[HexCoord] = frozenset(self._hexes)
        self._index: Dict[HexCoord, int] = {h: i for i, h in enumerate(self._hexes)}
        self._centers = np.array([self._center(h) for h in self._hexes], dtype=np.float64)

        self.obstacles: FrozenSet[HexCoord] = frozenset(HexCoord(*o) for o in obstacles)
        for o in self.obstacles:
            if o not in self._hex_set:
                raise ScenarioError(f"obstacle {o} outside the grid")

        self.nodes: Dict[NodeId, HexCoord] = {}
        if nodes:
            seen: Dict[HexCoord, NodeId] = {}
            for nid, h in nodes.items():
                h = HexCoord(*h)
                if h not in self._hex_set:
                    raise ScenarioError(f"node {nid} hex {h} outside the grid")
                if h in self.obstacles:
                    raise ScenarioError(f"node {nid} placed on obstacle hex {h}")
                if h in seen:
                    raise ScenarioError(f"nodes {seen[h]} and {nid} share hex {h}")
                seen[h] = nid
                self.nodes[int(nid)] = h

        self.depots: Dict[UavId, NodeId] = {}
        if depots:
            used: Dict[NodeId, UavId] = {}
            for uav, nid in depots.items():
                if nid not in self.nodes:
                    raise ScenarioError(f"depot node {nid} for uav {uav} is not a node")
                if nid in used:
                    raise ScenarioError(f"depot {nid} hosts uavs {used[nid]} and {uav}")
                used[nid] = uav
                self.depots[int(uav)] = int(nid)

    # -- geometry ---------------------------------------------------------

    def _center(self, h: HexCoord) -> Position2D:
        s = self.side_m
        return (s * SQRT3 * (h.q + h.r / 2.0), s * 1.5 * h.r)

    def __len__(self) -> int:
        return len(self._hexes)

    @property
    def hexes(self) -> Tuple[HexCoord, ...]:
        return self._hexes

    @property
    def centers(self) -> np.ndarray:
        """(H, 2) array of hex centers, ordered like ``hexes``."""
        return self._centers

    def hex_index(self, h: HexCoord) -> int:
        return self._index[h]

    def in_bounds(self, h: HexCoord) -> bool:
        return HexCoord(*h) in self._hex_set

    def center_position(self, h: HexCoord) -> Position2D:
        h = HexCoord(*h)
        if h not in self._hex_set:
            raise BoundsError(f"hex {h} outside the grid")
        return self._center(h)

    def neighbors(self, h: HexCoord) -> List[HexCoord]:
        """In-bounds neighbors of ``h``, east first then counter-clockwise."""
        h = HexCoord(*h)
        if h not in self._hex_set:
            raise BoundsError(f"hex {h} outside the grid")
        out = []
        for d in AXIAL_DIRECTIONS:
            n = HexCoord(h.q + d.q, h.r + d.r)
            if n in self._hex_set:
                out.append(n)
        return out

    def containing_hex(self, p: Position2D) -> HexCoord:
        """Hex whose region contains ``p``.

        Points equidistant from several centers go to the lexicographically
        smallest (q, r).  Positions are accepted up to one hex side outside
        the rectangle (craft can overshoot a boundary hex slightly); the
        result is always an in-grid hex, clamping to the nearest one when
        the geometric owner was clipped away at the boundary.
        """
        x, y = float(p[0]), float(p[1])
        m = self.side_m
        if not (-m <= x <= self.width_m + m and -m <= y <= self.height_m + m):
            raise BoundsError(f"position {p} outside the flight area")
        s = self.side_m
        rf = (2.0 / 3.0) * y / s
        qf = (SQRT3 / 3.0 * x - y / 3.0) / s
        base = _axial_round(qf, rf)
        best: Optional[HexCoord] = None
        best_d = math.inf
        fallback: Optional[HexCoord] = None
        fallback_d = math.inf
        for dq, dr in ((0, 0),) + tuple((d.q, d.r) for d in AXIAL_DIRECTIONS):
            cand = HexCoord(base.q + dq, base.r + dr)
            cx = s * SQRT3 * (cand.q + cand.r / 2.0)
            cy = s * 1.5 * cand.r
            d2 = (x - cx) ** 2 + (y - cy) ** 2
            if d2 < best_d - _EPS or (abs(d2 - best_d) <= _EPS and (best is None or cand < best)):
                best = cand
                best_d = d2
            if cand in self._hex_set and (
                d2 < fallback_d - _EPS
                or (abs(d2 - fallback_d) <= _EPS and (fallback is None or cand < fallback))
            ):
                fallback = cand
                fallback_d = d2
        if best in self._hex_set:
            return best
        if fallback is None:
            raise BoundsError(f"position {p} outside the flight area")
        return fallback

    # -- nodes and depots --------------------------------------------------

    def node_hex(self, nid: NodeId) -> HexCoord:
        return self.nodes[nid]

    def node_position(self, nid: NodeId) -> Position2D:
        return self._center(self.nodes[nid])

    def depot_hex(self, uav: UavId) -> HexCoord:
        return self.nodes[self.depots[uav]]

    def free_hexes(self) -> List[HexCoord]:
        """All non-obstacle hexes in deterministic (sorted) order."""
        return [h for h in self._hexes if h not in self.obstacles]


def _axial_round(qf: float, rf: float) -> HexCoord:
    """Round fractional axial coordinates via cube rounding."""
    sf = -qf - rf
    q = round(qf)
    r = round(rf)
    s = round(sf)
    dq = abs(q - qf)
    dr = abs(r - rf)
    ds = abs(s - sf)
    if dq > dr and dq > ds:
        q = -r - s
    elif dr > ds:
        r = -q - s
    return HexCoord(int(q), int(r))
