"""Wind models: the cyclic experiment pattern, traces, and worst/best-case vectors."""

import bisect
import math
from dataclasses import dataclass, field
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np

from .errors import DegenerateDirectionError


class WindVector(NamedTuple):
    dx: float
    dy: float

    @property
    def magnitude(self) -> float:
        return math.hypot(self.dx, self.dy)


ZERO_WIND = WindVector(0.0, 0.0)

# Compass directions as (east, north) unit vectors.
COMPASS = {
    "N": (0.0, 1.0),
    "S": (0.0, -1.0),
    "E": (1.0, 0.0),
    "W": (-1.0, 0.0),
}
_COMPASS_ORDER = ("N", "S", "E", "W")


def worst_case_wind(d_cap: float, travel_dir: Sequence[float]) -> WindVector:
    """Pure headwind at the cap: -d_cap * travel_dir (unit vector expected)."""
    ux, uy = float(travel_dir[0]), float(travel_dir[1])
    if ux == 0.0 and uy == 0.0:
        raise DegenerateDirectionError("travel direction must be nonzero")
    return WindVector(-d_cap * ux, -d_cap * uy)


def best_case_wind(d_cap: float, travel_dir: Sequence[float]) -> WindVector:
    """Pure tailwind at the cap: +d_cap * travel_dir (unit vector expected)."""
    ux, uy = float(travel_dir[0]), float(travel_dir[1])
    if ux == 0.0 and uy == 0.0:
        raise DegenerateDirectionError("travel direction must be nonzero")
    return WindVector(d_cap * ux, d_cap * uy)


@dataclass
class WindPattern:
    """Cyclic gusts: wind blows for ``blow_s`` out of every ``cycle_s`` seconds.

    Each cycle draws one compass direction (N/S/E/W, uniform) from a seeded
    stream, so the sequence is a pure function of (seed, cycle index).  The
    remaining ``cycle_s - blow_s`` seconds of each cycle are calm.
    """

    speed: float = 2.0
    blow_s: float = 30.0
    cycle_s: float = 40.0
    seed: int = 0
    _dirs: List[str] = field(default_factory=list, repr=False)
    _rng: np.random.Generator = field(default=None, repr=False)

    def __post_init__(self):
        if not 0.0 <= self.blow_s <= self.cycle_s:
            raise ValueError("blow_s must lie within [0, cycle_s]")
        self._rng = np.random.default_rng(self.seed)

    @property
    def cap(self) -> float:
        return self.speed

    def direction(self, cycle: int) -> str:
        """Compass direction of the given cycle (draws lazily, cached)."""
        while len(self._dirs) <= cycle:
            self._dirs.append(_COMPASS_ORDER[int(self._rng.integers(0, 4))])
        return self._dirs[cycle]

    def at_time(self, t: float) -> WindVector:
        if t < 0.0:
            raise ValueError("time must be nonnegative")
        cycle = int(t // self.cycle_s)
        if t - cycle * self.cycle_s < self.blow_s:
            ux, uy = COMPASS[self.direction(cycle)]
            return WindVector(self.speed * ux, self.speed * uy)
        return ZERO_WIND

    def vectors_for_range(self, k0: int, n: int, t_s: float) -> np.ndarray:
        """(n, 2) array of wind vectors for time indices k0..k0+n-1."""
        out = np.zeros((n, 2), dtype=np.float64)
        i = 0
        while i < n:
            t = (k0 + i) * t_s
            cycle = int(t // self.cycle_s)
            within = t - cycle * self.cycle_s
            if within < self.blow_s:
                seg_end = cycle * self.cycle_s + self.blow_s
                ux, uy = COMPASS[self.direction(cycle)]
                wx, wy = self.speed * ux, self.speed * uy
            else:
                seg_end = (cycle + 1) * self.cycle_s
                wx, wy = 0.0, 0.0
            # number of indices before the segment boundary
            j = min(n, int(math.ceil((seg_end / t_s) - k0 - 1e-9)) - i)
            j = max(j, 1)
            out[i : i + j, 0] = wx
            out[i : i + j, 1] = wy
            i += j
        return out


def wind_at(pattern: WindPattern, k: int, t_s: float = 0.005) -> WindVector:
    """Wind vector at time index ``k`` with sampling period ``t_s``."""
    if k < 0:
        raise ValueError("time index must be nonnegative")
    return pattern.at_time(k * t_s)


@dataclass
class WindTrace:
    """Piecewise-constant wind loaded from (time_s, dx, dy) rows."""

    rows: List[Tuple[float, float, float]]

    def __post_init__(self):
        self.rows = sorted((float(t), float(a), float(b)) for t, a, b in self.rows)
        if not self.rows or self.rows[0][0] > 0.0:
            self.rows.insert(0, (0.0, 0.0, 0.0))
        self._times = [r[0] for r in self.rows]

    @property
    def cap(self) -> float:
        return max(math.hypot(a, b) for _, a, b in self.rows)

    def at_time(self, t: float) -> WindVector:
        if t < 0.0:
            raise ValueError("time must be nonnegative")
        i = bisect.bisect_right(self._times, t) - 1
        _, a, b = self.rows[i]
        return WindVector(a, b)

    def vectors_for_range(self, k0: int, n: int, t_s: float) -> np.ndarray:
        out = np.zeros((n, 2), dtype=np.float64)
        for i in range(n):
            w = self.at_time((k0 + i) * t_s)
            out[i, 0] = w.dx
            out[i, 1] = w.dy
        return out

    @classmethod
    def from_csv(cls, path) -> "WindTrace":
        rows = []
        with open(path, "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("#") or line.lower().startswith("time"):
                    continue
                t, a, b = line.split(",")
                rows.append((float(t), float(a), float(b)))
        return cls(rows)


@dataclass
class NoWind:
    cap: float = 0.0

    def at_time(self, t: float) -> WindVector:
        return ZERO_WIND

    def vectors_for_range(self, k0: int, n: int, t_s: float) -> np.ndarray:
        return np.zeros((n, 2), dtype=np.float64)
