"""Scenario generation, batch experiments, statistics, and the case study.

Nodes and depots are scattered uniformly over distinct non-obstacle hex
centers.  Batches run the same scenarios under one policy (or both, for
comparisons), aggregate per-run realized energy and report a Student-t 95%
confidence half-width.  All randomness flows from one master seed through
``numpy.random.SeedSequence``, so batch CSV output is byte-stable.
"""

import csv
import io
import math
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy import stats

from .disturbance import NoWind, WindPattern, WindTrace
from .errors import CapacityError
from .hexgrid import HexGrid
from .mission import Mission, MissionConfig, MissionResult, Policy
from .quadrotor import CraftParams, default_craft
from .scenario import Scenario

AREA_PRESETS = {
    "small": (52.0, 30.0),
    "medium": (78.0, 45.0),
    "large": (104.0, 60.0),
}

WIND_PRESETS = {"low": 2.0, "high": 8.0, "none": 0.0}


@dataclass
class ExperimentConfig:
    width_m: float = 52.0
    height_m: float = 30.0
    side_m: float = 1.0
    n_nodes: int = 30
    n_uavs: int = 4
    n_obstacles: int = 0
    wind_speed: float = 2.0  # 0 disables wind
    nd_period_s: Optional[float] = 10.0
    op_enabled: bool = True
    runs: int = 20
    seed: int = 1
    mission: MissionConfig = field(default_factory=MissionConfig)

    def mission_config(self) -> MissionConfig:
        return replace(
            self.mission, nd_period_s=self.nd_period_s, op_enabled=self.op_enabled
        )


def generate_scenario(cfg: ExperimentConfig, seed: int, craft: Optional[CraftParams] = None) -> Scenario:
    """Random scenario: obstacles, then task nodes and depots on free hexes.

    UAV ``i`` starts at depot node ``i`` (ids 1..n_uavs); task nodes get ids
    from n_uavs+1.  Deterministic per seed.
    """
    rng = np.random.default_rng(seed)
    base = HexGrid(cfg.width_m, cfg.height_m, cfg.side_m)
    all_hexes = list(base.hexes)
    need = cfg.n_obstacles + cfg.n_nodes + cfg.n_uavs
    if need > len(all_hexes):
        raise CapacityError(
            f"{need} placements requested but the grid has {len(all_hexes)} hexes"
        )
    picks = rng.choice(len(all_hexes), size=need, replace=False)
    obstacles = [all_hexes[i] for i in picks[: cfg.n_obstacles]]
    spots = [all_hexes[i] for i in picks[cfg.n_obstacles :]]
    nodes = {}
    depots = {}
    for u in range(cfg.n_uavs):
        nodes[u + 1] = spots[u]
        depots[u + 1] = u + 1
    for j in range(cfg.n_nodes):
        nodes[cfg.n_uavs + 1 + j] = spots[cfg.n_uavs + j]
    grid = HexGrid(
        cfg.width_m, cfg.height_m, cfg.side_m, obstacles=obstacles, nodes=nodes, depots=depots
    )
    if cfg.wind_speed > 0.0:
        wind = WindPattern(speed=cfg.wind_speed, seed=int(rng.integers(0, 2**31)))
    else:
        wind = NoWind()
    return Scenario(
        grid=grid,
        wind=wind,
        wind_cap=cfg.wind_speed,
        craft=craft or default_craft(),
        seed=seed,
        name=f"random-{seed}",
    )


def run_greedy(scenario: Scenario, config: Optional[MissionConfig] = None) -> MissionResult:
    """Greedy baseline on the shared flight machinery."""
    return Mission(scenario, config, policy="greedy").run()


@dataclass
class BatchResult:
    policy: str
    seeds: List[int]
    totals: List[float]  # per successful run, in seed order
    failures: List[Tuple[int, str]]
    config: ExperimentConfig

    @property
    def mean(self) -> float:
        return float(np.mean(self.totals)) if self.totals else math.nan

    @property
    def ci_halfwidth(self) -> Optional[float]:
        """95% Student-t confidence half-width; None for fewer than 2 runs."""
        n = len(self.totals)
        if n < 2:
            return None
        sem = float(np.std(self.totals, ddof=1)) / math.sqrt(n)
        return float(stats.t.ppf(0.975, n - 1)) * sem

    def summary(self) -> str:
        ci = self.ci_halfwidth
        ci_txt = f"+-{ci:.1f}" if ci is not None else "n/a"
        return (
            f"{self.policy}: {len(self.totals)} runs, mean {self.mean:.1f} J ({ci_txt}), "
            f"{len(self.failures)} failed"
        )


def _run_seeds(cfg: ExperimentConfig) -> List[int]:
    ss = np.random.SeedSequence(cfg.seed)
    return [int(s.generate_state(1)[0]) for s in ss.spawn(cfg.runs)]


def run_batch(cfg: ExperimentConfig, policy: Policy = "division") -> BatchResult:
    """Run ``cfg.runs`` seeded scenarios under one policy.

    Individual run failures are recorded and the batch continues; every
    successful run's plan record is validated against the scenario's node
    set before its energy counts.
    """
    seeds = _run_seeds(cfg)
    totals: List[float] = []
    kept: List[int] = []
    failures: List[Tuple[int, str]] = []
    mission_cfg = cfg.mission_config()
    for seed in seeds:
        try:
            scenario = generate_scenario(cfg, seed)
            result = Mission(scenario, mission_cfg, policy=policy).run()
            result.record.validate(set(scenario.grid.nodes))
            totals.append(result.total_energy)
            kept.append(seed)
        except Exception as exc:  # noqa: BLE001 - batch robustness is the contract
            failures.append((seed, f"{type(exc).__name__}: {exc}"))
    return BatchResult(policy=policy, seeds=kept, totals=totals, failures=failures, config=cfg)


@dataclass
class CompareResult:
    division: BatchResult
    greedy: BatchResult

    @property
    def savings(self) -> float:
        """Mean energy saving of the routing stack relative to greedy."""
        return 1.0 - self.division.mean / self.greedy.mean

    def summary(self) -> str:
        return (
            f"{self.division.summary()}\n{self.greedy.summary()}\n"
            f"savings vs greedy: {100.0 * self.savings:.1f}%"
        )


def compare_policies(cfg: ExperimentConfig) -> CompareResult:
    return CompareResult(division=run_batch(cfg, "division"), greedy=run_batch(cfg, "greedy"))


def batch_csv(results: Sequence[BatchResult]) -> str:
    """Byte-stable CSV of per-run totals for one or more batches."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["policy", "run_index", "seed", "total_energy_j"])
    for res in results:
        for i, (seed, total) in enumerate(zip(res.seeds, res.totals)):
            writer.writerow([res.policy, i, seed, f"{total:.6f}"])
        for seed, err in res.failures:
            writer.writerow([res.policy, "failed", seed, err])
    return buf.getvalue()


def trace_csv(result: MissionResult, t_s: float) -> str:
    """Per-tick flight trace: t, uav, x, y, goal, cumulative energy."""
    if result.trace is None:
        raise ValueError("mission was run without collect_trace")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_s", "uav", "x_m", "y_m", "goal", "energy_j"])
    for uid in sorted(result.trace):
        for k0, xy, e_cum, goal in result.trace[uid]:
            for i in range(xy.shape[0]):
                writer.writerow(
                    [
                        f"{(k0 + i + 1) * t_s:.3f}",
                        uid,
                        f"{xy[i, 0]:.6f}",
                        f"{xy[i, 1]:.6f}",
                        goal if goal is not None else "",
                        f"{e_cum[i]:.6f}",
                    ]
                )
    return buf.getvalue()


def events_csv(result: MissionResult, t_s: float) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t_s", "uav", "kind", "data"])
    for ev in result.events:
        writer.writerow([f"{ev.k * t_s:.3f}", ev.uav if ev.uav is not None else "", ev.kind, repr(ev.data)])
    return buf.getvalue()


def _hex_nearest(grid: HexGrid, x: float, y: float):
    c = grid.centers
    i = int(np.argmin((c[:, 0] - x) ** 2 + (c[:, 1] - y) ** 2))
    return grid.hexes[i]


def build_replanning_case_study() -> Scenario:
    """Two UAVs, six nodes, and an 8 m/s north-to-south gust at departure.

    UAV 1 starts between two near-tied goals: node 3 just north (its calm
    choice) and node 4 south.  The gust begins right after departure and
    covers the whole northbound leg, so replanning should swap the order:
    ride the gust south first and fly north in calm air.  The craft carries
    a larger drag area than the default so an upwind leg in the gust is
    genuinely expensive; absolute Joules are configuration-dependent
    (direction of the comparison is the point).
    """
    base = HexGrid(52.0, 30.0, 1.0)
    nodes = {
        1: _hex_nearest(base, 14.0, 15.0),  # depot uav 1
        2: _hex_nearest(base, 48.0, 27.0),  # depot uav 2
        3: _hex_nearest(base, 14.0, 28.5),  # north of depot 1 (upwind in gust)
        4: _hex_nearest(base, 14.0, 0.5),   # south of depot 1 (downwind in gust)
        5: _hex_nearest(base, 38.0, 15.0),
        6: _hex_nearest(base, 44.0, 25.0),
    }
    grid = HexGrid(52.0, 30.0, 1.0, nodes=nodes, depots={1: 1, 2: 2})
    wind = WindTrace(rows=[(0.0, 0.0, 0.0), (0.5, 0.0, -8.0), (12.0, 0.0, 0.0)])
    craft = CraftParams(ref_area_m2=0.05, drag_coeff=1.2)
    return Scenario(
        grid=grid,
        wind=wind,
        wind_cap=8.0,
        craft=craft,
        seed=0,
        name="replanning-case-study",
    )


def case_study_config(op_enabled: bool) -> MissionConfig:
    """Mission settings for the case study: one-time division, faster cruise
    fraction to suit the draggier craft."""
    return MissionConfig(
        nd_period_s=None,
        op_enabled=op_enabled,
        cruise_fraction=0.08,
        tilt_max=1.3,
    )
