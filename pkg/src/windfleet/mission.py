"""Per-agent mission loop: goal selection, risk-scheduled replanning, travel.

The world advances on a lockstep clock shared by all agents.  Between
synchronous events (node-division rounds, visited-set gossip) each agent
flies independently; everything that can change shared knowledge -- claims,
arrivals followed by replanning -- is processed in global (time index,
agent id) order, so a single-threaded run is causally consistent and two
runs with the same seed are bit-identical.

Two decision policies share every line of the flight machinery (A*
references, PD tracking, dynamics, energy ledger):

* ``division`` -- the routing stack: synchronous node division, per-goal
  energy triples, min-predicted-energy goal choice, risk-driven replanning
  interval, periodic redivision and visited-set gossip.
* ``greedy`` -- each idle UAV claims the Euclidean-closest unvisited
  unclaimed node (claims visible instantly, ties to the lower id) and flies
  it without mid-flight replanning.

Agents whose goal set empties land (zero power) and lift off again only if
a later redivision hands them work; the plan record maps them to the bottom
choice while landed.
"""

import heapq
import math
from bisect import bisect_right
from dataclasses import dataclass, field
from typing import Dict, List, Literal, Mapping, Optional, Set, Tuple

import numpy as np

from . import _kernels
from .astar import DEFAULT_CRUISE_FRACTION, DEFAULT_SETTLE_S, DesirablePath, plan_path
from .division import BHH_CONSTANT, run_division
from .errors import InternalConsistencyError, SimulationTimeout
from .hexgrid import NodeId, UavId
from .msgbus import SyncBus, gossip_visited
from .pid import DEFAULT_TILT_MAX, EnergyTriple, PidGains, default_gains, predict_energy_triple
from .quadrotor import UavState
from .scenario import Scenario

Policy = Literal["division", "greedy"]


# ---------------------------------------------------------------------------
# planner primitives


def select_goal(goal_nodes: Set[NodeId], triples: Mapping[NodeId, EnergyTriple]) -> Optional[NodeId]:
    """Node with minimum predicted energy; ties to the lower id; None if empty
    or nothing is feasible."""
    if not goal_nodes:
        return None
    best: Optional[Tuple[float, NodeId]] = None
    for nid in sorted(goal_nodes):
        if nid not in triples:
            raise InternalConsistencyError(f"missing energy triple for node {nid}")
        e = triples[nid].predicted
        if not math.isfinite(e):
            continue
        if best is None or e < best[0]:
            best = (e, nid)
    return best[1] if best else None


RISK_DENOMINATOR_EPS = 1e-9


def risk_number(goal_triple: EnergyTriple, v_triple: EnergyTriple) -> float:
    """Risk that node v could overtake the goal as energy-minimal.

    max{E_goal_worst - E_v_best, 0} over (E_v_worst - E_goal_best), with the
    denominator clamped below by a small epsilon so degenerate triples give
    a large finite risk instead of a division by zero.
    """
    num = goal_triple.worst - v_triple.best
    if num < 0.0 or math.isnan(num):
        num = 0.0
    den = v_triple.worst - goal_triple.best
    if not den > RISK_DENOMINATOR_EPS:  # also catches nan
        den = RISK_DENOMINATOR_EPS
    if math.isinf(den):
        return 0.0 if not math.isinf(num) else 1.0
    return num / den


def replanning_interval(r_max: float, alpha: float, beta: float, tau_cap: float) -> float:
    """tau = alpha * (1 + beta / r_max), clipped to [alpha, tau_cap].

    Zero risk means the current goal cannot be overtaken, so the interval
    saturates at the cap.
    """
    if alpha <= 0.0 or beta <= 0.0:
        raise ValueError("alpha and beta must be positive")
    if r_max <= 0.0:
        return tau_cap
    tau = alpha * (1.0 + beta / r_max)
    return min(max(tau, alpha), tau_cap)


# ---------------------------------------------------------------------------
# configuration and records


@dataclass
class MissionConfig:
    nd_period_s: Optional[float] = 10.0  # None: single division at t=0
    op_enabled: bool = True
    t_c_s: float = 5.0
    alpha_s: float = 1.0
    beta: float = 1.0
    tau_cap_s: float = 120.0
    t_s: float = 0.005
    cruise_fraction: float = DEFAULT_CRUISE_FRACTION
    settle_s: float = DEFAULT_SETTLE_S
    tilt_max: float = DEFAULT_TILT_MAX
    arrive_radius_frac: float = 0.25  # fraction of the hex side
    arrive_speed: float = 0.1
    stuck_timeout_s: float = 3.0
    max_sim_s: float = 900.0
    bhh_c: float = BHH_CONSTANT
    gains: PidGains = field(default_factory=default_gains)


@dataclass
class Event:
    k: int
    uav: Optional[UavId]
    kind: str
    data: dict = field(default_factory=dict)


@dataclass
class PlanRecord:
    """The realized plan: per-agent choice segments, visits and energy."""

    agents: List[UavId]
    segments: Dict[UavId, List[Tuple[int, Optional[NodeId]]]] = field(default_factory=dict)
    visits: Dict[NodeId, Tuple[UavId, int]] = field(default_factory=dict)
    per_uav_energy: Dict[UavId, float] = field(default_factory=dict)
    per_uav_hover_energy: Dict[UavId, float] = field(default_factory=dict)
    T: int = 0
    aborted: bool = False

    def __post_init__(self):
        for a in self.agents:
            self.segments.setdefault(a, [])
            self.per_uav_energy.setdefault(a, 0.0)
            self.per_uav_hover_energy.setdefault(a, 0.0)

    def record_choice(self, agent: UavId, k: int, choice: Optional[NodeId]) -> None:
        seg = self.segments[agent]
        if seg and seg[-1][0] == k:
            seg[-1] = (k, choice)
            return
        if seg and seg[-1][1] == choice:
            return
        seg.append((k, choice))

    def record_visit(self, agent: UavId, k: int, node: NodeId) -> None:
        if node in self.visits:
            raise InternalConsistencyError(
                f"node {node} visited twice ({self.visits[node]} then ({agent}, {k}))"
            )
        self.visits[node] = (agent, k)

    def choice_at(self, agent: UavId, k: int) -> Optional[NodeId]:
        seg = self.segments[agent]
        i = bisect_right(seg, (k, math.inf)) - 1
        return seg[i][1] if i >= 0 else None

    @property
    def total_energy(self) -> float:
        return sum(self.per_uav_energy.values())

    def validate(self, all_nodes: Set[NodeId]) -> None:
        """Check the plan constraints; raises InternalConsistencyError."""
        if self.aborted:
            raise InternalConsistencyError("mission aborted before completion")
        # termination: every agent ends on the bottom choice
        for a in self.agents:
            seg = self.segments[a]
            if not seg or seg[-1][1] is not None:
                raise InternalConsistencyError(f"agent {a} never terminated")
        # coverage and single visit
        if set(self.visits) != all_nodes:
            missing = all_nodes - set(self.visits)
            raise InternalConsistencyError(f"unvisited nodes remain: {sorted(missing)}")
        # chosen-node union covers V (every visit happens while chosen)
        chosen = {c for seg in self.segments.values() for _, c in seg if c is not None}
        if chosen != all_nodes:
            raise InternalConsistencyError("chosen nodes do not cover the node set")
        # no two agents choose the same node at the same index
        intervals: Dict[NodeId, List[Tuple[int, int, UavId]]] = {}
        for a in self.agents:
            seg = self.segments[a]
            for i, (k, c) in enumerate(seg):
                if c is None:
                    continue
                end = seg[i + 1][0] if i + 1 < len(seg) else self.T + 1
                intervals.setdefault(c, []).append((k, end, a))
        for node, spans in intervals.items():
            spans.sort()
            for (s1, e1, a1), (s2, e2, a2) in zip(spans, spans[1:]):
                if a1 != a2 and s2 < e1:
                    raise InternalConsistencyError(
                        f"agents {a1} and {a2} both chose node {node} at index {s2}"
                    )


@dataclass
class MissionResult:
    record: PlanRecord
    events: List[Event]
    sim_time_s: float
    sat_steps: int
    trace: Optional[Dict[UavId, List[Tuple[int, np.ndarray, np.ndarray, Optional[NodeId]]]]] = None

    @property
    def total_energy(self) -> float:
        return self.record.total_energy


# ---------------------------------------------------------------------------
# runtime state per agent


@dataclass
class _Agent:
    uid: UavId
    state: np.ndarray
    goal_nodes: Set[NodeId] = field(default_factory=set)
    known_visited: Set[NodeId] = field(default_factory=set)
    goal: Optional[NodeId] = None
    path: Optional[DesirablePath] = None
    path_clock: int = 0
    path_start_k: int = 0
    path_wind: Tuple[float, float] = (0.0, 0.0)
    next_plan_k: int = 0
    needs_plan: bool = True
    landed: bool = False
    energy: float = 0.0
    sat_steps: int = 0

    @property
    def xy(self) -> Tuple[float, float]:
        return (float(self.state[0]), float(self.state[1]))


class Mission:
    """One simulated mission over a scenario with a chosen decision policy."""

    def __init__(
        self,
        scenario: Scenario,
        config: Optional[MissionConfig] = None,
        policy: Policy = "division",
        collect_trace: bool = False,
    ):
        if policy not in ("division", "greedy"):
            raise ValueError(f"unknown policy {policy!r}")
        self.scenario = scenario
        self.config = config or MissionConfig()
        self.policy = policy
        self.grid = scenario.grid
        self.params = scenario.craft
        self.wind = scenario.wind
        self.d_cap = scenario.wind_cap
        self.collect_trace = collect_trace

        cfg = self.config
        self._ctl = cfg.gains.ctl_array(cfg.tilt_max)
        self._par = self.params.kernel_params
        side = self.grid.side_m
        self._arrive_r2 = (cfg.arrive_radius_frac * side) ** 2
        self._arrive_v2 = cfg.arrive_speed**2

        ids = sorted(self.grid.depots)
        if not ids:
            raise ValueError("scenario has no depots")
        self.agents: Dict[UavId, _Agent] = {}
        depot_nodes = set()
        for uid in ids:
            cx, cy = self.grid.node_position(self.grid.depots[uid])
            self.agents[uid] = _Agent(uid=uid, state=UavState.at_rest(cx, cy).as_vector())
            depot_nodes.add(self.grid.depots[uid])
        self.depot_nodes = depot_nodes
        self.bus = SyncBus(ids)
        self.record = PlanRecord(agents=ids)
        self.events: List[Event] = []
        self.unvisited: Set[NodeId] = set(self.grid.nodes) - depot_nodes
        self.claims: Dict[NodeId, UavId] = {}  # greedy only
        self._trace: Dict[UavId, list] = {uid: [] for uid in ids} if collect_trace else None

    # -- helpers -----------------------------------------------------------

    def _event(self, k: int, uav: Optional[UavId], kind: str, **data):
        self.events.append(Event(k=k, uav=uav, kind=kind, data=data))

    def _wind_now(self, k: int):
        return self.wind.at_time(k * self.config.t_s)

    def _land(self, agent: _Agent, k: int, reason: str):
        already = agent.landed
        agent.landed = True
        agent.goal = None
        agent.path = None
        agent.needs_plan = False
        if not already:
            self.record.record_choice(agent.uid, max(k, 1), None)
            self._event(k, agent.uid, "land", reason=reason)

    def _visit(self, agent: _Agent, k: int, node: NodeId):
        self.record.record_visit(agent.uid, k, node)
        self.unvisited.discard(node)
        agent.known_visited.add(node)
        agent.goal_nodes.discard(node)
        self.claims.pop(node, None)
        agent.goal = None
        agent.path = None
        agent.needs_plan = True
        self._event(k, agent.uid, "arrival", node=node)

    # -- planning ----------------------------------------------------------

    def _plan_division(self, agent: _Agent, k: int):
        cfg = self.config
        cands = {n for n in agent.goal_nodes if n not in agent.known_visited}
        if not cands:
            self._land(agent, k, "goal set empty")
            return
        d_now = self._wind_now(k)
        pos = agent.xy
        paths: Dict[NodeId, Optional[DesirablePath]] = {}
        triples: Dict[NodeId, EnergyTriple] = {}
        for nid in sorted(cands):
            path = plan_path(
                self.grid, pos, nid, d_now, self.params, cfg.t_s, cfg.cruise_fraction, cfg.settle_s
            )
            paths[nid] = path
            if path is None:
                triples[nid] = EnergyTriple(math.inf, math.inf, math.inf)
            else:
                x0 = UavState.from_vector(path.states[0])
                triples[nid] = predict_energy_triple(
                    path,
                    x0,
                    d_now,
                    self.d_cap,
                    cfg.gains,
                    self.params,
                    cfg.t_s,
                    cfg.tilt_max,
                    cfg.cruise_fraction,
                    cfg.settle_s,
                )
        goal = select_goal(cands, triples)
        if goal is None:
            # nothing reachable under the current wind: release and land
            agent.goal_nodes.clear()
            self._land(agent, k, "all goals infeasible")
            self._event(k, agent.uid, "release", nodes=sorted(cands))
            return
        r_max = 0.0
        for nid in cands:
            if nid == goal:
                continue
            r_max = max(r_max, risk_number(triples[goal], triples[nid]))
        tau = replanning_interval(r_max, cfg.alpha_s, cfg.beta, cfg.tau_cap_s)
        agent.next_plan_k = k + max(1, int(math.ceil(tau / cfg.t_s - 1e-9)))
        exhausted = agent.path is not None and agent.path_clock >= agent.path.predicted_travel_time
        # keep the in-flight reference when nothing changed (no stop-start
        # stutter); re-time it when the planning wind moved since it was made
        wind_changed = (
            abs(d_now[0] - agent.path_wind[0]) > 1e-9
            or abs(d_now[1] - agent.path_wind[1]) > 1e-9
        )
        if goal != agent.goal or agent.path is None or exhausted or wind_changed:
            if goal != agent.goal and agent.goal is not None:
                self._event(k, agent.uid, "goal_switch", old=agent.goal, new=goal)
            agent.goal = goal
            agent.path = paths[goal]
            agent.path_clock = 0
            agent.path_start_k = k
            agent.path_wind = (float(d_now[0]), float(d_now[1]))
            self.record.record_choice(agent.uid, max(k, 1), goal)
        agent.landed = False
        agent.needs_plan = False

    def _plan_greedy(self, agent: _Agent, k: int):
        cfg = self.config
        d_now = self._wind_now(k)
        pos = agent.xy
        if agent.goal is not None:
            if agent.path is not None and agent.path_clock < agent.path.predicted_travel_time:
                agent.needs_plan = False
                return
            # reference exhausted without arrival: fresh path to the same claim
            path = plan_path(
                self.grid, pos, agent.goal, d_now, self.params, cfg.t_s, cfg.cruise_fraction, cfg.settle_s
            )
            if path is not None:
                agent.path = path
                agent.path_clock = 0
                agent.path_start_k = k
                agent.path_wind = (float(d_now[0]), float(d_now[1]))
                agent.needs_plan = False
                return
            self._event(k, agent.uid, "unreachable", node=agent.goal)
            self.claims.pop(agent.goal, None)
            agent.goal = None
            agent.path = None
        free = [n for n in self.unvisited if n not in self.claims]
        order = sorted(
            free,
            key=lambda n: (
                (self.grid.node_position(n)[0] - pos[0]) ** 2
                + (self.grid.node_position(n)[1] - pos[1]) ** 2,
                n,
            ),
        )
        for nid in order:
            path = plan_path(
                self.grid, pos, nid, d_now, self.params, cfg.t_s, cfg.cruise_fraction, cfg.settle_s
            )
            if path is None:
                self._event(k, agent.uid, "unreachable", node=nid)
                continue
            self.claims[nid] = agent.uid
            agent.goal = nid
            agent.path = path
            agent.path_clock = 0
            agent.path_start_k = k
            agent.path_wind = (float(d_now[0]), float(d_now[1]))
            agent.landed = False
            agent.needs_plan = False
            self.record.record_choice(agent.uid, max(k, 1), nid)
            self._event(k, agent.uid, "claim", node=nid)
            return
        self._land(agent, k, "no unclaimed nodes")

    def _plan(self, agent: _Agent, k: int):
        if self.policy == "division":
            self._plan_division(agent, k)
        else:
            self._plan_greedy(agent, k)

    # -- synchronous rounds --------------------------------------------------

    def _division_round(self, k: int):
        merged = gossip_visited(self.bus, {a.uid: a.known_visited for a in self.agents.values()})
        for agent in self.agents.values():
            agent.known_visited = set(merged)
        unvisited = {nid: self.grid.node_position(nid) for nid in sorted(self.unvisited)}
        positions = {a.uid: a.xy for a in self.agents.values()}
        goal_sets = run_division(
            self.bus, positions, unvisited, self.d_cap, self.params, self.config.bhh_c
        )
        for agent in self.agents.values():
            agent.goal_nodes = set(goal_sets[agent.uid].nodes)
            agent.needs_plan = True
        self._event(
            k, None, "division", sizes={a: len(g.nodes) for a, g in sorted(goal_sets.items())}
        )

    def _gossip_round(self, k: int):
        merged = gossip_visited(self.bus, {a.uid: a.known_visited for a in self.agents.values()})
        for agent in self.agents.values():
            agent.known_visited = set(merged)

    # -- flight ------------------------------------------------------------

    def _fly_segment(self, agent: _Agent, k: int, k_end: int) -> Tuple[int, bool]:
        """Fly ``agent`` from index k toward k_end; returns (new_k, arrived)."""
        n = k_end - k
        wind_arr = self.wind.vectors_for_range(k, n, self.config.t_s)
        gx, gy = agent.path.goal_xy
        out_xy = np.empty((n, 2)) if self.collect_trace else None
        out_e = np.empty(n) if self.collect_trace else None
        x_end, steps, energy, arrived, sat, status = _kernels.fly(
            agent.path.ref_p,
            agent.path.ref_v,
            agent.path_clock,
            agent.state,
            wind_arr,
            self._ctl,
            self._par,
            self.config.t_s,
            gx,
            gy,
            self._arrive_r2,
            self._arrive_v2,
            out_xy,
            out_e,
        )
        if status:
            raise InternalConsistencyError(f"agent {agent.uid} hit an attitude singularity")
        agent.state = x_end
        agent.energy += energy
        agent.sat_steps += sat
        agent.path_clock += steps
        if self.collect_trace and steps:
            self._trace[agent.uid].append((k, out_xy[:steps].copy(), out_e[:steps] + agent.energy - energy, agent.goal))
        return k + steps, bool(arrived)

    def _advance_window(self, k0: int, k1: int):
        """Advance all agents to k1, processing decisions in (k, id) order."""
        cfg = self.config
        at_k: Dict[UavId, int] = {}
        pending: List[Tuple[int, UavId]] = []
        for uid, agent in sorted(self.agents.items()):
            at_k[uid] = k0
            if agent.needs_plan:
                heapq.heappush(pending, (k0, uid))
            elif agent.landed and self.policy == "greedy" and any(
                n not in self.claims for n in self.unvisited
            ):
                heapq.heappush(pending, (k0, uid))  # released work exists: reconsider
        queued = {uid for _, uid in pending}

        while True:
            flew = False
            for uid, agent in sorted(self.agents.items()):
                if uid in queued or agent.landed or at_k[uid] >= k1:
                    continue
                if agent.path is None:
                    heapq.heappush(pending, (at_k[uid], uid))
                    queued.add(uid)
                    continue
                seg_end = k1
                if self.policy == "division" and cfg.op_enabled:
                    seg_end = min(seg_end, agent.next_plan_k)
                # give up on an exhausted reference after the stuck timeout
                stuck_k = (
                    agent.path_start_k
                    + agent.path.predicted_travel_time
                    + int(cfg.stuck_timeout_s / cfg.t_s)
                )
                seg_end = min(seg_end, stuck_k)
                if seg_end <= at_k[uid]:
                    heapq.heappush(pending, (at_k[uid], uid))
                    queued.add(uid)
                    continue
                new_k, arrived = self._fly_segment(agent, at_k[uid], seg_end)
                at_k[uid] = new_k
                flew = True
                if arrived:
                    self._visit(agent, new_k, agent.goal)
                    heapq.heappush(pending, (new_k, uid))
                    queued.add(uid)
                elif new_k < k1:  # hit a decision boundary (op tick or stuck)
                    heapq.heappush(pending, (new_k, uid))
                    queued.add(uid)
            if pending:
                k_ev, uid = heapq.heappop(pending)
                queued.discard(uid)
                self._plan(self.agents[uid], k_ev)
            elif not flew:
                break

    # -- main loop -----------------------------------------------------------

    def run(self) -> MissionResult:
        cfg = self.config
        k = 0
        k_max = int(cfg.max_sim_s / cfg.t_s)
        nd_ticks = int(round(cfg.nd_period_s / cfg.t_s)) if cfg.nd_period_s else None
        gossip_ticks = max(1, int(round(cfg.t_c_s / cfg.t_s)))

        # depots are visited at the start by their own UAV
        for uid in sorted(self.agents):
            depot = self.grid.depots[uid]
            self.record.record_choice(uid, 0, depot)
            self.record.record_visit(uid, 0, depot)
        for agent in self.agents.values():
            agent.known_visited = set(self.depot_nodes)

        if self.policy == "division":
            self._division_round(0)

        while k < k_max:
            if not self.unvisited and all(a.landed for a in self.agents.values()):
                break
            boundaries = [k_max]
            if nd_ticks:
                boundaries.append(((k // nd_ticks) + 1) * nd_ticks)
            if self.policy == "division":
                boundaries.append(((k // gossip_ticks) + 1) * gossip_ticks)
            k1 = min(boundaries)
            self._advance_window(k, k1)
            k = k1
            if k >= k_max:
                break
            if self.policy == "division":
                if nd_ticks and k % nd_ticks == 0:
                    self._division_round(k)
                elif k % gossip_ticks == 0:
                    self._gossip_round(k)

        done = not self.unvisited and all(a.landed for a in self.agents.values())
        self.record.aborted = not done
        for uid, agent in self.agents.items():
            self.record.per_uav_energy[uid] = agent.energy
        last_change = max(
            (seg[-1][0] for seg in self.record.segments.values() if seg), default=0
        )
        self.record.T = last_change
        if not done:
            self._event(k, None, "abort", unvisited=sorted(self.unvisited))
        result = MissionResult(
            record=self.record,
            events=self.events,
            sim_time_s=k * cfg.t_s,
            sat_steps=sum(a.sat_steps for a in self.agents.values()),
            trace=self._trace,
        )
        return result


def run_mission(
    scenario: Scenario,
    config: Optional[MissionConfig] = None,
    policy: Policy = "division",
    collect_trace: bool = False,
) -> MissionResult:
    return Mission(scenario, config, policy, collect_trace).run()
