"""Decentralized multi-UAV routing with wind-aware energy prediction.

A deterministic discrete-time simulator and library: hexagonal flight
grids, quadrotor dynamics and a closed-form traveling-energy model,
energy-aware A*, decoupled PD input prediction, a synchronous node-division
protocol, risk-scheduled replanning, and an experiment harness with a
greedy baseline.
"""

from ._kernels import BACKEND as kernel_backend
from .astar import DesirablePath, desirable_states, plan_path
from .disturbance import WindPattern, WindTrace, WindVector, best_case_wind, wind_at, worst_case_wind
from .division import GoalSet, min_enclosing_circle, run_division, tour_length_estimate
from .harness import ExperimentConfig, compare_policies, generate_scenario, run_batch, run_greedy
from .hexgrid import HexCoord, HexGrid
from .mission import Mission, MissionConfig, MissionResult, PlanRecord, run_mission
from .msgbus import SyncBus, gossip_visited
from .pid import EnergyTriple, PidGains, default_gains, predict_energy_triple, predict_inputs
from .quadrotor import (
    INFEASIBLE,
    CraftParams,
    InputVector,
    UavState,
    default_craft,
    max_relative_speed,
    mixer,
    mixer_inverse,
    piecewise_energy,
    rotor_power,
    step_dynamics,
    travel_energy,
)
from .scenario import Scenario

__version__ = "0.1.0"
