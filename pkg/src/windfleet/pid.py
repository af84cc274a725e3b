"""Decoupled PD prediction of inputs and traveling energy along a reference.

The position loop turns reference tracking error into a commanded
acceleration (acc_ref + Kd*vel_err + Kp*pos_err); adding gravity and a
drag-compensation term gives a desired world-frame force, whose direction
fixes the desired roll/pitch (yaw setpoint 0) and whose projection on the
current body z axis gives the thrust.  The attitude loop is the same PD
structure on Euler angles.  Commands are clamped to the realizable rotor
set (squared speeds in [0, omega_max^2]); clamping is reported, not fatal.

There is no integral term: the structure mirrors the closed-loop
pole-placement design, so "PD" describes it precisely even though such
controllers are conventionally called PID.
"""

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import _kernels
from .astar import DEFAULT_CRUISE_FRACTION, DEFAULT_SETTLE_S, DesirablePath, desirable_states
from .errors import SingularityError
from .quadrotor import CraftParams, EnergyJ, UavState

# Commanded tilt is limited so aggressive corrections cannot push pitch into
# the Euler singularity at +-pi/2.
DEFAULT_TILT_MAX = 1.2


@dataclass(frozen=True)
class PidGains:
    """Position and attitude loop gains (3x3 symmetric positive definite)."""

    kp_pos: np.ndarray
    kd_pos: np.ndarray
    kp_att: np.ndarray
    kd_att: np.ndarray

    def __post_init__(self):
        for name in ("kp_pos", "kd_pos", "kp_att", "kd_att"):
            m = np.asarray(getattr(self, name), dtype=np.float64)
            if m.shape != (3, 3):
                raise ValueError(f"{name} must be 3x3")
            if not np.allclose(m, m.T):
                raise ValueError(f"{name} must be symmetric")
            if np.any(np.linalg.eigvalsh(m) <= 0.0):
                raise ValueError(f"{name} must be positive definite")
            object.__setattr__(self, name, m)

    def ctl_array(self, tilt_max: float = DEFAULT_TILT_MAX) -> np.ndarray:
        return _kernels.pack_control(self.kp_pos, self.kd_pos, self.kp_att, self.kd_att, tilt_max)


def default_gains() -> PidGains:
    """Critically damped at the 0.005 s sampling period (see tracking tests)."""
    return PidGains(
        kp_pos=4.0 * np.eye(3),
        kd_pos=4.0 * np.eye(3),
        kp_att=100.0 * np.eye(3),
        kd_att=20.0 * np.eye(3),
    )


@dataclass(frozen=True)
class EnergyTriple:
    """Predicted / worst-case / best-case energy for one goal over one path."""

    predicted: EnergyJ
    worst: EnergyJ
    best: EnergyJ

    @property
    def feasible(self) -> bool:
        return math.isfinite(self.predicted) and math.isfinite(self.worst) and math.isfinite(self.best)


INFEASIBLE_TRIPLE = EnergyTriple(math.inf, math.inf, math.inf)


@dataclass
class PredictionResult:
    """Predicted input sequence with the states the inputs produce."""

    inputs: np.ndarray  # (N-1, 4) rows [F Mx My Mz]
    states: np.ndarray  # (N, 12) predicted closed-loop states
    energy: EnergyJ
    saturated_steps: int

    @property
    def saturated(self) -> bool:
        return self.saturated_steps > 0


def _check_initial_state(path: DesirablePath, x0: UavState):
    if not np.allclose(x0.as_vector(), path.states[0], atol=1e-9):
        raise ValueError("initial state must equal the first desirable state")


def predict_inputs(
    path: DesirablePath,
    x0: UavState,
    d_frozen,
    gains: PidGains,
    params: CraftParams,
    t_s: float,
    tilt_max: float = DEFAULT_TILT_MAX,
) -> PredictionResult:
    """Inputs the controller would apply tracking ``path`` under a frozen wind."""
    _check_initial_state(path, x0)
    n = path.states.shape[0]
    inputs = np.zeros((max(n - 1, 0), 4))
    states = np.zeros((n, 12))
    if n <= 1:
        states[0] = x0.as_vector()
        return PredictionResult(inputs=inputs, states=states, energy=0.0, saturated_steps=0)
    energy, sat_steps, status, _ = _kernels.rollout(
        path.ref_p,
        path.ref_v,
        x0.as_vector(),
        0,
        float(d_frozen[0]),
        float(d_frozen[1]),
        0.0,
        path.goal_xy[0],
        path.goal_xy[1],
        gains.ctl_array(tilt_max),
        params.kernel_params,
        t_s,
        inputs,
        states,
    )
    if status:
        raise SingularityError("predicted pitch left (-pi/2, pi/2)")
    return PredictionResult(inputs=inputs, states=states, energy=energy, saturated_steps=sat_steps)


def predict_energy_triple(
    path: DesirablePath,
    x0: UavState,
    d_now,
    d_cap: float,
    gains: PidGains,
    params: CraftParams,
    t_s: float,
    tilt_max: float = DEFAULT_TILT_MAX,
    cruise_fraction: float = DEFAULT_CRUISE_FRACTION,
    settle_s: float = DEFAULT_SETTLE_S,
) -> EnergyTriple:
    """Predicted energy under the frozen wind plus worst/best-case bounds.

    All three rollouts track the same waypoint path.  The worst (best) case
    re-aims a cap-magnitude wind against (along) the instantaneous reference
    velocity at every step, and re-times the reference accordingly: a
    headwind (tailwind) at the cap lowers (raises) the achievable ground
    speed on every segment to vr -+ cap, stretching (shrinking) the flight.
    A cap at or above the relative-speed ceiling makes the worst case
    infeasible.
    """
    _check_initial_state(path, x0)
    if len(path.waypoints) <= 1:
        return EnergyTriple(0.0, 0.0, 0.0)
    ctl = gains.ctl_array(tilt_max)
    par = params.kernel_params
    vr = float(par[_kernels.PAR_VR])
    x0v = x0.as_vector()
    gx, gy = path.goal_xy

    def _run(mode, ref_p, ref_v, wx, wy):
        energy, _, status, _ = _kernels.rollout(
            ref_p, ref_v, x0v, mode, wx, wy, float(d_cap), gx, gy, ctl, par, t_s
        )
        return math.inf if status else energy

    predicted = _run(0, path.ref_p, path.ref_v, float(d_now[0]), float(d_now[1]))
    if vr - d_cap <= 1e-9:
        worst = math.inf
    else:
        worst_states = desirable_states(
            path.waypoints, cruise_fraction * (vr - d_cap), t_s, settle_s
        )
        worst = _run(1, worst_states[:, 0:3], worst_states[:, 3:6], 0.0, 0.0)
    best_states = desirable_states(path.waypoints, cruise_fraction * (vr + d_cap), t_s, settle_s)
    best = _run(2, best_states[:, 0:3], best_states[:, 3:6], 0.0, 0.0)
    return EnergyTriple(predicted=predicted, worst=worst, best=best)
