"""Quadrotor parameters, mixer, discrete dynamics and the traveling-energy model.

Conventions: world frame is x-east / y-north / z-up; attitude is ZYX Euler
(roll, pitch, yaw); rotor speeds enter thrust and moment quadratically with
proportionality constants ``kappa_f`` and ``kappa_m``.  The four-rotor
allocation matrix is

    F  = kf*(w1^2 + w2^2 + w3^2 + w4^2)
    Mx = l*kf*(w2^2 - w4^2)
    My = l*kf*(w3^2 - w1^2)
    Mz = km*(w1^2 - w2^2 + w3^2 - w4^2)

Straight-line travel energy assumes full-throttle cruise: the craft flies at
the maximum ground speed sustainable against the wind, so the energy of a leg
is ``4*km*omega_max^3 * dist / v_ground``.  A leg is infeasible (returned as
``INFEASIBLE``) when the crosswind component meets or exceeds the relative
speed ceiling, or when headwind drives the ground speed to zero.
"""

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import (
    CannotLiftError,
    SaturationError,
    SingularityError,
    UnrealizableInputError,
)

# Distinguished energy value for legs a craft cannot traverse; compares
# correctly against finite energies and sums, so search code can treat it
# as an absent edge.
INFEASIBLE = math.inf

EnergyJ = float


def is_feasible(energy: EnergyJ) -> bool:
    return math.isfinite(energy)


@dataclass(frozen=True)
class CraftParams:
    """Physical constants of one quadrotor.

    The default constructor values describe the simulated craft used across
    the test suite: 0.18 kg mass on 8.6 cm arms, with thrust/moment
    constants in the small-quadrotor range.  All comparative results scale
    with these; absolute Joule figures are configuration-dependent.
    """

    mass_kg: float = 0.18
    arm_m: float = 0.086
    kappa_f: float = 6.11e-8
    kappa_m: float = 1.5e-9
    omega_max: float = 7800.0
    drag_coeff: float = 1.0
    air_density: float = 1.225
    ref_area_m2: float = 0.01
    gravity: float = 9.81

    def __post_init__(self):
        for name in (
            "mass_kg",
            "arm_m",
            "kappa_f",
            "kappa_m",
            "omega_max",
            "drag_coeff",
            "air_density",
            "ref_area_m2",
            "gravity",
        ):
            if getattr(self, name) <= 0.0:
                raise ValueError(f"{name} must be strictly positive")

    @property
    def f_max(self) -> float:
        """Net thrust with all four rotors at omega_max."""
        return 4.0 * self.kappa_f * self.omega_max**2

    @property
    def hover_thrust(self) -> float:
        return self.mass_kg * self.gravity

    @property
    def inertia(self) -> Tuple[float, float, float]:
        """Diagonal inertia from point masses m/4 at each arm tip."""
        ml2 = self.mass_kg * self.arm_m**2
        return (0.5 * ml2, 0.5 * ml2, ml2)

    @cached_property
    def kernel_params(self) -> np.ndarray:
        ixx, iyy, izz = self.inertia
        return _kernels.pack_params(
            self.mass_kg,
            self.arm_m,
            self.kappa_f,
            self.kappa_m,
            self.omega_max,
            self.drag_coeff,
            self.air_density,
            self.ref_area_m2,
            self.gravity,
            ixx,
            iyy,
            izz,
            max_relative_speed(self),
        )


def default_craft() -> CraftParams:
    return CraftParams()


@dataclass
class UavState:
    """12-component rigid-body state: position, velocity, Euler angles, body rates."""

    p: np.ndarray
    v: np.ndarray
    theta: np.ndarray
    omega: np.ndarray

    @classmethod
    def at_rest(cls, x: float, y: float, z: float = 0.0) -> "UavState":
        return cls(
            p=np.array([x, y, z], dtype=np.float64),
            v=np.zeros(3),
            theta=np.zeros(3),
            omega=np.zeros(3),
        )

    @classmethod
    def from_vector(cls, vec: np.ndarray) -> "UavState":
        vec = np.asarray(vec, dtype=np.float64)
        return cls(p=vec[0:3].copy(), v=vec[3:6].copy(), theta=vec[6:9].copy(), omega=vec[9:12].copy())

    def as_vector(self) -> np.ndarray:
        return np.concatenate([self.p, self.v, self.theta, self.omega])

    @property
    def position_xy(self) -> Tuple[float, float]:
        return (float(self.p[0]), float(self.p[1]))

    @property
    def speed(self) -> float:
        return float(np.linalg.norm(self.v))


class InputVector(Tuple[float, float, float, float]):
    """Net thrust and body moments (F, Mx, My, Mz)."""

    __slots__ = ()

    def __new__(cls, f: float, mx: float, my: float, mz: float):
        return super().__new__(cls, (float(f), float(mx), float(my), float(mz)))

    @property
    def f(self) -> float:
        return self[0]

    @property
    def moments(self) -> Tuple[float, float, float]:
        return (self[1], self[2], self[3])


def mixer(rotor_speeds: Sequence[float], params: CraftParams) -> InputVector:
    """Net thrust/moments from the four rotor speeds."""
    w = [float(s) for s in rotor_speeds]
    if len(w) != 4:
        raise ValueError("expected four rotor speeds")
    for i, wi in enumerate(w):
        if wi < 0.0 or wi > params.omega_max:
            raise SaturationError(f"rotor {i} speed {wi} outside [0, {params.omega_max}]")
    s = [wi * wi for wi in w]
    kf = params.kappa_f
    km = params.kappa_m
    arm = params.arm_m
    return InputVector(
        kf * (s[0] + s[1] + s[2] + s[3]),
        arm * kf * (s[1] - s[3]),
        arm * kf * (s[2] - s[0]),
        km * (s[0] - s[1] + s[2] - s[3]),
    )


def mixer_inverse(u: Sequence[float], params: CraftParams) -> np.ndarray:
    """Rotor speeds realizing an input vector.

    Raises :class:`UnrealizableInputError` (carrying the offending rotor
    index) when any squared speed falls outside [0, omega_max^2].
    """
    f, mx, my, mz = (float(c) for c in u)
    kf = params.kappa_f
    km = params.kappa_m
    arm = params.arm_m
    s_sum = f / kf
    a = mx / (arm * kf)
    b = my / (arm * kf)
    c = mz / km
    s13 = 0.5 * (s_sum + c)
    s24 = 0.5 * (s_sum - c)
    squares = (
        0.5 * (s13 - b),
        0.5 * (s24 + a),
        0.5 * (s13 + b),
        0.5 * (s24 - a),
    )
    wmax2 = params.omega_max**2
    tol = 1e-9 * wmax2
    for i, si in enumerate(squares):
        if si < -tol or si > wmax2 + tol:
            raise UnrealizableInputError(
                f"rotor {i} squared speed {si} outside [0, {wmax2}]", rotor_index=i
            )
    return np.sqrt(np.clip(squares, 0.0, wmax2))


def rotor_power(rotor_speeds: Sequence[float], params: CraftParams) -> float:
    """Total rotor power km * sum(w_i^3)."""
    w = np.asarray(rotor_speeds, dtype=np.float64)
    if np.any(w < 0.0) or np.any(w > params.omega_max):
        raise SaturationError("rotor speed outside [0, omega_max]")
    return float(params.kappa_m * np.sum(w**3))


def max_relative_speed(params: CraftParams) -> float:
    """Drag-limited maximum speed relative to the air mass.

    Solves steady flight at full throttle: the thrust left over after
    supporting the weight balances the quadratic drag.
    """
    f_max = params.f_max
    f_g = params.hover_thrust
    if f_max < f_g:
        raise CannotLiftError(
            f"maximum thrust {f_max:.4f} N below weight {f_g:.4f} N"
        )
    f_t = math.sqrt(f_max**2 - f_g**2)
    half_drag = 0.5 * params.drag_coeff * params.air_density * params.ref_area_m2
    return math.sqrt(f_t / half_drag)


def ground_speed(travel_dir: Sequence[float], d: Sequence[float], params: CraftParams) -> float:
    """Maximum ground speed along ``travel_dir`` under wind ``d``.

    Nonpositive or NaN results mean the direction cannot be held.
    """
    dx, dy = float(travel_dir[0]), float(travel_dir[1])
    dist = math.hypot(dx, dy)
    if dist == 0.0:
        raise ValueError("travel direction must be nonzero")
    vr = max_relative_speed(params)
    wx, wy = float(d[0]), float(d[1])
    d_par = (wx * dx + wy * dy) / dist
    d_perp2 = (wx * wx + wy * wy) - d_par * d_par
    radicand = vr * vr - d_perp2
    if radicand <= 0.0:
        return float("nan")
    return math.sqrt(radicand) + d_par


def travel_energy(
    p_i: Sequence[float], p_j: Sequence[float], d: Sequence[float], params: CraftParams
) -> EnergyJ:
    """Energy for a straight full-throttle leg from ``p_i`` to ``p_j`` under wind ``d``.

    Zero-length legs cost 0 J.  Returns ``INFEASIBLE`` when the craft cannot
    hold the course (see module docstring).
    """
    par = params.kernel_params
    return _kernels.travel_energy(
        float(p_j[0]) - float(p_i[0]),
        float(p_j[1]) - float(p_i[1]),
        float(d[0]),
        float(d[1]),
        par[_kernels.PAR_VR],
        par[_kernels.PAR_PCOEF],
    )


def step_dynamics(
    x: UavState, u: Sequence[float], d: Sequence[float], params: CraftParams, t_s: float
) -> UavState:
    """One explicit-Euler step of the rigid-body dynamics under planar wind."""
    if t_s <= 0.0:
        raise ValueError("t_s must be positive")
    mixer_inverse(u, params)  # realizability check
    vec, status = _kernels.step(
        x.as_vector(),
        np.asarray(u, dtype=np.float64),
        float(d[0]),
        float(d[1]),
        params.kernel_params,
        t_s,
    )
    if status:
        raise SingularityError("pitch left (-pi/2, pi/2)")
    return UavState.from_vector(vec)


def piecewise_energy(u_seq: Sequence[Sequence[float]], params: CraftParams, t_s: float) -> EnergyJ:
    """Energy of an input sequence: sum of rotor power times the sampling time."""
    total = 0.0
    for k, u in enumerate(u_seq):
        try:
            speeds = mixer_inverse(u, params)
        except UnrealizableInputError as exc:
            raise UnrealizableInputError(
                f"unrealizable input at step {k}: {exc}",
                rotor_index=exc.rotor_index,
                time_index=k,
            ) from exc
        total += rotor_power(speeds, params) * t_s
    return total
