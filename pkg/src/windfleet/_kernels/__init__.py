"""Numeric kernel backends.

The hot inner loops of the simulator (rigid-body step, decoupled PD control,
closed-loop rollouts and the straight-line energy formula) live behind a
small flat-array API with two interchangeable implementations:

* ``windfleet._kernels.fast`` -- Cython extension, built by setup.py.
* ``windfleet._kernels.pure`` -- plain-Python mirror, always available.

The compiled backend is selected at import time when present; setting the
environment variable ``WINDFLEET_PURE_PYTHON=1`` forces the fallback.  Both
backends execute the same floating-point operations in the same order (the
extension is compiled with ``-ffp-contract=off``), so results are
bit-identical; ``tests/test_kernels.py`` enforces this and
``benchmarks/bench_kernels.py`` compares their speed.

Array layouts
-------------
State vector ``x`` (12 doubles):
    [px py pz  vx vy vz  roll pitch yaw  wx wy wz]
Input vector ``u`` (4 doubles):
    [F Mx My Mz]
Craft parameter block ``par`` (16 doubles), built by :func:`pack_params`:
    [mass arm kf km omega_max cd rho area g ixx iyy izz
     vr pcoef half_drag wmax2]
where ``vr`` is the drag-limited maximum relative speed, ``pcoef`` the
full-throttle power ``4*km*omega_max**3``, ``half_drag = cd*rho*area/2``
and ``wmax2 = omega_max**2``.
Controller block ``ctl`` (37 doubles), built by :func:`pack_control`:
    [Kp_pos(9) Kd_pos(9) Kp_att(9) Kd_att(9) tilt_max]
with the 3x3 gain matrices stored row-major.

Wind modes for ``rollout``: 0 = fixed vector, 1 = per-step worst case
(cap magnitude opposing the reference velocity), 2 = per-step best case
(aligned with it).
"""

import os

import numpy as np

PAR_LEN = 16
CTL_LEN = 37

(
    PAR_MASS,
    PAR_ARM,
    PAR_KF,
    PAR_KM,
    PAR_WMAX,
    PAR_CD,
    PAR_RHO,
    PAR_AREA,
    PAR_G,
    PAR_IXX,
    PAR_IYY,
    PAR_IZZ,
    PAR_VR,
    PAR_PCOEF,
    PAR_HALF_DRAG,
    PAR_WMAX2,
) = range(PAR_LEN)


def pack_params(mass, arm, kf, km, omega_max, cd, rho, area, g, ixx, iyy, izz, vr):
    """Flatten craft parameters plus derived constants for the kernels."""
    par = np.empty(PAR_LEN, dtype=np.float64)
    par[PAR_MASS] = mass
    par[PAR_ARM] = arm
    par[PAR_KF] = kf
    par[PAR_KM] = km
    par[PAR_WMAX] = omega_max
    par[PAR_CD] = cd
    par[PAR_RHO] = rho
    par[PAR_AREA] = area
    par[PAR_G] = g
    par[PAR_IXX] = ixx
    par[PAR_IYY] = iyy
    par[PAR_IZZ] = izz
    par[PAR_VR] = vr
    par[PAR_PCOEF] = 4.0 * km * omega_max**3
    par[PAR_HALF_DRAG] = 0.5 * cd * rho * area
    par[PAR_WMAX2] = omega_max**2
    return par


def pack_control(kp_pos, kd_pos, kp_att, kd_att, tilt_max):
    """Flatten the four 3x3 gain matrices and the tilt limit."""
    ctl = np.empty(CTL_LEN, dtype=np.float64)
    ctl[0:9] = np.asarray(kp_pos, dtype=np.float64).reshape(9)
    ctl[9:18] = np.asarray(kd_pos, dtype=np.float64).reshape(9)
    ctl[18:27] = np.asarray(kp_att, dtype=np.float64).reshape(9)
    ctl[27:36] = np.asarray(kd_att, dtype=np.float64).reshape(9)
    ctl[36] = tilt_max
    return ctl


def travel_energy_field(dx, dy, wx, wy, vr, pcoef):
    """Vectorized straight-line travel energy for displacement arrays.

    Same formula as the scalar ``travel_energy`` kernel; used to compute
    A* heuristics for every hex of a grid in one shot.  Infeasible legs
    (crosswind at or above the relative-speed ceiling, or ground speed
    driven to zero) come back as ``inf``; zero displacements as ``0``.
    """
    dx = np.asarray(dx, dtype=np.float64)
    dy = np.asarray(dy, dtype=np.float64)
    dist = np.sqrt(dx * dx + dy * dy)
    with np.errstate(divide="ignore", invalid="ignore"):
        d_par = (wx * dx + wy * dy) / dist
        d_perp2 = (wx * wx + wy * wy) - d_par * d_par
        radicand = vr * vr - d_perp2
        va = np.sqrt(radicand) + d_par
        energy = pcoef * dist / va
    energy = np.where((radicand <= 0.0) | (va <= 0.0), np.inf, energy)
    return np.where(dist == 0.0, 0.0, energy)


def _select_backend():
    if os.environ.get("WINDFLEET_PURE_PYTHON", "") not in ("", "0"):
        from . import pure

        return pure, "pure"
    try:
        from . import fast

        return fast, "fast"
    except ImportError:
        from . import pure

        return pure, "pure"


_impl, BACKEND = _select_backend()

travel_energy = _impl.travel_energy
step = _impl.step
pid_step = _impl.pid_step
rollout = _impl.rollout
fly = _impl.fly
