"""Pure-Python kernel backend.

Mirror of ``fast.pyx`` statement by statement: every arithmetic operation
appears in the same order so both backends produce bit-identical doubles.
Keep the two files in sync when editing either.
"""

import math

import numpy as np

from . import (
    PAR_MASS,
    PAR_ARM,
    PAR_KF,
    PAR_KM,
    PAR_CD,
    PAR_G,
    PAR_IXX,
    PAR_IYY,
    PAR_IZZ,
    PAR_VR,
    PAR_PCOEF,
    PAR_HALF_DRAG,
    PAR_WMAX2,
)

_PI = math.pi
_TWO_PI = 2.0 * math.pi


def travel_energy(dx, dy, wx, wy, vr, pcoef):
    """Straight-line travel energy for displacement (dx, dy) under wind (wx, wy).

    Returns ``inf`` when the leg is infeasible (crosswind component at or
    above ``vr``, or headwind driving the ground speed to zero) and ``0.0``
    for a zero displacement.
    """
    dist = math.sqrt(dx * dx + dy * dy)
    if dist == 0.0:
        return 0.0
    d_par = (wx * dx + wy * dy) / dist
    d_perp2 = (wx * wx + wy * wy) - d_par * d_par
    radicand = vr * vr - d_perp2
    if radicand <= 0.0:
        return math.inf
    va = math.sqrt(radicand) + d_par
    if va <= 0.0:
        return math.inf
    return pcoef * dist / va


def _wrap(e):
    return e - _TWO_PI * math.floor((e + _PI) / _TWO_PI)


def _step_core(x, f, mx, my, mz, wx, wy, par, ts):
    """One explicit-Euler rigid-body step; mutates the 12-list ``x``."""
    px, py, pz, vx, vy, vz, ph, th, ps, o0, o1, o2 = x
    cph = math.cos(ph)
    sph = math.sin(ph)
    cth = math.cos(th)
    sth = math.sin(th)
    cps = math.cos(ps)
    sps = math.sin(ps)
    zcx = cps * sth * cph + sps * sph
    zcy = sps * sth * cph - cps * sph
    zcz = cth * cph
    rvx = vx - wx
    rvy = vy - wy
    rvz = vz
    sp = math.sqrt(rvx * rvx + rvy * rvy + rvz * rvz)
    dcoef = par[PAR_HALF_DRAG] * sp
    mass = par[PAR_MASS]
    ax = (f * zcx - dcoef * rvx) / mass
    ay = (f * zcy - dcoef * rvy) / mass
    az = (f * zcz - dcoef * rvz) / mass - par[PAR_G]
    tth = sth / cth
    phd = o0 + sph * tth * o1 + cph * tth * o2
    thd = cph * o1 - sph * o2
    psd = (sph * o1 + cph * o2) / cth
    ixx = par[PAR_IXX]
    iyy = par[PAR_IYY]
    izz = par[PAR_IZZ]
    d0 = (mx - (izz - iyy) * o1 * o2) / ixx
    d1 = (my - (ixx - izz) * o0 * o2) / iyy
    d2 = (mz - (iyy - ixx) * o0 * o1) / izz
    x[0] = px + vx * ts
    x[1] = py + vy * ts
    x[2] = pz + vz * ts
    x[3] = vx + ax * ts
    x[4] = vy + ay * ts
    x[5] = vz + az * ts
    x[6] = ph + phd * ts
    x[7] = th + thd * ts
    x[8] = ps + psd * ts
    x[9] = o0 + d0 * ts
    x[10] = o1 + d1 * ts
    x[11] = o2 + d2 * ts
    if x[7] >= _PI / 2.0 - 1e-6 or x[7] <= -_PI / 2.0 + 1e-6:
        return 1
    return 0


def _pid_core(x, prx, pry, prz, vrx, vry, vrz, arx, ary, arz, wx, wy, ctl, par):
    """Decoupled position/attitude PD law with realizability clamping.

    Returns (F, Mx, My, Mz, power, sat) where ``power`` is the rotor power
    of the clamped command and ``sat`` flags any rotor clamp.
    """
    px, py, pz, vx, vy, vz, ph, th, ps, o0, o1, o2 = x
    epx = prx - px
    epy = pry - py
    epz = prz - pz
    evx = vrx - vx
    evy = vry - vy
    evz = vrz - vz
    acx = arx + (ctl[9] * evx + ctl[10] * evy + ctl[11] * evz) + (ctl[0] * epx + ctl[1] * epy + ctl[2] * epz)
    acy = ary + (ctl[12] * evx + ctl[13] * evy + ctl[14] * evz) + (ctl[3] * epx + ctl[4] * epy + ctl[5] * epz)
    acz = arz + (ctl[15] * evx + ctl[16] * evy + ctl[17] * evz) + (ctl[6] * epx + ctl[7] * epy + ctl[8] * epz)
    rvx = vx - wx
    rvy = vy - wy
    rvz = vz
    sp = math.sqrt(rvx * rvx + rvy * rvy + rvz * rvz)
    dcoef = par[PAR_HALF_DRAG] * sp
    mass = par[PAR_MASS]
    g = par[PAR_G]
    fdx = mass * acx + dcoef * rvx
    fdy = mass * acy + dcoef * rvy
    fdz = mass * (acz + g) + dcoef * rvz
    fz_min = 0.05 * mass * g
    if fdz < fz_min:
        fdz = fz_min
    fh = math.sqrt(fdx * fdx + fdy * fdy)
    fh_max = fdz * math.tan(ctl[36])
    if fh > fh_max:
        scale = fh_max / fh
        fdx = fdx * scale
        fdy = fdy * scale
    nf = math.sqrt(fdx * fdx + fdy * fdy + fdz * fdz)
    zbx = fdx / nf
    zby = fdy / nf
    zbz = fdz / nf
    if zby > 1.0:
        zby = 1.0
    elif zby < -1.0:
        zby = -1.0
    roll_d = -math.asin(zby)
    pitch_d = math.atan2(zbx, zbz)
    cph = math.cos(ph)
    sph = math.sin(ph)
    cth = math.cos(th)
    sth = math.sin(th)
    cps = math.cos(ps)
    sps = math.sin(ps)
    zcx = cps * sth * cph + sps * sph
    zcy = sps * sth * cph - cps * sph
    zcz = cth * cph
    f = fdx * zcx + fdy * zcy + fdz * zcz
    if f < 0.0:
        f = 0.0
    er = _wrap(roll_d - ph)
    ep = _wrap(pitch_d - th)
    ey = _wrap(0.0 - ps)
    tth = sth / cth
    phd = o0 + sph * tth * o1 + cph * tth * o2
    thd = cph * o1 - sph * o2
    psd = (sph * o1 + cph * o2) / cth
    aar = (ctl[18] * er + ctl[19] * ep + ctl[20] * ey) - (ctl[27] * phd + ctl[28] * thd + ctl[29] * psd)
    aap = (ctl[21] * er + ctl[22] * ep + ctl[23] * ey) - (ctl[30] * phd + ctl[31] * thd + ctl[32] * psd)
    aay = (ctl[24] * er + ctl[25] * ep + ctl[26] * ey) - (ctl[33] * phd + ctl[34] * thd + ctl[35] * psd)
    mx = par[PAR_IXX] * aar
    my = par[PAR_IYY] * aap
    mz = par[PAR_IZZ] * aay
    kf = par[PAR_KF]
    km = par[PAR_KM]
    arm = par[PAR_ARM]
    s_sum = f / kf
    aa = mx / (arm * kf)
    bb = my / (arm * kf)
    cc = mz / km
    s13 = 0.5 * (s_sum + cc)
    s24 = 0.5 * (s_sum - cc)
    s1 = 0.5 * (s13 - bb)
    s3 = 0.5 * (s13 + bb)
    s2 = 0.5 * (s24 + aa)
    s4 = 0.5 * (s24 - aa)
    wmax2 = par[PAR_WMAX2]
    tol = 1e-9 * wmax2
    sat = 0
    if s1 < 0.0:
        if s1 < -tol:
            sat = 1
        s1 = 0.0
    elif s1 > wmax2:
        if s1 > wmax2 + tol:
            sat = 1
        s1 = wmax2
    if s2 < 0.0:
        if s2 < -tol:
            sat = 1
        s2 = 0.0
    elif s2 > wmax2:
        if s2 > wmax2 + tol:
            sat = 1
        s2 = wmax2
    if s3 < 0.0:
        if s3 < -tol:
            sat = 1
        s3 = 0.0
    elif s3 > wmax2:
        if s3 > wmax2 + tol:
            sat = 1
        s3 = wmax2
    if s4 < 0.0:
        if s4 < -tol:
            sat = 1
        s4 = 0.0
    elif s4 > wmax2:
        if s4 > wmax2 + tol:
            sat = 1
        s4 = wmax2
    uf = kf * (s1 + s2 + s3 + s4)
    umx = arm * kf * (s2 - s4)
    umy = arm * kf * (s3 - s1)
    umz = km * (s1 - s2 + s3 - s4)
    power = km * (s1 * math.sqrt(s1) + s2 * math.sqrt(s2) + s3 * math.sqrt(s3) + s4 * math.sqrt(s4))
    return uf, umx, umy, umz, power, sat


def step(x, u, wx, wy, par, ts):
    """Single dynamics step.  Returns (new_state[12], status)."""
    xl = [float(v) for v in x]
    status = _step_core(xl, float(u[0]), float(u[1]), float(u[2]), float(u[3]), wx, wy, par, ts)
    return np.array(xl, dtype=np.float64), status


def pid_step(x, pref, vref, aref, wx, wy, ctl, par):
    """Single control evaluation.  Returns (u[4], power, sat)."""
    xl = [float(v) for v in x]
    uf, umx, umy, umz, power, sat = _pid_core(
        xl,
        float(pref[0]),
        float(pref[1]),
        float(pref[2]),
        float(vref[0]),
        float(vref[1]),
        float(vref[2]),
        float(aref[0]),
        float(aref[1]),
        float(aref[2]),
        wx,
        wy,
        ctl,
        par,
    )
    return np.array([uf, umx, umy, umz], dtype=np.float64), power, sat


def rollout(ref_p, ref_v, x0, wind_mode, wx, wy, dcap, gx, gy, ctl, par, ts, out_inputs=None, out_states=None):
    """Closed-loop tracking of a reference under a modeled wind.

    Steps ``N-1`` times (N = len(ref_p)) with the PD law targeting the next
    reference sample; accumulates rotor energy.  Returns
    (energy, sat_steps, status, x_end).
    """
    n = ref_p.shape[0]
    x = [float(v) for v in x0]
    energy = 0.0
    sat_steps = 0
    status = 0
    if out_states is not None:
        for i in range(12):
            out_states[0, i] = x[i]
    for k in range(n - 1):
        if wind_mode == 0:
            cwx = wx
            cwy = wy
        else:
            rvx = float(ref_v[k, 0])
            rvy = float(ref_v[k, 1])
            nv = math.sqrt(rvx * rvx + rvy * rvy)
            if nv <= 1e-9:
                rvx = gx - float(ref_p[k, 0])
                rvy = gy - float(ref_p[k, 1])
                nv = math.sqrt(rvx * rvx + rvy * rvy)
            if nv <= 1e-9:
                cwx = 0.0
                cwy = 0.0
            elif wind_mode == 1:
                cwx = -dcap * rvx / nv
                cwy = -dcap * rvy / nv
            else:
                cwx = dcap * rvx / nv
                cwy = dcap * rvy / nv
        arx = (float(ref_v[k + 1, 0]) - float(ref_v[k, 0])) / ts
        ary = (float(ref_v[k + 1, 1]) - float(ref_v[k, 1])) / ts
        arz = (float(ref_v[k + 1, 2]) - float(ref_v[k, 2])) / ts
        uf, umx, umy, umz, power, sat = _pid_core(
            x,
            float(ref_p[k + 1, 0]),
            float(ref_p[k + 1, 1]),
            float(ref_p[k + 1, 2]),
            float(ref_v[k + 1, 0]),
            float(ref_v[k + 1, 1]),
            float(ref_v[k + 1, 2]),
            arx,
            ary,
            arz,
            cwx,
            cwy,
            ctl,
            par,
        )
        sat_steps += sat
        energy += power * ts
        if out_inputs is not None:
            out_inputs[k, 0] = uf
            out_inputs[k, 1] = umx
            out_inputs[k, 2] = umy
            out_inputs[k, 3] = umz
        status = _step_core(x, uf, umx, umy, umz, cwx, cwy, par, ts)
        if out_states is not None:
            for i in range(12):
                out_states[k + 1, i] = x[i]
        if status:
            break
    return energy, sat_steps, status, np.array(x, dtype=np.float64)


def fly(ref_p, ref_v, clock0, x0, wind, ctl, par, ts, gx, gy, arrive_r2, arrive_v2, out_xy=None, out_e=None):
    """Track a reference against a per-step actual wind table.

    The reference index is ``clock0 + i`` clamped to the final sample, so a
    craft that has consumed its reference keeps station at the goal.  Stops
    early on arrival (within ``sqrt(arrive_r2)`` of the goal with squared
    speed at most ``arrive_v2``).  Returns
    (x_end, steps_done, energy, arrived, sat_steps, status).
    """
    n_ref = ref_p.shape[0]
    n = wind.shape[0]
    x = [float(v) for v in x0]
    energy = 0.0
    sat_steps = 0
    status = 0
    arrived = 0
    steps = 0
    for i in range(n):
        c = clock0 + i
        j = c + 1
        if j > n_ref - 1:
            j = n_ref - 1
        jp = c
        if jp > n_ref - 1:
            jp = n_ref - 1
        cwx = float(wind[i, 0])
        cwy = float(wind[i, 1])
        arx = (float(ref_v[j, 0]) - float(ref_v[jp, 0])) / ts
        ary = (float(ref_v[j, 1]) - float(ref_v[jp, 1])) / ts
        arz = (float(ref_v[j, 2]) - float(ref_v[jp, 2])) / ts
        uf, umx, umy, umz, power, sat = _pid_core(
            x,
            float(ref_p[j, 0]),
            float(ref_p[j, 1]),
            float(ref_p[j, 2]),
            float(ref_v[j, 0]),
            float(ref_v[j, 1]),
            float(ref_v[j, 2]),
            arx,
            ary,
            arz,
            cwx,
            cwy,
            ctl,
            par,
        )
        sat_steps += sat
        energy += power * ts
        status = _step_core(x, uf, umx, umy, umz, cwx, cwy, par, ts)
        steps = i + 1
        if out_xy is not None:
            out_xy[i, 0] = x[0]
            out_xy[i, 1] = x[1]
        if out_e is not None:
            out_e[i] = energy
        if status:
            break
        ddx = x[0] - gx
        ddy = x[1] - gy
        if ddx * ddx + ddy * ddy <= arrive_r2:
            v2 = x[3] * x[3] + x[4] * x[4] + x[5] * x[5]
            if v2 <= arrive_v2:
                arrived = 1
                break
    return np.array(x, dtype=np.float64), steps, energy, arrived, sat_steps, status
