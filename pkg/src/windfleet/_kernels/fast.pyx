# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled kernel backend.

Statement-by-statement mirror of ``pure.py``; compiled with
``-ffp-contract=off`` so both backends produce bit-identical doubles.
Keep the two files in sync when editing either.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport INFINITY, asin, atan2, cos, floor, sin, sqrt, tan

cdef double _PI = 3.141592653589793
cdef double _TWO_PI = 6.283185307179586

cdef enum:
    P_MASS = 0
    P_ARM = 1
    P_KF = 2
    P_KM = 3
    P_WMAX = 4
    P_CD = 5
    P_RHO = 6
    P_AREA = 7
    P_G = 8
    P_IXX = 9
    P_IYY = 10
    P_IZZ = 11
    P_VR = 12
    P_PCOEF = 13
    P_HALF_DRAG = 14
    P_WMAX2 = 15


cdef inline double _travel_energy_c(double dx, double dy, double wx, double wy,
                                    double vr, double pcoef) nogil:
    cdef double dist, d_par, d_perp2, radicand, va
    dist = sqrt(dx * dx + dy * dy)
    if dist == 0.0:
        return 0.0
    d_par = (wx * dx + wy * dy) / dist
    d_perp2 = (wx * wx + wy * wy) - d_par * d_par
    radicand = vr * vr - d_perp2
    if radicand <= 0.0:
        return INFINITY
    va = sqrt(radicand) + d_par
    if va <= 0.0:
        return INFINITY
    return pcoef * dist / va


def travel_energy(double dx, double dy, double wx, double wy, double vr, double pcoef):
    """Straight-line travel energy; ``inf`` when infeasible, 0 for zero legs."""
    return _travel_energy_c(dx, dy, wx, wy, vr, pcoef)


cdef inline double _wrap(double e) nogil:
    return e - _TWO_PI * floor((e + _PI) / _TWO_PI)


cdef int _step_core(double* x, double f, double mx, double my, double mz,
                    double wx, double wy, const double[:] par, double ts) nogil:
    cdef double px = x[0], py = x[1], pz = x[2]
    cdef double vx = x[3], vy = x[4], vz = x[5]
    cdef double ph = x[6], th = x[7], ps = x[8]
    cdef double o0 = x[9], o1 = x[10], o2 = x[11]
    cdef double cph, sph, cth, sth, cps, sps, zcx, zcy, zcz
    cdef double rvx, rvy, rvz, sp, dcoef, mass, ax, ay, az
    cdef double tth, phd, thd, psd, ixx, iyy, izz, d0, d1, d2
    cph = cos(ph)
    sph = sin(ph)
    cth = cos(th)
    sth = sin(th)
    cps = cos(ps)
    sps = sin(ps)
    zcx = cps * sth * cph + sps * sph
    zcy = sps * sth * cph - cps * sph
    zcz = cth * cph
    rvx = vx - wx
    rvy = vy - wy
    rvz = vz
    sp = sqrt(rvx * rvx + rvy * rvy + rvz * rvz)
    dcoef = par[P_HALF_DRAG] * sp
    mass = par[P_MASS]
    ax = (f * zcx - dcoef * rvx) / mass
    ay = (f * zcy - dcoef * rvy) / mass
    az = (f * zcz - dcoef * rvz) / mass - par[P_G]
    tth = sth / cth
    phd = o0 + sph * tth * o1 + cph * tth * o2
    thd = cph * o1 - sph * o2
    psd = (sph * o1 + cph * o2) / cth
    ixx = par[P_IXX]
    iyy = par[P_IYY]
    izz = par[P_IZZ]
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


cdef int _pid_core(double* x,
                   double prx, double pry, double prz,
                   double vrx, double vry, double vrz,
                   double arx, double ary, double arz,
                   double wx, double wy,
                   const double[:] ctl, const double[:] par,
                   double* out) nogil:
    """Writes (F, Mx, My, Mz, power) into ``out``; returns the sat flag."""
    cdef double px = x[0], py = x[1], pz = x[2]
    cdef double vx = x[3], vy = x[4], vz = x[5]
    cdef double ph = x[6], th = x[7], ps = x[8]
    cdef double o0 = x[9], o1 = x[10], o2 = x[11]
    cdef double epx, epy, epz, evx, evy, evz, acx, acy, acz
    cdef double rvx, rvy, rvz, sp, dcoef, mass, g
    cdef double fdx, fdy, fdz, fz_min, fh, fh_max, scale, nf
    cdef double zbx, zby, zbz, roll_d, pitch_d
    cdef double cph, sph, cth, sth, cps, sps, zcx, zcy, zcz, f
    cdef double er, ep, ey, tth, phd, thd, psd, aar, aap, aay
    cdef double mx, my, mz, kf, km, arm, s_sum, aa, bb, cc
    cdef double s13, s24, s1, s2, s3, s4, wmax2, tol
    cdef int sat = 0
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
    sp = sqrt(rvx * rvx + rvy * rvy + rvz * rvz)
    dcoef = par[P_HALF_DRAG] * sp
    mass = par[P_MASS]
    g = par[P_G]
    fdx = mass * acx + dcoef * rvx
    fdy = mass * acy + dcoef * rvy
    fdz = mass * (acz + g) + dcoef * rvz
    fz_min = 0.05 * mass * g
    if fdz < fz_min:
        fdz = fz_min
    fh = sqrt(fdx * fdx + fdy * fdy)
    fh_max = fdz * tan(ctl[36])
    if fh > fh_max:
        scale = fh_max / fh
        fdx = fdx * scale
        fdy = fdy * scale
    nf = sqrt(fdx * fdx + fdy * fdy + fdz * fdz)
    zbx = fdx / nf
    zby = fdy / nf
    zbz = fdz / nf
    if zby > 1.0:
        zby = 1.0
    elif zby < -1.0:
        zby = -1.0
    roll_d = -asin(zby)
    pitch_d = atan2(zbx, zbz)
    cph = cos(ph)
    sph = sin(ph)
    cth = cos(th)
    sth = sin(th)
    cps = cos(ps)
    sps = sin(ps)
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
    mx = par[P_IXX] * aar
    my = par[P_IYY] * aap
    mz = par[P_IZZ] * aay
    kf = par[P_KF]
    km = par[P_KM]
    arm = par[P_ARM]
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
    wmax2 = par[P_WMAX2]
    tol = 1e-9 * wmax2
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
    out[0] = kf * (s1 + s2 + s3 + s4)
    out[1] = arm * kf * (s2 - s4)
    out[2] = arm * kf * (s3 - s1)
    out[3] = km * (s1 - s2 + s3 - s4)
    out[4] = km * (s1 * sqrt(s1) + s2 * sqrt(s2) + s3 * sqrt(s3) + s4 * sqrt(s4))
    return sat


def step(x, u, double wx, double wy, const double[:] par, double ts):
    """Single dynamics step.  Returns (new_state[12], status)."""
    cdef double xl[12]
    cdef int i, status
    xv = np.asarray(x, dtype=np.float64)
    uv = np.asarray(u, dtype=np.float64)
    cdef const double[:] xm = xv
    cdef const double[:] um = uv
    for i in range(12):
        xl[i] = xm[i]
    status = _step_core(xl, um[0], um[1], um[2], um[3], wx, wy, par, ts)
    out = np.empty(12, dtype=np.float64)
    cdef double[:] om = out
    for i in range(12):
        om[i] = xl[i]
    return out, status


def pid_step(x, pref, vref, aref, double wx, double wy,
             const double[:] ctl, const double[:] par):
    """Single control evaluation.  Returns (u[4], power, sat)."""
    cdef double xl[12]
    cdef double ob[5]
    cdef int i, sat
    xv = np.asarray(x, dtype=np.float64)
    pv = np.asarray(pref, dtype=np.float64)
    vv = np.asarray(vref, dtype=np.float64)
    av = np.asarray(aref, dtype=np.float64)
    cdef const double[:] xm = xv
    cdef const double[:] pm = pv
    cdef const double[:] vm = vv
    cdef const double[:] am = av
    for i in range(12):
        xl[i] = xm[i]
    sat = _pid_core(xl, pm[0], pm[1], pm[2], vm[0], vm[1], vm[2],
                    am[0], am[1], am[2], wx, wy, ctl, par, ob)
    u = np.empty(4, dtype=np.float64)
    cdef double[:] um = u
    for i in range(4):
        um[i] = ob[i]
    return u, ob[4], sat


def rollout(const double[:, :] ref_p, const double[:, :] ref_v, x0, int wind_mode,
            double wx, double wy, double dcap, double gx, double gy,
            const double[:] ctl, const double[:] par, double ts,
            out_inputs=None, out_states=None):
    """Closed-loop tracking of a reference under a modeled wind.

    Steps ``N-1`` times (N = len(ref_p)) with the PD law targeting the next
    reference sample; accumulates rotor energy.  Returns
    (energy, sat_steps, status, x_end).
    """
    cdef Py_ssize_t n = ref_p.shape[0]
    cdef double xl[12]
    cdef double ob[5]
    cdef int i, sat, status = 0
    cdef Py_ssize_t k
    cdef double energy = 0.0
    cdef double cwx, cwy, rvx, rvy, nv, arx, ary, arz
    cdef int sat_steps = 0
    x0v = np.asarray(x0, dtype=np.float64)
    cdef const double[:] x0m = x0v
    cdef double[:, :] inm = None
    cdef double[:, :] stm = None
    if out_inputs is not None:
        inm = out_inputs
    if out_states is not None:
        stm = out_states
    for i in range(12):
        xl[i] = x0m[i]
    if stm is not None:
        for i in range(12):
            stm[0, i] = xl[i]
    for k in range(n - 1):
        if wind_mode == 0:
            cwx = wx
            cwy = wy
        else:
            rvx = ref_v[k, 0]
            rvy = ref_v[k, 1]
            nv = sqrt(rvx * rvx + rvy * rvy)
            if nv <= 1e-9:
                rvx = gx - ref_p[k, 0]
                rvy = gy - ref_p[k, 1]
                nv = sqrt(rvx * rvx + rvy * rvy)
            if nv <= 1e-9:
                cwx = 0.0
                cwy = 0.0
            elif wind_mode == 1:
                cwx = -dcap * rvx / nv
                cwy = -dcap * rvy / nv
            else:
                cwx = dcap * rvx / nv
                cwy = dcap * rvy / nv
        arx = (ref_v[k + 1, 0] - ref_v[k, 0]) / ts
        ary = (ref_v[k + 1, 1] - ref_v[k, 1]) / ts
        arz = (ref_v[k + 1, 2] - ref_v[k, 2]) / ts
        sat = _pid_core(xl, ref_p[k + 1, 0], ref_p[k + 1, 1], ref_p[k + 1, 2],
                        ref_v[k + 1, 0], ref_v[k + 1, 1], ref_v[k + 1, 2],
                        arx, ary, arz, cwx, cwy, ctl, par, ob)
        sat_steps += sat
        energy += ob[4] * ts
        if inm is not None:
            inm[k, 0] = ob[0]
            inm[k, 1] = ob[1]
            inm[k, 2] = ob[2]
            inm[k, 3] = ob[3]
        status = _step_core(xl, ob[0], ob[1], ob[2], ob[3], cwx, cwy, par, ts)
        if stm is not None:
            for i in range(12):
                stm[k + 1, i] = xl[i]
        if status:
            break
    x_end = np.empty(12, dtype=np.float64)
    cdef double[:] xe = x_end
    for i in range(12):
        xe[i] = xl[i]
    return energy, sat_steps, status, x_end


def fly(const double[:, :] ref_p, const double[:, :] ref_v, Py_ssize_t clock0, x0,
        const double[:, :] wind, const double[:] ctl, const double[:] par, double ts,
        double gx, double gy, double arrive_r2, double arrive_v2,
        out_xy=None, out_e=None):
    """Track a reference against a per-step actual wind table.

    The reference index is ``clock0 + i`` clamped to the final sample, so a
    craft that has consumed its reference keeps station at the goal.  Stops
    early on arrival (within ``sqrt(arrive_r2)`` of the goal with squared
    speed at most ``arrive_v2``).  Returns
    (x_end, steps_done, energy, arrived, sat_steps, status).
    """
    cdef Py_ssize_t n_ref = ref_p.shape[0]
    cdef Py_ssize_t n = wind.shape[0]
    cdef double xl[12]
    cdef double ob[5]
    cdef int i, sat, status = 0, arrived = 0
    cdef Py_ssize_t k, c, j, jp, steps = 0
    cdef double energy = 0.0
    cdef double cwx, cwy, arx, ary, arz, ddx, ddy, v2
    cdef int sat_steps = 0
    x0v = np.asarray(x0, dtype=np.float64)
    cdef const double[:] x0m = x0v
    cdef double[:, :] xym = None
    cdef double[:] em = None
    if out_xy is not None:
        xym = out_xy
    if out_e is not None:
        em = out_e
    for i in range(12):
        xl[i] = x0m[i]
    for k in range(n):
        c = clock0 + k
        j = c + 1
        if j > n_ref - 1:
            j = n_ref - 1
        jp = c
        if jp > n_ref - 1:
            jp = n_ref - 1
        cwx = wind[k, 0]
        cwy = wind[k, 1]
        arx = (ref_v[j, 0] - ref_v[jp, 0]) / ts
        ary = (ref_v[j, 1] - ref_v[jp, 1]) / ts
        arz = (ref_v[j, 2] - ref_v[jp, 2]) / ts
        sat = _pid_core(xl, ref_p[j, 0], ref_p[j, 1], ref_p[j, 2],
                        ref_v[j, 0], ref_v[j, 1], ref_v[j, 2],
                        arx, ary, arz, cwx, cwy, ctl, par, ob)
        sat_steps += sat
        energy += ob[4] * ts
        status = _step_core(xl, ob[0], ob[1], ob[2], ob[3], cwx, cwy, par, ts)
        steps = k + 1
        if xym is not None:
            xym[k, 0] = xl[0]
            xym[k, 1] = xl[1]
        if em is not None:
            em[k] = energy
        if status:
            break
        ddx = xl[0] - gx
        ddy = xl[1] - gy
        if ddx * ddx + ddy * ddy <= arrive_r2:
            v2 = xl[3] * xl[3] + xl[4] * xl[4] + xl[5] * xl[5]
            if v2 <= arrive_v2:
                arrived = 1
                break
    x_end = np.empty(12, dtype=np.float64)
    cdef double[:] xe = x_end
    for i in range(12):
        xe[i] = xl[i]
    return x_end, steps, energy, arrived, sat_steps, status
