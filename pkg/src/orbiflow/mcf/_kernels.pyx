# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled profile-flow stepping kernel; mirrors ``_kernels_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sin, cos, sqrt, isfinite, M_PI

cnp.import_array()

DEF STATUS_MAX_STEPS = 0
DEF STATUS_REACHED = 1
DEF STATUS_LOST_CONVEXITY = 2
DEF STATUS_SINGULAR = 3


def advance_profile(double[::1] r, double h, double kappa, double cfl, double t,
                    double r_stop, long max_steps):
    cdef Py_ssize_t n = r.shape[0]
    cdef Py_ssize_t i
    cdef long step
    cdef double k = sqrt(kappa)
    cdef double[::1] sin_psi = np.empty(n)
    cdef double[::1] cos_psi = np.empty(n)
    cdef double[::1] rate = np.empty(n)
    cdef double psi, sn, cs, rp, rpp, v, lam1, lam2, diff, dmax, rmax, rmin, dt = 0.0
    cdef double hh = h * h
    for i in range(n):
        psi = M_PI * i / (n - 1)
        sin_psi[i] = sin(psi)
        cos_psi[i] = cos(psi)

    for step in range(max_steps):
        rmax = r[0]
        rmin = r[0]
        for i in range(n):
            if not isfinite(r[i]):
                return t, step, STATUS_SINGULAR, dt
            if r[i] > rmax:
                rmax = r[i]
            if r[i] < rmin:
                rmin = r[i]
        if rmin <= 0.0:
            return t, step, STATUS_SINGULAR, dt
        if rmax <= r_stop:
            return t, step, STATUS_REACHED, dt

        dmax = 0.0
        for i in range(n):
            sn = sin(k * r[i]) / k
            cs = cos(k * r[i])
            if i == 0:
                rp = 0.0
                rpp = 2.0 * (r[1] - r[0]) / hh
            elif i == n - 1:
                rp = 0.0
                rpp = 2.0 * (r[n - 2] - r[n - 1]) / hh
            else:
                rp = (r[i + 1] - r[i - 1]) / (2.0 * h)
                rpp = (r[i + 1] - 2.0 * r[i] + r[i - 1]) / hh
            v = sqrt(rp * rp + sn * sn)
            lam1 = (2.0 * cs * rp * rp + cs * sn * sn - sn * rpp) / (v * v * v)
            if i == 0 or i == n - 1:
                lam2 = (sn * cs - rpp) / (sn * sn)
            else:
                lam2 = (cs * sn * sin_psi[i] - rp * cos_psi[i]) / (sn * v * sin_psi[i])
            if lam1 <= 0.0 or lam2 <= 0.0:
                return t, step, STATUS_LOST_CONVEXITY, dt
            rate[i] = (lam1 + lam2) * v / sn
            diff = 1.0 / (v * v) + 1.0 / (sn * sn)
            if diff > dmax:
                dmax = diff
        dt = cfl * hh / dmax
        for i in range(n):
            r[i] -= dt * rate[i]
        t += dt

    rmax = r[0]
    for i in range(n):
        if r[i] > rmax:
            rmax = r[i]
    if rmax <= r_stop:
        return t, max_steps, STATUS_REACHED, dt
    return t, max_steps, STATUS_MAX_STEPS, dt
