# cython: language_level=3
"""Compiled fixed-step RK4 for the actuator ODE.

Same contract as ``_kernels_py.rk4_actuator``; see that module for the
parameter layout.
"""

import numpy as np
from libc.math cimport sin, exp, fabs, isfinite


NPARAM = 12


cdef inline void _deriv(double x0, double x1, double x3, double ic, double vc,
                        double tl, double* p, int lugre, int current_mode,
                        double* out) noexcept nogil:
    cdef double J = p[0], kd = p[1], kt = p[2], kb = p[3], krest = p[4]
    cdef double R = p[5], lc0 = p[6], ss = p[7], sd = p[8]
    cdef double fc = p[9], fs = p[10], vs = p[11]
    cdef double s1 = sin(x0)
    cdef double fric = 0.0, zdot = 0.0, g, r
    if lugre:
        r = x1 / vs
        g = fc + (fs - fc) * exp(-r * r)
        zdot = x1 - ss * fabs(x1) * x3 / g
        fric = ss * x3 + sd * zdot
    out[0] = x1
    out[1] = (-kd * x1 + kt * ic * s1 + krest * sin(2.0 * x0) - tl - fric) / J
    if current_mode:
        out[2] = 0.0
    else:
        out[2] = (-R * ic - kb * x1 * s1 + vc) / lc0
    out[3] = zdot


def rk4_actuator(x0, const double[::1] u1, const double[::1] u2, double dt,
                 Py_ssize_t n_steps, p, int lugre, int current_mode,
                 Py_ssize_t decimate):
    cdef double[::1] pv = np.ascontiguousarray(p, dtype=np.float64)
    if pv.shape[0] != NPARAM:
        raise ValueError("parameter vector must have 12 entries")
    if u1.shape[0] < 2 * n_steps + 1 or u2.shape[0] < 2 * n_steps + 1:
        raise ValueError("drive arrays must have 2*n_steps + 1 samples")
    cdef int n_state = 4 if lugre else 3
    cdef Py_ssize_t n_out = n_steps // decimate + 1
    out_arr = np.empty((n_out, n_state))
    cdef double[:, ::1] out = out_arr
    cdef double s[4]
    cdef double y[4]
    cdef double k1[4]
    cdef double k2[4]
    cdef double k3[4]
    cdef double k4[4]
    cdef Py_ssize_t k, j, m, row = 1
    cdef double h = dt, c
    cdef long fail = -1
    xs = list(x0) + [0.0]
    for m in range(4):
        s[m] = float(xs[m]) if m < len(xs) else 0.0
    if current_mode:
        s[2] = u1[0]
    for m in range(n_state):
        out[0, m] = s[m]

    with nogil:
        for k in range(n_steps):
            j = 2 * k
            c = u1[j] if current_mode else s[2]
            _deriv(s[0], s[1], s[3], c, u1[j], u2[j], &pv[0], lugre, current_mode, k1)
            for m in range(4):
                y[m] = s[m] + 0.5 * h * k1[m]
            c = u1[j + 1] if current_mode else y[2]
            _deriv(y[0], y[1], y[3], c, u1[j + 1], u2[j + 1], &pv[0], lugre, current_mode, k2)
            for m in range(4):
                y[m] = s[m] + 0.5 * h * k2[m]
            c = u1[j + 1] if current_mode else y[2]
            _deriv(y[0], y[1], y[3], c, u1[j + 1], u2[j + 1], &pv[0], lugre, current_mode, k3)
            for m in range(4):
                y[m] = s[m] + h * k3[m]
            c = u1[j + 2] if current_mode else y[2]
            _deriv(y[0], y[1], y[3], c, u1[j + 2], u2[j + 2], &pv[0], lugre, current_mode, k4)
            for m in range(4):
                s[m] = s[m] + h / 6.0 * (k1[m] + 2.0 * k2[m] + 2.0 * k3[m] + k4[m])
            if current_mode:
                s[2] = u1[j + 2]
            if not (isfinite(s[0]) and isfinite(s[1]) and isfinite(s[2]) and isfinite(s[3])):
                fail = k + 1
                break
            if (k + 1) % decimate == 0:
                for m in range(n_state):
                    out[row, m] = s[m]
                row += 1

    final = np.array([s[m] for m in range(n_state)])
    if fail >= 0:
        return out_arr[:row], fail, final
    return out_arr, -1, final
