"""Pure-Python fixed-step RK4 for the actuator ODE (fallback for ``_kernels``).

Parameter vector layout (shared with the compiled kernel)::

    p = [J, kd, kt, kb, krest, R, Lc0, sigma_s, sigma_d, Fc, Fs, vs]

States: beta, omega_r, i_c[, z].  In current mode i_c follows the drive
``u1`` instead of being integrated.  ``u1``/``u2`` are sampled on the
half-step grid (length 2*n_steps + 1).
"""

import math

import numpy as np

NPARAM = 12


def _deriv(x0, x1, x2, x3, ic, vc, tl, p, lugre, current_mode):
    J, kd, kt, kb, krest, R, lc0, ss, sd, fc, fs, vs = p
    s1 = math.sin(x0)
    fric = 0.0
    zdot = 0.0
    if lugre:
        g = fc + (fs - fc) * math.exp(-(x1 / vs) ** 2)
        zdot = x1 - ss * abs(x1) * x3 / g
        fric = ss * x3 + sd * zdot
    domega = (-kd * x1 + kt * ic * s1 + krest * math.sin(2.0 * x0) - tl - fric) / J
    di = 0.0 if current_mode else (-R * ic - kb * x1 * s1 + vc) / lc0
    return x1, domega, di, zdot


def rk4_actuator(x0, u1, u2, dt, n_steps, p, lugre, current_mode, decimate):
    """Integrate; returns (trajectory, fail_step, final_state).

    ``fail_step`` is -1 on success, else the step that produced a non-finite
    state (the trajectory is then truncated to the last good sample).
    """
    p = tuple(float(v) for v in p)
    u1 = np.asarray(u1, dtype=float).tolist()
    u2 = np.asarray(u2, dtype=float).tolist()
    n_state = 4 if lugre else 3
    n_out = n_steps // decimate + 1
    out = np.empty((n_out, n_state))
    b, w, i, z = (float(v) for v in (list(x0) + [0.0])[:4])
    if current_mode:
        i = float(u1[0])
    out[0, :] = (b, w, i, z)[:n_state]
    h = dt
    row = 1
    for k in range(n_steps):
        j = 2 * k
        ic_a, ic_m, ic_b = (u1[j], u1[j + 1], u1[j + 2]) if current_mode else (0.0, 0.0, 0.0)
        vc_a, vc_m, vc_b = u1[j], u1[j + 1], u1[j + 2]
        tl_a, tl_m, tl_b = u2[j], u2[j + 1], u2[j + 2]

        try:
            c = ic_a if current_mode else i
            k1 = _deriv(b, w, i, z, c, vc_a, tl_a, p, lugre, current_mode)
            b2, w2, i2, z2 = b + 0.5 * h * k1[0], w + 0.5 * h * k1[1], i + 0.5 * h * k1[2], z + 0.5 * h * k1[3]
            c = ic_m if current_mode else i2
            k2 = _deriv(b2, w2, i2, z2, c, vc_m, tl_m, p, lugre, current_mode)
            b3, w3, i3, z3 = b + 0.5 * h * k2[0], w + 0.5 * h * k2[1], i + 0.5 * h * k2[2], z + 0.5 * h * k2[3]
            c = ic_m if current_mode else i3
            k3 = _deriv(b3, w3, i3, z3, c, vc_m, tl_m, p, lugre, current_mode)
            b4, w4, i4, z4 = b + h * k3[0], w + h * k3[1], i + h * k3[2], z + h * k3[3]
            c = ic_b if current_mode else i4
            k4 = _deriv(b4, w4, i4, z4, c, vc_b, tl_b, p, lugre, current_mode)
        except (ValueError, OverflowError):
            # math.sin of inf or float overflow in an intermediate stage
            return out[:row], k + 1, np.array((b, w, i, z)[:n_state])

        b += h / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
        w += h / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
        z += h / 6.0 * (k1[3] + 2 * k2[3] + 2 * k3[3] + k4[3])
        if current_mode:
            i = float(ic_b)
        else:
            i += h / 6.0 * (k1[2] + 2 * k2[2] + 2 * k3[2] + k4[2])

        if not (math.isfinite(b) and math.isfinite(w) and math.isfinite(i) and math.isfinite(z)):
            return out[:row], k + 1, np.array((b, w, i, z)[:n_state])
        if (k + 1) % decimate == 0:
            out[row, :] = (b, w, i, z)[:n_state]
            row += 1
    return out, -1, np.array((b, w, i, z)[:n_state])
