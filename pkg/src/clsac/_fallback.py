"""Pure-Python closed-loop integrator, used when the compiled core is absent.

Same signature and outputs as ``clsac._core.simulate``. The derivative is
assembled from the public reference-model and adaptive-law functions, so
this path also serves as the readable definition the compiled loop is
checked against.
"""

import math

import numpy as np

from .adaptive import AdaptiveGains, GainWeights, control, integral_gain_derivatives
from .refmodel import RefModelConfig, cl_derivative, ol_derivative


def command_at(kind, amp, offset, period, t):
    if kind == 1 and math.fmod(t, period) >= 0.5 * period:
        return -amp + offset
    return amp + offset


def simulate(*args):
    with np.errstate(over="ignore", invalid="ignore"):
        return _simulate(*args)


def _simulate(ap, bp, cp, ad, bd, cd, d0, am, bm, cm, lv, closed,
              gpe, gie, gpx, gix, gpu, giu, sigma, leak_all,
              kind, amp, offset, period, x0, dt, n_steps):
    n_p, n_d, n_m = ap.shape[0], ad.shape[0], am.shape[0]
    m, m_m = bp.shape[1], bm.shape[1]
    i_d, i_m = n_p, n_p + n_d
    i_ol = i_m + n_m
    i_ie = i_ol + n_m
    i_ix = i_ie + m * m
    i_iu = i_ix + m * n_m
    n = i_iu + m * m_m

    ref = RefModelConfig(am, bm, cm, lv if closed else None)
    w = GainWeights(gpe, gie, gpx, gix, gpu, giu, sigma, bool(leak_all))
    amp = np.asarray(amp, dtype=float)
    offset = np.asarray(offset, dtype=float)

    def signals(t, s, uhold):
        um = command_at(kind, amp, offset, period, t)
        x_p, x_d, x_m = s[:i_d], s[i_d:i_m], s[i_m:i_ol]
        y_aug = cp @ x_p + cd @ x_d + d0 @ uhold
        e = cm @ x_m - y_aug
        g = AdaptiveGains(s[i_ie:i_ix].reshape(m, m), s[i_ix:i_iu].reshape(m, n_m),
                          s[i_iu:n].reshape(m, m_m))
        return um, y_aug, e, g

    def deriv(t, s, uhold):
        um, y_aug, e, g = signals(t, s, uhold)
        x_m = s[i_m:i_ol]
        u = control(e, x_m, um, g, w)
        out = np.empty(n)
        out[:i_d] = ap @ s[:i_d] + bp @ u
        out[i_d:i_m] = ad @ s[i_d:i_m] + bd @ u
        if closed:
            out[i_m:i_ol] = cl_derivative(ref, x_m, um, y_aug)
        else:
            out[i_m:i_ol] = ol_derivative(ref, x_m, um)
        out[i_ol:i_ie] = ol_derivative(ref, s[i_ol:i_ie], um)
        d_ie, d_ix, d_iu = integral_gain_derivatives(e, x_m, um, g, w)
        out[i_ie:i_ix] = d_ie.reshape(-1)
        out[i_ix:i_iu] = d_ix.reshape(-1)
        out[i_iu:] = d_iu.reshape(-1)
        return out, u

    states = np.empty((n_steps + 1, n))
    u_rec = np.empty((n_steps + 1, m))
    hold_rec = np.zeros((n_steps + 1, m))
    s = np.array(x0, dtype=float)
    uhold = np.zeros(m)
    h2 = 0.5 * dt
    for k in range(n_steps + 1):
        t = k * dt
        states[k] = s
        hold_rec[k] = uhold
        k1, u = deriv(t, s, uhold)
        u_rec[k] = u
        if k == n_steps:
            break
        k2, _ = deriv(t + h2, s + h2 * k1, uhold)
        k3, _ = deriv(t + h2, s + h2 * k2, uhold)
        k4, _ = deriv(t + dt, s + dt * k3, uhold)
        s = s + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not np.all(np.isfinite(s)):
            return states[:k + 1], u_rec[:k + 1], hold_rec[:k + 1], k + 1
        uhold = u
    return states, u_rec, hold_rec, -1
