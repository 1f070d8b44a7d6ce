# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled RK4 loop for the SAC / CL-SAC closed loop.

State layout: [x_p | x_pfc | x_m | x_ol | K_Ie | K_Ix | K_Iu], gain blocks
row-major. Mirrors ``clsac._fallback.simulate`` line for line.
"""

import numpy as np
from libc.math cimport fmod, isfinite


cdef class _Loop:
    cdef const double[:, ::1] ap, bp, cp, ad, bd, cd, d0, am, bm, cm, lv
    cdef const double[:, ::1] gpe, gie, gpx, gix, gpu, giu
    cdef const double[::1] amp, offset
    cdef double sigma, period
    cdef int closed, leak_all, kind
    cdef int n_p, n_d, n_m, m, m_m, n
    cdef int i_d, i_m, i_ol, i_ie, i_ix, i_iu
    # scratch
    cdef double[::1] um, e, u, uhold, we, wx, wu

    cdef void command(self, double t) noexcept nogil:
        cdef int j
        cdef double sgn = 1.0
        if self.kind == 1 and fmod(t, self.period) >= 0.5 * self.period:
            sgn = -1.0
        for j in range(self.m_m):
            self.um[j] = sgn * self.amp[j] + self.offset[j]

    cdef void deriv(self, double t, double[::1] s, double[::1] out) noexcept nogil:
        cdef int i, j, k
        cdef int m = self.m, n_m = self.n_m, m_m = self.m_m
        cdef double acc, ye, yx, yu
        self.command(t)
        # e = Cm x_m - (Cp x_p + Cd x_d + D0 uhold)
        for i in range(m):
            acc = 0.0
            for j in range(n_m):
                acc += self.cm[i, j] * s[self.i_m + j]
            for j in range(self.n_p):
                acc -= self.cp[i, j] * s[j]
            for j in range(self.n_d):
                acc -= self.cd[i, j] * s[self.i_d + j]
            for j in range(m):
                acc -= self.d0[i, j] * self.uhold[j]
            self.e[i] = acc
        # row vectors e'G, x_m'G, u_m'G for the proportional gains
        for j in range(m):
            acc = 0.0
            for k in range(m):
                acc += self.e[k] * self.gpe[k, j]
            self.we[j] = acc
        for j in range(n_m):
            acc = 0.0
            for k in range(n_m):
                acc += s[self.i_m + k] * self.gpx[k, j]
            self.wx[j] = acc
        for j in range(m_m):
            acc = 0.0
            for k in range(m_m):
                acc += self.um[k] * self.gpu[k, j]
            self.wu[j] = acc
        ye = 0.0
        for j in range(m):
            ye += self.we[j] * self.e[j]
        yx = 0.0
        for j in range(n_m):
            yx += self.wx[j] * s[self.i_m + j]
        yu = 0.0
        for j in range(m_m):
            yu += self.wu[j] * self.um[j]
        for i in range(m):
            acc = self.e[i] * ye
            for j in range(m):
                acc += s[self.i_ie + i * m + j] * self.e[j]
            acc += self.e[i] * yx
            for j in range(n_m):
                acc += s[self.i_ix + i * n_m + j] * s[self.i_m + j]
            acc += self.e[i] * yu
            for j in range(m_m):
                acc += s[self.i_iu + i * m_m + j] * self.um[j]
            self.u[i] = acc
        # plant and PFC
        for i in range(self.n_p):
            acc = 0.0
            for j in range(self.n_p):
                acc += self.ap[i, j] * s[j]
            for j in range(m):
                acc += self.bp[i, j] * self.u[j]
            out[i] = acc
        for i in range(self.n_d):
            acc = 0.0
            for j in range(self.n_d):
                acc += self.ad[i, j] * s[self.i_d + j]
            for j in range(m):
                acc += self.bd[i, j] * self.u[j]
            out[self.i_d + i] = acc
        # adaptive-loop model (closed loop adds -Lv e) and open-loop shadow
        for i in range(n_m):
            acc = 0.0
            for j in range(n_m):
                acc += self.am[i, j] * s[self.i_m + j]
            for j in range(m_m):
                acc += self.bm[i, j] * self.um[j]
            if self.closed:
                for j in range(m):
                    acc -= self.lv[i, j] * self.e[j]
            out[self.i_m + i] = acc
            acc = 0.0
            for j in range(n_m):
                acc += self.am[i, j] * s[self.i_ol + j]
            for j in range(m_m):
                acc += self.bm[i, j] * self.um[j]
            out[self.i_ol + i] = acc
        # integral gains
        for j in range(m):
            acc = 0.0
            for k in range(m):
                acc += self.e[k] * self.gie[k, j]
            self.we[j] = acc
        for j in range(n_m):
            acc = 0.0
            for k in range(n_m):
                acc += s[self.i_m + k] * self.gix[k, j]
            self.wx[j] = acc
        for j in range(m_m):
            acc = 0.0
            for k in range(m_m):
                acc += self.um[k] * self.giu[k, j]
            self.wu[j] = acc
        for i in range(m):
            for j in range(m):
                out[self.i_ie + i * m + j] = self.e[i] * self.we[j] - self.sigma * s[self.i_ie + i * m + j]
            for j in range(n_m):
                acc = self.e[i] * self.wx[j]
                if self.leak_all:
                    acc -= self.sigma * s[self.i_ix + i * n_m + j]
                out[self.i_ix + i * n_m + j] = acc
            for j in range(m_m):
                acc = self.e[i] * self.wu[j]
                if self.leak_all:
                    acc -= self.sigma * s[self.i_iu + i * m_m + j]
                out[self.i_iu + i * m_m + j] = acc


def _c2(a):
    return np.ascontiguousarray(np.atleast_2d(np.asarray(a, dtype=np.float64)))


def simulate(ap, bp, cp, ad, bd, cd, d0, am, bm, cm, lv, closed,
             gpe, gie, gpx, gix, gpu, giu, sigma, leak_all,
             kind, amp, offset, period, x0, dt, n_steps):
    cdef _Loop L = _Loop()
    L.ap, L.bp, L.cp = _c2(ap), _c2(bp), _c2(cp)
    L.ad, L.bd, L.cd = _c2(ad), _c2(bd), _c2(cd)
    L.d0 = _c2(d0)
    L.am, L.bm, L.cm, L.lv = _c2(am), _c2(bm), _c2(cm), _c2(lv)
    L.gpe, L.gie, L.gpx, L.gix, L.gpu, L.giu = _c2(gpe), _c2(gie), _c2(gpx), _c2(gix), _c2(gpu), _c2(giu)
    L.sigma = sigma
    L.closed = 1 if closed else 0
    L.leak_all = 1 if leak_all else 0
    L.kind = kind
    L.period = period
    L.n_p = L.ap.shape[0]
    L.n_d = L.ad.shape[0]
    L.n_m = L.am.shape[0]
    L.m = L.bp.shape[1]
    L.m_m = L.bm.shape[1]
    L.amp = np.ascontiguousarray(np.broadcast_to(np.asarray(amp, dtype=np.float64), (L.m_m,)))
    L.offset = np.ascontiguousarray(np.broadcast_to(np.asarray(offset, dtype=np.float64), (L.m_m,)))
    L.i_d = L.n_p
    L.i_m = L.i_d + L.n_d
    L.i_ol = L.i_m + L.n_m
    L.i_ie = L.i_ol + L.n_m
    L.i_ix = L.i_ie + L.m * L.m
    L.i_iu = L.i_ix + L.m * L.n_m
    L.n = L.i_iu + L.m * L.m_m
    L.um = np.zeros(L.m_m)
    L.e = np.zeros(L.m)
    L.u = np.zeros(L.m)
    L.uhold = np.zeros(L.m)
    L.we = np.zeros(L.m)
    L.wx = np.zeros(L.n_m)
    L.wu = np.zeros(L.m_m)

    cdef int n = L.n, m = L.m
    cdef long N = n_steps
    states_arr = np.empty((N + 1, n))
    u_arr = np.empty((N + 1, m))
    hold_arr = np.zeros((N + 1, m))
    cdef double[:, ::1] states = states_arr
    cdef double[:, ::1] urec = u_arr
    cdef double[:, ::1] hold = hold_arr
    cdef double[::1] s = np.array(x0, dtype=np.float64)
    if s.shape[0] != n:
        raise ValueError(f"initial state has length {s.shape[0]}, expected {n}")
    cdef double[::1] k1 = np.zeros(n), k2 = np.zeros(n), k3 = np.zeros(n), k4 = np.zeros(n)
    cdef double[::1] tmp = np.zeros(n)
    cdef double h = dt, h2 = 0.5 * dt, h6 = dt / 6.0, t
    cdef long k
    cdef int i
    cdef long fail = -1
    with nogil:
        for k in range(N + 1):
            t = k * h
            for i in range(n):
                states[k, i] = s[i]
            for i in range(m):
                hold[k, i] = L.uhold[i]
            L.deriv(t, s, k1)
            for i in range(m):
                urec[k, i] = L.u[i]
            if k == N:
                break
            for i in range(n):
                tmp[i] = s[i] + h2 * k1[i]
            L.deriv(t + h2, tmp, k2)
            for i in range(n):
                tmp[i] = s[i] + h2 * k2[i]
            L.deriv(t + h2, tmp, k3)
            for i in range(n):
                tmp[i] = s[i] + h * k3[i]
            L.deriv(t + h, tmp, k4)
            for i in range(n):
                s[i] = s[i] + h6 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(n):
                if not isfinite(s[i]):
                    fail = k + 1
                    break
            if fail >= 0:
                break
            for i in range(m):
                L.uhold[i] = urec[k, i]
    if fail >= 0:
        return states_arr[:fail], u_arr[:fail], hold_arr[:fail], fail
    return states_arr, u_arr, hold_arr, -1
