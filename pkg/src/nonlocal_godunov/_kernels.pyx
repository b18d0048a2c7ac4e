# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner-loop kernels; numerically mirrors ``_kernels_py``."""
import numpy as np

from libc.math cimport fabs


cdef inline double _horner(const double[::1] c, double x) noexcept nogil:
    cdef Py_ssize_t i = c.shape[0] - 1
    cdef double acc = c[i]
    while i > 0:
        i -= 1
        acc = c[i] + acc * x
    return acc


cdef inline double _sgn(double x) noexcept nogil:
    if x > 0:
        return 1.0
    if x < 0:
        return -1.0
    return 0.0


def correlate_direct(x, gamma, Py_ssize_t offset):
    cdef const double[::1] xv = np.ascontiguousarray(x, dtype=np.float64)
    cdef const double[::1] gv = np.ascontiguousarray(gamma, dtype=np.float64)
    cdef Py_ssize_t m = xv.shape[0], n = gv.shape[0], j, k, idx, start
    out = np.zeros(m)
    cdef double[::1] ov = out
    cdef double s
    start = offset % m
    if start < 0:
        start += m
    with nogil:
        for j in range(m):
            s = 0.0
            idx = (j + start) % m
            for k in range(n):
                s = s + gv[k] * xv[idx]
                idx += 1
                if idx == m:
                    idx = 0
            ov[j] = s
    return out


def conservative_update(rho, flux, double lam):
    cdef const double[::1] r = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[::1] f = np.ascontiguousarray(flux, dtype=np.float64)
    cdef Py_ssize_t m = r.shape[0], j
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        o[0] = r[0] - lam * (f[0] - f[m - 1])
        for j in range(1, m):
            o[j] = r[j] - lam * (f[j] - f[j - 1])
    return out


def lxf_update(rho, fvals, double lam, double alpha):
    cdef const double[::1] r = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[::1] f = np.ascontiguousarray(fvals, dtype=np.float64)
    cdef Py_ssize_t m = r.shape[0], j, jl, jr
    out = np.empty(m)
    cdef double[::1] o = out
    with nogil:
        for j in range(m):
            jl = j - 1 if j > 0 else m - 1
            jr = j + 1 if j < m - 1 else 0
            o[j] = (r[j] + 0.5 * lam * alpha * (r[jl] - 2.0 * r[j] + r[jr])
                    + 0.5 * lam * (f[jl] - f[jr]))
    return out


def entropy_residual_max(rho, rho_next, vface, double lam, kappa, g_coef):
    cdef const double[::1] r = np.ascontiguousarray(rho, dtype=np.float64)
    cdef const double[::1] rn = np.ascontiguousarray(rho_next, dtype=np.float64)
    cdef const double[::1] v = np.ascontiguousarray(vface, dtype=np.float64)
    cdef const double[:, ::1] kap = np.ascontiguousarray(kappa, dtype=np.float64)
    cdef const double[::1] c = np.ascontiguousarray(g_coef, dtype=np.float64)
    cdef Py_ssize_t m = r.shape[0], nk = kap.shape[0], j, i, jl, best_i = 0, best_j = 0
    cdef double kp, rj, rl, vr, vl, fr, fl, diff, res, best = -1e300
    with nogil:
        for i in range(nk):
            for j in range(m):
                jl = j - 1 if j > 0 else m - 1
                kp = kap[i, j]
                rj = r[j]
                rl = r[jl]
                vr = v[j]
                vl = v[jl]
                fr = vr * (_horner(c, rj if rj > kp else kp) - _horner(c, rj if rj < kp else kp))
                fl = vl * (_horner(c, rl if rl > kp else kp) - _horner(c, rl if rl < kp else kp))
                diff = rn[j] - kp
                res = (fabs(diff) - fabs(rj - kp) + lam * (fr - fl)
                       + lam * _sgn(diff) * _horner(c, kp) * (vr - vl))
                if res > best:
                    best = res
                    best_i = i
                    best_j = j
    return best, best_i, best_j
