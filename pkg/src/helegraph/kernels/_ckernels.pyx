# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled versions of the quadrature sums in ``_pykernels``; same signatures."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def linear_sum(const double[::1] u, const double[::1] du, const double[::1] wkp,
               const double[::1] wkm, const double[::1] hc):
    cdef Py_ssize_t n = u.shape[0], nk = wkp.shape[0], i, k, ip, im
    cdef double acc, ui, dui
    out = np.zeros(n)
    cdef double[::1] o = out
    for i in range(n):
        acc = 0.0
        ui = u[i]
        dui = du[i]
        for k in range(nk):
            if wkp[k] == 0.0 and wkm[k] == 0.0:
                continue
            ip = (i + k) % n
            im = (i - k + n) % n
            acc += wkp[k] * (u[ip] - ui - hc[k] * dui) + wkm[k] * (u[im] - ui + hc[k] * dui)
        o[i] = acc
    return out


def extremal_sum(const double[::1] u, const double[::1] wk, double lam_pos, double lam_neg):
    cdef Py_ssize_t n = u.shape[0], nk = wk.shape[0], i, k
    cdef double acc, d
    out = np.zeros(n)
    cdef double[::1] o = out
    for i in range(n):
        acc = 0.0
        for k in range(1, nk):
            if wk[k] == 0.0:
                continue
            d = u[(i + k) % n] + u[(i - k + n) % n] - 2.0 * u[i]
            if d > 0.0:
                acc += wk[k] * lam_pos * d
            else:
                acc += wk[k] * lam_neg * d
        o[i] = acc
    return out


def muskat_sum(const double[::1] f, const double[::1] df, double dx, const double[::1] diag):
    cdef Py_ssize_t n = f.shape[0], half = n // 2, i, k
    cdef double acc, w, h, dfy, fi, dfi
    out = np.zeros(n)
    cdef double[::1] o = out
    for i in range(n):
        fi = f[i]
        dfi = df[i]
        acc = dx * diag[i]
        for k in range(1, half + 1):
            w = 0.5 * dx if k == half else dx
            h = k * dx
            dfy = f[(i + k) % n] - fi
            acc += w * (dfy - h * dfi) / (h * h + dfy * dfy)
            dfy = f[(i - k + n) % n] - fi
            acc += w * (dfy + h * dfi) / (h * h + dfy * dfy)
        o[i] = acc
    return out


def muskat_window_sum(const double[::1] f, const double[::1] df, const double[::1] x,
                      const double[::1] diag):
    cdef Py_ssize_t n = f.shape[0], i, j
    cdef double acc, w, h, dfy, step = x[1] - x[0]
    out = np.zeros(n)
    cdef double[::1] o = out
    for i in range(n):
        acc = 0.0
        for j in range(n):
            w = 0.5 * step if (j == 0 or j == n - 1) else step
            if j == i:
                acc += w * diag[i]
                continue
            h = x[j] - x[i]
            dfy = f[j] - f[i]
            acc += w * (dfy - h * df[i]) / (h * h + dfy * dfy)
        o[i] = acc
    return out
