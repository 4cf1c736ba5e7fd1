# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels (see ``_kernels_py`` for the reference versions)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, cos, sin

cnp.import_array()


def log_series_sum(C, w, int nA, int nB):
    """Weighted sum of bivariate Taylor series of ``ln Q`` over nodes."""
    cdef const double[:, :, ::1] c = np.ascontiguousarray(C, dtype=np.float64)
    cdef const double[::1] ww = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0]
    cdef int mA = nA + 1, mB = nB + 1
    out = np.zeros((mA, mB), dtype=np.float64)
    cdef double[:, ::1] o = out
    cdef double[:, ::1] f = np.zeros((mA, mB), dtype=np.float64)
    cdef Py_ssize_t k
    cdef int i, j, p, q, pmax, qmax
    cdef double inv, acc, wk
    for k in range(n):
        wk = ww[k]
        inv = 1.0 / c[k, 0, 0]
        f[0, 0] = log(c[k, 0, 0])
        for i in range(mA):
            for j in range(mB):
                if i == 0 and j == 0:
                    continue
                if i >= 1:
                    acc = i * c[k, i, j] if (i <= 2 and j <= 2) else 0.0
                    pmax = i if i < 2 else 2
                    qmax = j if j < 2 else 2
                    for p in range(pmax + 1):
                        if p == i:
                            continue
                        for q in range(qmax + 1):
                            if p == 0 and q == 0:
                                continue
                            acc -= c[k, p, q] * (i - p) * f[i - p, j - q]
                    f[i, j] = acc * inv / i
                else:
                    acc = j * c[k, 0, j] if j <= 2 else 0.0
                    qmax = j if j < 2 else 2
                    for q in range(1, qmax + 1):
                        if q == j:
                            continue
                        acc -= c[k, 0, q] * (j - q) * f[0, j - q]
                    f[0, j] = acc * inv / j
        for i in range(mA):
            for j in range(mB):
                o[i, j] += wk * f[i, j]
    return out


def cos_transform(values, nodes, weights, x):
    """``sum_k weights_k values_k exp(-i nodes_k x_m)`` for each ``x_m``."""
    vals = np.asarray(values)
    squeeze = vals.ndim == 1
    cdef const double complex[:, ::1] v = np.ascontiguousarray(np.atleast_2d(vals), dtype=np.complex128)
    cdef const double[::1] kn = np.ascontiguousarray(nodes, dtype=np.float64)
    cdef const double[::1] kw = np.ascontiguousarray(weights, dtype=np.float64)
    cdef const double[::1] xx = np.ascontiguousarray(x, dtype=np.float64)
    cdef Py_ssize_t r = v.shape[0], n = v.shape[1], m = xx.shape[0]
    out = np.zeros((r, m), dtype=np.complex128)
    cdef double complex[:, ::1] o = out
    cdef Py_ssize_t a, b, k
    cdef double ph, re, im
    cdef double complex z
    for b in range(m):
        for k in range(n):
            ph = kn[k] * xx[b]
            re = cos(ph) * kw[k]
            im = -sin(ph) * kw[k]
            for a in range(r):
                z = v[a, k]
                o[a, b] = o[a, b] + z * (re + 1j * im)
    return out[0] if squeeze else out
