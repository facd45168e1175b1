# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled log-domain Sinkhorn half-steps.

Both routines stream over a C-contiguous cost matrix once per pass and
allocate nothing proportional to its size.
"""
import numpy as np

from libc.math cimport exp, log, INFINITY


def softmin_rows(const double[:, ::1] cost, const double[::1] g,
                 const double[::1] logb, double eps):
    """f_i = -eps * log sum_j exp((g_j - C_ij) / eps + logb_j)."""
    cdef Py_ssize_t n = cost.shape[0], m = cost.shape[1], i, j
    cdef double inv = 1.0 / eps, mx, s, t
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] f = out
    with nogil:
        for i in range(n):
            mx = -INFINITY
            for j in range(m):
                t = (g[j] - cost[i, j]) * inv + logb[j]
                if t > mx:
                    mx = t
            s = 0.0
            for j in range(m):
                s += exp((g[j] - cost[i, j]) * inv + logb[j] - mx)
            f[i] = -eps * (mx + log(s))
    return out


def softmin_cols(const double[:, ::1] cost, const double[::1] f,
                 const double[::1] loga, double eps):
    """g_j = -eps * log sum_i exp((f_i - C_ij) / eps + loga_i)."""
    cdef Py_ssize_t n = cost.shape[0], m = cost.shape[1], i, j
    cdef double inv = 1.0 / eps, t, base
    mx_arr = np.full(m, -INFINITY, dtype=np.float64)
    s_arr = np.zeros(m, dtype=np.float64)
    out = np.empty(m, dtype=np.float64)
    cdef double[::1] mx = mx_arr
    cdef double[::1] s = s_arr
    cdef double[::1] g = out
    with nogil:
        for i in range(n):
            base = f[i] * inv + loga[i]
            for j in range(m):
                t = base - cost[i, j] * inv
                if t > mx[j]:
                    mx[j] = t
        for i in range(n):
            base = f[i] * inv + loga[i]
            for j in range(m):
                s[j] += exp(base - cost[i, j] * inv - mx[j])
        for j in range(m):
            g[j] = -eps * (mx[j] + log(s[j]))
    return out
