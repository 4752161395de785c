# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot loops. Mirrors kernels/pure.py operation for operation.

The descent loop routes its matrix-vector products through the same BLAS
(dgemv/ddot) that NumPy dispatches to, and the extension is compiled with
floating-point contraction disabled, so descent iterates agree *bitwise*
with the pure backend. The RK4 loop uses plain C loops (fastest at these
sizes); it matches the pure backend to rounding error, not bitwise.
"""

import numpy as np

from libc.math cimport sqrt
from scipy.linalg.cython_blas cimport ddot, dgemv


cdef void _gemv(double[:, ::1] A, double[::1] x, double[::1] y) noexcept nogil:
    """y = A @ x for a C-contiguous (p, q) matrix.

    Row-major memory read column-major is A^T, so trans='T' recovers A @ x;
    this is the same call NumPy makes, which is what buys bitwise equality.
    """
    cdef int p = <int> A.shape[0]
    cdef int q = <int> A.shape[1]
    cdef int one = 1
    cdef int i
    cdef double alpha = 1.0
    cdef double beta = 0.0
    cdef char trans = b'T'
    if p == 0:
        return
    if q == 0:
        for i in range(p):
            y[i] = 0.0
        return
    dgemv(&trans, &q, &p, &alpha, &A[0, 0], &q, &x[0], &one, &beta, &y[0], &one)


cdef double _dot(double[::1] a, double[::1] b) noexcept nogil:
    cdef int n = <int> a.shape[0]
    cdef int one = 1
    if n == 0:
        return 0.0
    return ddot(&n, &a[0], &one, &b[0], &one)


def rk4_lti(double[:, ::1] M, double[:, ::1] W, double[::1] x0, double h, int steps):
    """See kernels.pure.rk4_lti."""
    cdef Py_ssize_t n = x0.shape[0]
    out_np = np.empty((steps + 1, n))
    k1_np = np.empty(n)
    k2_np = np.empty(n)
    k3_np = np.empty(n)
    k4_np = np.empty(n)
    xt_np = np.empty(n)
    x_np = np.empty(n)
    cdef double[:, ::1] out = out_np
    cdef double[::1] k1 = k1_np, k2 = k2_np, k3 = k3_np, k4 = k4_np
    cdef double[::1] xt = xt_np, x = x_np
    cdef Py_ssize_t i, r, cc, base
    cdef double s
    cdef double h2 = 0.5 * h
    cdef double h6 = h / 6.0
    with nogil:
        for r in range(n):
            x[r] = x0[r]
            out[0, r] = x0[r]
        for i in range(steps):
            base = 3 * i
            for r in range(n):
                s = 0.0
                for cc in range(n):
                    s += M[r, cc] * x[cc]
                k1[r] = s + W[base, r]
            for r in range(n):
                xt[r] = x[r] + h2 * k1[r]
            for r in range(n):
                s = 0.0
                for cc in range(n):
                    s += M[r, cc] * xt[cc]
                k2[r] = s + W[base + 1, r]
            for r in range(n):
                xt[r] = x[r] + h2 * k2[r]
            for r in range(n):
                s = 0.0
                for cc in range(n):
                    s += M[r, cc] * xt[cc]
                k3[r] = s + W[base + 1, r]
            for r in range(n):
                xt[r] = x[r] + h * k3[r]
            for r in range(n):
                s = 0.0
                for cc in range(n):
                    s += M[r, cc] * xt[cc]
                k4[r] = s + W[base + 2, r]
            for r in range(n):
                x[r] = x[r] + h6 * (k1[r] + 2.0 * (k2[r] + k3[r]) + k4[r])
                out[i + 1, r] = x[r]
    return out_np


def descent_loop(double[:, ::1] A, double[::1] b, double c, double[:, ::1] Bmat,
                 double[::1] x0, double gamma, double scale, int policy,
                 double[::1] u_const, double[:, ::1] gain, double[:, ::1] schedule,
                 int max_iters, double stop_tol, ref):
    """See kernels.pure.descent_loop; identical record/stopping semantics."""
    cdef Py_ssize_t n = x0.shape[0]
    cdef Py_ssize_t m = Bmat.shape[1]
    cdef int rows = max_iters + 1
    f_np = np.empty(rows)
    gn_np = np.empty(rows)
    un_np = np.empty(rows)
    cdef bint has_ref = ref is not None
    dist_np = np.empty(rows) if has_ref else None
    x_np = np.empty(n)
    g_np = np.empty(n)
    e_np = np.empty(n)
    bu_np = np.empty(n)
    u_np = np.empty(m)
    cdef double[::1] f = f_np, gn = gn_np, un = un_np
    cdef double[::1] dist = dist_np if has_ref else x_np
    cdef double[::1] refv = ref if has_ref else x_np
    cdef double[::1] x = x_np, g = g_np, e = e_np, bu = bu_np, u = u_np
    cdef Py_ssize_t j
    cdef int k = 0
    cdef int exhausted = -1
    cdef bint converged = False
    cdef bint have_u, unz
    for j in range(n):
        x[j] = x0[j]
    while True:
        _gemv(A, x, g)
        for j in range(n):
            g[j] = g[j] + b[j]
        have_u = False
        if policy == 1:
            for j in range(m):
                u[j] = u_const[j]
            have_u = True
        elif policy == 2:
            _gemv(gain, x, u)
            have_u = True
        elif policy == 3:
            _gemv(gain, g, u)
            have_u = True
        elif policy == 4:
            if k < schedule.shape[0]:
                for j in range(m):
                    u[j] = schedule[k, j]
                have_u = True
        f[k] = 0.5 * _dot(x, g) + 0.5 * _dot(x, b) + c
        gn[k] = sqrt(_dot(g, g))
        un[k] = sqrt(_dot(u, u)) if have_u else 0.0
        if has_ref:
            for j in range(n):
                e[j] = x[j] - refv[j]
            dist[k] = sqrt(_dot(e, e))
        if gn[k] <= stop_tol:
            converged = True
            break
        if k == max_iters:
            break
        if policy == 4 and not have_u:
            exhausted = k
            break
        for j in range(n):
            x[j] = x[j] - gamma * g[j]
        unz = False
        if have_u:
            for j in range(m):
                if u[j] != 0.0:
                    unz = True
                    break
        if unz:
            _gemv(Bmat, u, bu)
            for j in range(n):
                x[j] = x[j] + scale * bu[j]
        k += 1
    used = k + 1
    d_out = dist_np[:used].copy() if has_ref else None
    return (f_np[:used].copy(), gn_np[:used].copy(), un_np[:used].copy(), d_out,
            x_np.copy(), k, bool(converged), exhausted)
