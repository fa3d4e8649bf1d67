# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: rotation-sequence application and Jacobi SVD sweeps.

Keep the arithmetic order in sync with _kernels_py.py; the two backends are
expected to agree bit for bit (built with -ffp-contract=off).
"""

from libc.math cimport atan2, cos, fabs, sin

import numpy as np

cdef double QUARTER_PI = 0.7853981633974483
cdef double HALF_PI = 1.5707963267948966


cdef inline void _svd2x2(double a00, double a01, double a10, double a11,
                         bint ordered,
                         double* alpha, double* beta,
                         double* d0_out, double* d1_out) noexcept nogil:
    cdef double phi, c, s, s00, s01, s10, s11, r, psi, cp, sp, d0, d1, tmp
    phi = atan2(a10 - a01, a00 + a11)
    c = cos(phi)
    s = sin(phi)
    s00 = c * a00 + s * a10
    s01 = c * a01 + s * a11
    s10 = -s * a00 + c * a10
    s11 = -s * a01 + c * a11
    r = 0.5 * (s01 + s10)
    psi = 0.5 * atan2(-2.0 * r, s00 - s11)
    if not ordered:
        if psi > QUARTER_PI:
            psi -= HALF_PI
        elif psi < -QUARTER_PI:
            psi += HALF_PI
    cp = cos(psi)
    sp = sin(psi)
    d0 = cp * (s00 * cp - s01 * sp) - sp * (s10 * cp - s11 * sp)
    d1 = sp * (s00 * sp + s01 * cp) + cp * (s10 * sp + s11 * cp)
    alpha[0] = psi - phi
    beta[0] = psi
    if ordered:
        if fabs(d1) > fabs(d0):
            tmp = d0
            d0 = d1
            d1 = tmp
            alpha[0] += HALF_PI
            beta[0] += HALF_PI
        if d0 < 0.0:
            d0 = -d0
            d1 = -d1
            alpha[0] += 2.0 * HALF_PI
    d0_out[0] = d0
    d1_out[0] = d1


def svd2x2_angles(double a00, double a01, double a10, double a11, bint ordered=True):
    """See _kernels_py.svd2x2_angles."""
    cdef double alpha, beta, d0, d1
    _svd2x2(a00, a01, a10, a11, ordered, &alpha, &beta, &d0, &d1)
    return alpha, beta, d0, d1


def rotate_pairs(double[:, ::1] mat, long[::1] pp, long[::1] qq,
                 double[::1] angles, bint reverse=False):
    """See _kernels_py.rotate_pairs. mat must be 2-D C-contiguous."""
    cdef Py_ssize_t nrot = angles.shape[0]
    cdef Py_ssize_t ncol = mat.shape[1]
    cdef Py_ssize_t j, k, i
    cdef long p, q
    cdef double c, s, rp, rq
    with nogil:
        for k in range(nrot):
            j = nrot - 1 - k if reverse else k
            p = pp[j]
            q = qq[j]
            c = cos(angles[j])
            s = sin(angles[j])
            for i in range(ncol):
                rp = c * mat[p, i] + s * mat[q, i]
                rq = -s * mat[p, i] + c * mat[q, i]
                mat[p, i] = rp
                mat[q, i] = rq


def kogbetliantz_sweep(double[:, ::1] A, double[:, ::1] U, double[:, ::1] V):
    """See _kernels_py.kogbetliantz_sweep."""
    cdef Py_ssize_t n = A.shape[0]
    cdef Py_ssize_t p, q, i
    cdef double alpha, beta, d0, d1, ca, sa, cb, sb, rp, rq
    with nogil:
        for p in range(n - 1):
            for q in range(p + 1, n):
                _svd2x2(A[p, p], A[p, q], A[q, p], A[q, q], 0,
                        &alpha, &beta, &d0, &d1)
                ca = cos(alpha)
                sa = sin(alpha)
                cb = cos(beta)
                sb = sin(beta)
                for i in range(n):
                    rp = ca * A[p, i] - sa * A[q, i]
                    rq = sa * A[p, i] + ca * A[q, i]
                    A[p, i] = rp
                    A[q, i] = rq
                for i in range(n):
                    rp = cb * A[i, p] - sb * A[i, q]
                    rq = sb * A[i, p] + cb * A[i, q]
                    A[i, p] = rp
                    A[i, q] = rq
                for i in range(n):
                    rp = ca * U[i, p] - sa * U[i, q]
                    rq = sa * U[i, p] + ca * U[i, q]
                    U[i, p] = rp
                    U[i, q] = rq
                for i in range(n):
                    rp = cb * V[i, p] - sb * V[i, q]
                    rq = sb * V[i, p] + cb * V[i, q]
                    V[i, p] = rp
                    V[i, q] = rq
