# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Jacobi sweeps for complex matrices.

Both kernels work in place and return the number of sweeps used, or -1 if
the sweep limit was reached without convergence.  Column-oriented data is
passed transposed so that every rotated vector is a contiguous row.
"""

from libc.float cimport DBL_EPSILON
from libc.math cimport sqrt, fabs

cdef extern from "complex.h" nogil:
    double cabs(double complex)
    double complex conj(double complex)


cdef inline void _rotation(double a, double d, double complex b,
                           double *c, double *s, double complex *e,
                           double *t) noexcept nogil:
    # Unitary G = diag(1, conj(e)) @ [[c, s], [-s, c]] diagonalises
    # [[a, b], [conj(b), d]] with b = |b| e.
    cdef double ab = cabs(b)
    cdef double tau = (d - a) / (2.0 * ab)
    cdef double tt
    if tau >= 0:
        tt = 1.0 / (tau + sqrt(1.0 + tau * tau))
    else:
        tt = -1.0 / (-tau + sqrt(1.0 + tau * tau))
    c[0] = 1.0 / sqrt(1.0 + tt * tt)
    s[0] = tt * c[0]
    e[0] = b / ab
    t[0] = tt


cdef int _one_sided(double complex[:, ::1] at, double complex[:, ::1] vt,
                    double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t ncol = at.shape[0]
    cdef Py_ssize_t m = at.shape[1]
    cdef Py_ssize_t nv = vt.shape[1]
    cdef Py_ssize_t i, j, r
    cdef int sweep, rotated
    cdef double alpha, beta, c, s, t, amax, floor
    cdef double complex gamma, e, ce, xp, xq
    for sweep in range(max_sweeps):
        rotated = 0
        # columns below m * eps of the largest are numerically zero; their
        # inner products with large columns sit at rounding level for good
        amax = 0.0
        for i in range(ncol):
            alpha = 0.0
            for r in range(m):
                xp = at[i, r]
                alpha = alpha + xp.real * xp.real + xp.imag * xp.imag
            if alpha > amax:
                amax = alpha
        floor = (m * DBL_EPSILON) * (m * DBL_EPSILON) * amax
        for i in range(ncol - 1):
            for j in range(i + 1, ncol):
                alpha = 0.0
                beta = 0.0
                gamma = 0.0
                for r in range(m):
                    xp = at[i, r]
                    xq = at[j, r]
                    alpha = alpha + xp.real * xp.real + xp.imag * xp.imag
                    beta = beta + xq.real * xq.real + xq.imag * xq.imag
                    gamma = gamma + conj(xp) * xq
                if alpha <= floor or beta <= floor:
                    continue
                if cabs(gamma) <= tol * sqrt(alpha) * sqrt(beta):
                    continue
                rotated = 1
                _rotation(alpha, beta, gamma, &c, &s, &e, &t)
                ce = conj(e)
                for r in range(m):
                    xp = at[i, r]
                    xq = at[j, r]
                    at[i, r] = c * xp - s * ce * xq
                    at[j, r] = s * xp + c * ce * xq
                for r in range(nv):
                    xp = vt[i, r]
                    xq = vt[j, r]
                    vt[i, r] = c * xp - s * ce * xq
                    vt[j, r] = s * xp + c * ce * xq
        if not rotated:
            return sweep + 1
    return -1


cdef int _two_sided(double complex[:, ::1] h, double complex[:, ::1] vt,
                    double tol, int max_sweeps) noexcept nogil:
    cdef Py_ssize_t n = h.shape[0]
    cdef Py_ssize_t i, j, r
    cdef int sweep, rotated
    cdef double a, d, c, s, t, ab, fro, thresh
    cdef double complex b, e, ce, xp, xq
    fro = 0.0
    for i in range(n):
        for j in range(n):
            fro = fro + h[i, j].real * h[i, j].real + h[i, j].imag * h[i, j].imag
    thresh = tol * sqrt(fro)
    for sweep in range(max_sweeps):
        rotated = 0
        for i in range(n - 1):
            for j in range(i + 1, n):
                b = h[i, j]
                ab = cabs(b)
                if ab <= thresh:
                    continue
                rotated = 1
                a = h[i, i].real
                d = h[j, j].real
                _rotation(a, d, b, &c, &s, &e, &t)
                ce = conj(e)
                # columns: H <- H G
                for r in range(n):
                    xp = h[r, i]
                    xq = h[r, j]
                    h[r, i] = c * xp - s * ce * xq
                    h[r, j] = s * xp + c * ce * xq
                # rows: H <- G^H H
                for r in range(n):
                    xp = h[i, r]
                    xq = h[j, r]
                    h[i, r] = c * xp - s * e * xq
                    h[j, r] = s * xp + c * e * xq
                h[i, j] = 0.0
                h[j, i] = 0.0
                h[i, i] = a - t * ab
                h[j, j] = d + t * ab
                for r in range(n):
                    xp = vt[i, r]
                    xq = vt[j, r]
                    vt[i, r] = c * xp - s * ce * xq
                    vt[j, r] = s * xp + c * ce * xq
        if not rotated:
            return sweep + 1
    return -1


def one_sided(double complex[:, ::1] at, double complex[:, ::1] vt,
              double tol, int max_sweeps):
    """Cyclic one-sided Jacobi on the rows of ``at`` (columns of A)."""
    cdef int res
    with nogil:
        res = _one_sided(at, vt, tol, max_sweeps)
    return res


def two_sided(double complex[:, ::1] h, double complex[:, ::1] vt,
              double tol, int max_sweeps):
    """Cyclic Jacobi on a Hermitian ``h``; eigenvectors accumulate in rows of ``vt``."""
    cdef int res
    with nogil:
        res = _two_sided(h, vt, tol, max_sweeps)
    return res
