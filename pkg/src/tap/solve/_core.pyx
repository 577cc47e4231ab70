# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled twin of the simplex scalar loops.

Mirrors the numpy kernel in tap.solve.simplex operation for operation:
per-element multiply-subtract in the elimination, strict-less-than
first-minimum selection in the ratio test.  Reductions (pricing, basis
refactorization) stay in numpy on both paths, so results agree bitwise;
the build disables floating-point contraction to keep it that way.
"""

from libc.math cimport INFINITY, isinf


def eliminate(double[:, ::1] T, double[::1] u, Py_ssize_t r, Py_ssize_t j):
    cdef Py_ssize_t m = T.shape[0]
    cdef Py_ssize_t nt = T.shape[1]
    cdef Py_ssize_t i, k
    cdef double piv = T[r, j]
    cdef double fac, ur
    for k in range(nt):
        T[r, k] = T[r, k] / piv
    u[r] = u[r] / piv
    ur = u[r]
    for i in range(m):
        if i == r:
            continue
        fac = T[i, j]
        if fac != 0.0:
            for k in range(nt):
                T[i, k] = T[i, k] - fac * T[r, k]
            u[i] = u[i] - fac * ur


def ratio_test(double[::1] col, double[::1] xb, double[::1] lob,
               double[::1] hib, signed char[::1] d, double sigma,
               double own_span, double piv_tol):
    cdef Py_ssize_t m = col.shape[0]
    cdef Py_ssize_t i
    cdef Py_ssize_t best_row = -2
    cdef double best_t = INFINITY
    cdef double delta, target, t
    cdef bint best_upper = False
    cdef bint upper
    for i in range(m):
        delta = -sigma * col[i]
        if d[i] == 0:
            if delta > piv_tol:
                target = hib[i]
                upper = True
            elif delta < -piv_tol:
                target = lob[i]
                upper = False
            else:
                continue
            if isinf(target):
                continue
        elif d[i] == -1:
            if delta > piv_tol:
                target = lob[i]
                upper = False
            else:
                continue
        else:
            if delta < -piv_tol:
                target = hib[i]
                upper = True
            else:
                continue
        t = (target - xb[i]) / delta
        if t < 0.0:
            t = 0.0
        if t < best_t:
            best_t = t
            best_row = i
            best_upper = upper
    if own_span < best_t:
        return own_span, -1, False
    if best_row == -2:
        return INFINITY, -2, False
    return best_t, best_row, best_upper
