# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled scan kernels.

Each kernel covers the row block ``[start, end)`` so callers can split work
across threads; the GIL is released inside the loops.  Semantics must match
``_pykernels`` exactly, including which index wins a tie.
"""
from libc.math cimport fabs


def quad_scan(const double[:, ::1] lhs, const double[:, ::1] bb, const double[::1] ab,
              const unsigned char[:, ::1] distinct, int require_distinct, int mode,
              double eps, Py_ssize_t start, Py_ssize_t end):
    cdef Py_ssize_t k = lhs.shape[0]
    cdef Py_ssize_t i, j
    cdef long long count = 0
    cdef double best = -1.0
    cdef Py_ssize_t bi = -1, bj = -1, vi = -1, vj = -1
    cdef double l, r, ratio
    cdef bint bad
    with nogil:
        for i in range(start, end):
            for j in range(k):
                if require_distinct and not distinct[i, j]:
                    continue
                count += 1
                l = lhs[i, j]
                r = bb[i, j]
                if mode != 0:
                    r = r + fabs(ab[i] - ab[j])
                if r > eps:
                    ratio = l / r
                    if ratio > best:
                        best = ratio
                        bi = i
                        bj = j
                if vi < 0:
                    if mode == 2:
                        bad = not (l <= r - eps)
                    elif r > eps:
                        bad = l >= r
                    else:
                        bad = l > eps
                    if bad:
                        vi = i
                        vj = j
    return count, best, bi, bj, vi, vj


def pair_scan(const double[:, ::1] a, const double[:, ::1] b, double eps,
              Py_ssize_t start, Py_ssize_t end):
    cdef Py_ssize_t k = a.shape[1]
    cdef Py_ssize_t i, j
    cdef Py_ssize_t vi = -1, vj = -1
    with nogil:
        for i in range(start, end):
            for j in range(k):
                if fabs(a[i, j] - b[i, j]) > eps:
                    vi = i
                    vj = j
                    break
            if vi >= 0:
                break
    return (end - start) * k, vi, vj


def triangle_scan(const double[:, ::1] p, double eps, Py_ssize_t start, Py_ssize_t end):
    cdef Py_ssize_t n = p.shape[0]
    cdef Py_ssize_t x, y, z
    cdef Py_ssize_t fx = -1, fy = -1, fz = -1
    cdef double pxy
    with nogil:
        for x in range(start, end):
            for y in range(n):
                pxy = p[x, y]
                for z in range(n):
                    if p[x, z] > (pxy + p[y, z]) + eps:
                        fx = x
                        fy = y
                        fz = z
                        break
                if fx >= 0:
                    break
            if fx >= 0:
                break
    return fx, fy, fz
