# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: P1 element matrices, bucket point location, P1 evaluation.

Mirrors ``_pycore`` operation for operation.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, floor, fabs, INFINITY, NAN

cnp.import_array()


def element_matrices(const double[:, ::1] v, const cnp.int64_t[:, ::1] t):
    cdef Py_ssize_t m = t.shape[0], e, a, b
    cdef double x0, y0, x1, y1, x2, y2, twice, denom, ar
    cdef double bb[3]
    cdef double cc[3]
    area_arr = np.empty(m, dtype=np.float64)
    stiff_arr = np.empty((m, 3, 3), dtype=np.float64)
    mass_arr = np.empty((m, 3, 3), dtype=np.float64)
    cdef double[::1] area = area_arr
    cdef double[:, :, ::1] stiff = stiff_arr
    cdef double[:, :, ::1] mass = mass_arr
    with nogil:
        for e in range(m):
            x0 = v[t[e, 0], 0]; y0 = v[t[e, 0], 1]
            x1 = v[t[e, 1], 0]; y1 = v[t[e, 1], 1]
            x2 = v[t[e, 2], 0]; y2 = v[t[e, 2], 1]
            twice = (x1 - x0) * (y2 - y0) - (x2 - x0) * (y1 - y0)
            ar = 0.5 * twice
            area[e] = ar
            bb[0] = y1 - y2; bb[1] = y2 - y0; bb[2] = y0 - y1
            cc[0] = x2 - x1; cc[1] = x0 - x2; cc[2] = x1 - x0
            denom = 2.0 * twice
            for a in range(3):
                for b in range(3):
                    stiff[e, a, b] = (bb[a] * bb[b] + cc[a] * cc[b]) / denom
                    mass[e, a, b] = (ar / 12.0) * (2.0 if a == b else 1.0)
    return area_arr, stiff_arr, mass_arr


def locate(const double[:, ::1] v, const cnp.int64_t[:, ::1] t,
           const cnp.int64_t[::1] cell_ptr, const cnp.int64_t[::1] cell_tris,
           origin, inv_size, shape, const double[:, ::1] p, double tol):
    cdef Py_ssize_t npts = p.shape[0], q, s, i, j, k, tri, base
    cdef Py_ssize_t nx = shape[0], ny = shape[1], ix, iy, cell, start, count
    cdef double ox = origin[0], oy = origin[1], sx = inv_size[0], sy = inv_size[1]
    cdef double px, py, ex, ey, dmin, d, bestd, twice, other
    cdef double xs[3]
    cdef double ys[3]
    cdef double cross[3]
    cdef double edge[3]
    cdef double bc[3]
    cdef double be[3]
    cdef double btw
    cdef bint inside
    tri_arr = np.full(npts, -1, dtype=np.int64)
    bary_arr = np.empty((npts, 3), dtype=np.float64)
    cdef cnp.int64_t[::1] best = tri_arr
    cdef double[:, ::1] bary = bary_arr
    with nogil:
        for q in range(npts):
            px = p[q, 0]; py = p[q, 1]
            ix = <Py_ssize_t>floor((px - ox) * sx)
            iy = <Py_ssize_t>floor((py - oy) * sy)
            inside = ix >= -1 and ix <= nx and iy >= -1 and iy <= ny
            if ix < 0: ix = 0
            if ix > nx - 1: ix = nx - 1
            if iy < 0: iy = 0
            if iy > ny - 1: iy = ny - 1
            cell = iy * nx + ix
            if inside:
                start = cell_ptr[cell]
                count = cell_ptr[cell + 1] - cell_ptr[cell]
            else:
                start = 0
                count = 0
            bestd = -INFINITY
            bc[0] = 0.0; bc[1] = 0.0; bc[2] = 0.0
            be[0] = 1.0; be[1] = 1.0; be[2] = 1.0
            btw = 1.0
            for s in range(count):
                tri = cell_tris[start + s]
                for i in range(3):
                    xs[i] = v[t[tri, i], 0]
                    ys[i] = v[t[tri, i], 1]
                dmin = INFINITY
                for i in range(3):
                    j = (i + 1) % 3
                    k = (i + 2) % 3
                    ex = xs[k] - xs[j]
                    ey = ys[k] - ys[j]
                    cross[i] = ex * (py - ys[j]) - ey * (px - xs[j])
                    edge[i] = sqrt(ex * ex + ey * ey)
                    d = cross[i] / edge[i]
                    if d < dmin:
                        dmin = d
                if dmin >= -tol and dmin > bestd:
                    bestd = dmin
                    best[q] = tri
                    for i in range(3):
                        bc[i] = cross[i]
                        be[i] = edge[i]
                    btw = (xs[1] - xs[0]) * (ys[2] - ys[0]) - (xs[2] - xs[0]) * (ys[1] - ys[0])
            if best[q] < 0:
                bary[q, 0] = NAN; bary[q, 1] = NAN; bary[q, 2] = NAN
                continue
            for i in range(3):
                bary[q, i] = bc[i] / btw
                if fabs(bc[i] / be[i]) <= tol:
                    bary[q, i] = 0.0
            base = 0
            for i in range(1, 3):
                if bary[q, i] > bary[q, base]:
                    base = i
            other = 0.0
            for i in range(3):
                if i != base:
                    bc[i] = bary[q, i]
                else:
                    bc[i] = 0.0
            bary[q, base] = 1.0 - (bc[0] + bc[1] + bc[2])
    return tri_arr, bary_arr


def evaluate(const double[::1] u, const cnp.int64_t[:, ::1] t,
             const cnp.int64_t[::1] tri, const double[:, ::1] bary):
    cdef Py_ssize_t n = tri.shape[0], q, k, base
    cdef double ub, acc
    out_arr = np.empty(n, dtype=np.float64)
    cdef double[::1] out = out_arr
    with nogil:
        for q in range(n):
            base = 0
            for k in range(1, 3):
                if bary[q, k] > bary[q, base]:
                    base = k
            ub = u[t[tri[q], base]]
            acc = ub
            for k in range(3):
                if k != base:
                    acc = acc + bary[q, k] * (u[t[tri[q], k]] - ub)
                else:
                    acc = acc + 0.0
            out[q] = acc
    return out_arr
