# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops: radius neighbor search, CSR products, ball stencils.

Every function here has a numpy twin in ``_kernels_py`` with the same
signature and the same floating-point operation order.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, fabs, floor
from libcpp.vector cimport vector

cnp.import_array()


cdef inline double _axis_gap(double a, double b, double period) nogil:
    cdef double d = fabs(a - b)
    if period > 0.0 and period - d < d:
        d = period - d
    return d


def radius_pairs(double[:, ::1] coords, double[::1] periods, double rho):
    """Unordered pairs (i < j) with distance strictly below ``rho``.

    ``coords`` has exactly three columns; unused axes are zero with period 0.
    Periodic axes use the minimal image.
    """
    cdef Py_ssize_t npts = coords.shape[0]
    cdef Py_ssize_t a, i, j, p, q, r, s
    cdef long ncell[3]
    cdef double lo[3]
    cdef double csize[3]
    cdef double hi, x
    for a in range(3):
        if periods[a] > 0.0:
            lo[a] = 0.0
            ncell[a] = <long>floor(periods[a] / rho)
            if ncell[a] < 1:
                ncell[a] = 1
            csize[a] = periods[a] / ncell[a]
        else:
            lo[a] = 0.0
            hi = 0.0
            if npts > 0:
                lo[a] = coords[0, a]
                hi = coords[0, a]
            for i in range(npts):
                x = coords[i, a]
                if x < lo[a]:
                    lo[a] = x
                if x > hi:
                    hi = x
            csize[a] = rho
            ncell[a] = <long>floor((hi - lo[a]) / rho) + 1

    cdef long total = ncell[0] * ncell[1] * ncell[2]
    cdef long[:, ::1] cell_of = np.empty((npts, 3), dtype=np.int64)
    cdef long[::1] flat = np.empty(npts, dtype=np.int64)
    cdef long c
    for i in range(npts):
        for a in range(3):
            c = <long>floor((coords[i, a] - lo[a]) / csize[a])
            if c < 0:
                c = 0
            if c >= ncell[a]:
                c = ncell[a] - 1
            cell_of[i, a] = c
        flat[i] = (cell_of[i, 0] * ncell[1] + cell_of[i, 1]) * ncell[2] + cell_of[i, 2]

    # bucket points by cell (counting sort keeps ascending index order)
    cdef long[::1] start = np.zeros(total + 1, dtype=np.int64)
    for i in range(npts):
        start[flat[i] + 1] += 1
    for c in range(total):
        start[c + 1] += start[c]
    cdef long[::1] fill = np.array(start[:total], dtype=np.int64)
    cdef long[::1] order = np.empty(npts, dtype=np.int64)
    for i in range(npts):
        order[fill[flat[i]]] = i
        fill[flat[i]] += 1

    # neighbor cell offsets per axis, deduplicated when an axis has < 3 cells
    cdef long noff[3]
    cdef long offs[3][3]
    cdef long k, m
    cdef bint seen
    for a in range(3):
        noff[a] = 0
        for k in range(-1, 2):
            if periods[a] > 0.0:
                m = k
                if ncell[a] < 3:
                    # offsets that wrap onto the same cell are merged
                    m = ((k % ncell[a]) + ncell[a]) % ncell[a]
            else:
                m = k
            seen = False
            for p in range(noff[a]):
                if offs[a][p] == m:
                    seen = True
            if not seen:
                offs[a][noff[a]] = m
                noff[a] += 1

    cdef vector[long] out_i
    cdef vector[long] out_j
    cdef vector[double] out_d
    cdef long ci[3]
    cdef long cj[3]
    cdef long cell, b0, b1
    cdef double d0, d1, d2, dist
    cdef bint ok
    for i in range(npts):
        for p in range(noff[0]):
            for q in range(noff[1]):
                for r in range(noff[2]):
                    ok = True
                    cj[0] = offs[0][p]
                    cj[1] = offs[1][q]
                    cj[2] = offs[2][r]
                    for a in range(3):
                        if periods[a] > 0.0:
                            if ncell[a] < 3:
                                ci[a] = cj[a]
                            else:
                                ci[a] = ((cell_of[i, a] + cj[a]) % ncell[a] + ncell[a]) % ncell[a]
                        else:
                            ci[a] = cell_of[i, a] + cj[a]
                            if ci[a] < 0 or ci[a] >= ncell[a]:
                                ok = False
                    if not ok:
                        continue
                    cell = (ci[0] * ncell[1] + ci[1]) * ncell[2] + ci[2]
                    b0 = start[cell]
                    b1 = start[cell + 1]
                    for s in range(b0, b1):
                        j = order[s]
                        if j <= i:
                            continue
                        d0 = _axis_gap(coords[i, 0], coords[j, 0], periods[0])
                        d1 = _axis_gap(coords[i, 1], coords[j, 1], periods[1])
                        d2 = _axis_gap(coords[i, 2], coords[j, 2], periods[2])
                        dist = sqrt(d0 * d0 + d1 * d1 + d2 * d2)
                        if dist < rho:
                            out_i.push_back(i)
                            out_j.push_back(j)
                            out_d.push_back(dist)

    cdef Py_ssize_t ne = out_i.size()
    ii = np.empty(ne, dtype=np.int64)
    jj = np.empty(ne, dtype=np.int64)
    dd = np.empty(ne, dtype=np.float64)
    cdef long[::1] iv = ii
    cdef long[::1] jv = jj
    cdef double[::1] dv = dd
    for s in range(ne):
        iv[s] = out_i[s]
        jv[s] = out_j[s]
        dv[s] = out_d[s]
    return ii, jj, dd


def csr_matvec(long[::1] indptr, long[::1] indices, double[::1] data, double[::1] x):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] y = out
    cdef Py_ssize_t row, p
    cdef double acc
    with nogil:
        for row in range(n):
            acc = 0.0
            for p in range(indptr[row], indptr[row + 1]):
                acc = acc + data[p] * x[indices[p]]
            y[row] = acc
    return out


def csr_matmat(long[::1] indptr, long[::1] indices, double[::1] data, double[:, ::1] x):
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t b = x.shape[1]
    out = np.zeros((n, b), dtype=np.float64)
    cdef double[:, ::1] y = out
    cdef Py_ssize_t row, p, c
    cdef long col
    cdef double v
    with nogil:
        for row in range(n):
            for p in range(indptr[row], indptr[row + 1]):
                v = data[p]
                col = indices[p]
                for c in range(b):
                    y[row, c] = y[row, c] + v * x[col, c]
    return out


cdef inline bint _shift(long i, long o, long size, int periodic, long* res) nogil:
    cdef long k = i + o
    if periodic:
        k = k % size
        if k < 0:
            k += size
    elif k < 0 or k >= size:
        return False
    res[0] = k
    return True


cdef inline void _row_segments(long o, long size, int periodic, long* seg) nogil:
    """Split the innermost axis into runs with a constant source shift.

    ``seg`` receives ``(begin, end, shift)`` for two runs; positions not
    covered by either run fall outside a clamped axis.
    """
    cdef long q
    if periodic:
        q = o % size
        if q < 0:
            q += size
        seg[0] = 0
        seg[1] = size - q
        seg[2] = q
        seg[3] = size - q
        seg[4] = size
        seg[5] = q - size
    else:
        seg[0] = 0 if o >= 0 else -o
        if seg[0] > size:
            seg[0] = size
        seg[1] = size - o if o >= 0 else size
        if seg[1] < seg[0]:
            seg[1] = seg[0]
        seg[2] = o
        seg[3] = 0
        seg[4] = 0
        seg[5] = 0


def ball_correlate(double[:, :, ::1] f, long[:, ::1] offsets, double[::1] weights,
                   int[::1] periodic):
    """out[x] = sum_k weights[k] * f[x + offsets[k]], zero outside clamped axes."""
    cdef long n0 = f.shape[0], n1 = f.shape[1], n2 = f.shape[2]
    cdef Py_ssize_t nk = offsets.shape[0]
    out = np.zeros((n0, n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] y = out
    cdef long i0, i1, i2, j0, j1, r, b, e, sh
    cdef long seg[6]
    cdef Py_ssize_t k
    cdef double wk
    cdef double* yrow
    cdef double* frow
    with nogil:
        for k in range(nk):
            wk = weights[k]
            _row_segments(offsets[k, 2], n2, periodic[2], seg)
            for i0 in range(n0):
                if not _shift(i0, offsets[k, 0], n0, periodic[0], &j0):
                    continue
                for i1 in range(n1):
                    if not _shift(i1, offsets[k, 1], n1, periodic[1], &j1):
                        continue
                    yrow = &y[i0, i1, 0]
                    frow = &f[j0, j1, 0]
                    for r in range(2):
                        b = seg[3 * r]
                        e = seg[3 * r + 1]
                        sh = seg[3 * r + 2]
                        for i2 in range(b, e):
                            yrow[i2] = yrow[i2] + wk * frow[i2 + sh]
    return out


def ball_dispersion(double[:, :, ::1] f, long[:, ::1] offsets, int[::1] periodic):
    """Per-node sum over offsets of (f[x + o] - f[x])**2, zero outside clamped axes."""
    cdef long n0 = f.shape[0], n1 = f.shape[1], n2 = f.shape[2]
    cdef Py_ssize_t nk = offsets.shape[0]
    out = np.zeros((n0, n1, n2), dtype=np.float64)
    cdef double[:, :, ::1] y = out
    cdef long i0, i1, i2, j0, j1, r, b, e, sh
    cdef long seg[6]
    cdef Py_ssize_t k
    cdef double diff
    cdef bint inside
    cdef double* yrow
    cdef double* frow
    cdef double* xrow
    cdef bint partial
    with nogil:
        for k in range(nk):
            _row_segments(offsets[k, 2], n2, periodic[2], seg)
            partial = (seg[1] - seg[0]) + (seg[4] - seg[3]) < n2
            for i0 in range(n0):
                inside = _shift(i0, offsets[k, 0], n0, periodic[0], &j0)
                for i1 in range(n1):
                    yrow = &y[i0, i1, 0]
                    xrow = &f[i0, i1, 0]
                    if not (inside and _shift(i1, offsets[k, 1], n1, periodic[1], &j1)):
                        # the whole row reads from outside a clamped axis
                        for i2 in range(n2):
                            diff = 0.0 - xrow[i2]
                            yrow[i2] = yrow[i2] + diff * diff
                        continue
                    frow = &f[j0, j1, 0]
                    if partial:
                        # clamped innermost axis: the uncovered ends read zero
                        for i2 in range(0, seg[0]):
                            diff = 0.0 - xrow[i2]
                            yrow[i2] = yrow[i2] + diff * diff
                        for i2 in range(seg[1], n2):
                            diff = 0.0 - xrow[i2]
                            yrow[i2] = yrow[i2] + diff * diff
                    for r in range(2):
                        b = seg[3 * r]
                        e = seg[3 * r + 1]
                        sh = seg[3 * r + 2]
                        for i2 in range(b, e):
                            diff = frow[i2 + sh] - xrow[i2]
                            yrow[i2] = yrow[i2] + diff * diff
    return out
