# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: edge-closure marking, CSR assembly, fused Jacobi PCG.

Call signatures match ``_kernels_py``.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def mark_closure(const cnp.int64_t[:, ::1] tri_edges, const cnp.int64_t[::1] longest_local,
                 cnp.npy_bool[::1] edge_marked, int max_rounds):
    cdef Py_ssize_t m = tri_edges.shape[0]
    cdef Py_ssize_t t
    cdef cnp.int64_t le
    cdef int rnd
    cdef bint changed
    for rnd in range(max_rounds + 1):
        changed = False
        for t in range(m):
            le = tri_edges[t, longest_local[t]]
            if edge_marked[le]:
                continue
            if edge_marked[tri_edges[t, 0]] or edge_marked[tri_edges[t, 1]] or edge_marked[tri_edges[t, 2]]:
                if rnd == max_rounds:
                    return -1
                edge_marked[le] = True
                changed = True
        if not changed:
            return rnd
    return -1


def assemble_csr(tris_in, local_in, Py_ssize_t n):
    cdef const cnp.int64_t[:, ::1] tris = np.ascontiguousarray(tris_in, dtype=np.int64)
    cdef const double[:, :, ::1] local = np.ascontiguousarray(local_in, dtype=np.float64)
    cdef Py_ssize_t m = tris.shape[0]
    cdef Py_ssize_t k = tris.shape[1]
    cdef Py_ssize_t t, i, j, v, s, e, lo, hi, mid
    cdef cnp.int64_t row, col

    # vertex -> triangle incidence
    cdef cnp.int64_t[::1] vcount = np.zeros(n + 1, dtype=np.int64)
    for t in range(m):
        for i in range(k):
            vcount[tris[t, i] + 1] += 1
    for v in range(n):
        vcount[v + 1] += vcount[v]
    cdef cnp.int64_t[::1] vtri = np.empty(vcount[n], dtype=np.int64)
    cdef cnp.int64_t[::1] fill = np.zeros(n, dtype=np.int64)
    for t in range(m):
        for i in range(k):
            v = tris[t, i]
            vtri[vcount[v] + fill[v]] = t
            fill[v] += 1

    # sorted unique column pattern per row
    cdef cnp.int64_t[::1] indptr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] marker = np.full(n, -1, dtype=np.int64)
    for v in range(n):
        s = 0
        for e in range(vcount[v], vcount[v + 1]):
            t = vtri[e]
            for j in range(k):
                col = tris[t, j]
                if marker[col] != v:
                    marker[col] = v
                    s += 1
        indptr[v + 1] = indptr[v] + s
    cdef cnp.int64_t[::1] indices = np.empty(indptr[n], dtype=np.int64)
    marker[:] = -1
    for v in range(n):
        s = indptr[v]
        for e in range(vcount[v], vcount[v + 1]):
            t = vtri[e]
            for j in range(k):
                col = tris[t, j]
                if marker[col] != v:
                    marker[col] = v
                    indices[s] = col
                    s += 1
    arr = np.asarray(indices)
    ip = np.asarray(indptr)
    for v in range(n):
        arr[ip[v]:ip[v + 1]].sort()

    # scatter in triangle order
    cdef double[::1] data = np.zeros(indptr[n], dtype=np.float64)
    for t in range(m):
        for i in range(k):
            row = tris[t, i]
            for j in range(k):
                col = tris[t, j]
                lo = indptr[row]
                hi = indptr[row + 1] - 1
                while lo < hi:
                    mid = (lo + hi) >> 1
                    if indices[mid] < col:
                        lo = mid + 1
                    else:
                        hi = mid
                data[lo] += local[t, i, j]
    return ip, arr, np.asarray(data)


cdef inline void _matvec(const cnp.int64_t[::1] indptr, const cnp.int64_t[::1] indices, const double[::1] data,
                         const double[::1] x, double[::1] y) noexcept nogil:
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t i, e
    cdef double acc
    for i in range(n):
        acc = 0.0
        for e in range(indptr[i], indptr[i + 1]):
            acc += data[e] * x[indices[e]]
        y[i] = acc


cdef inline double _dot(const double[::1] a, const double[::1] b) noexcept nogil:
    cdef Py_ssize_t i
    cdef double acc = 0.0
    for i in range(a.shape[0]):
        acc += a[i] * b[i]
    return acc


cdef inline void _center(double[::1] a) noexcept nogil:
    cdef Py_ssize_t i
    cdef Py_ssize_t n = a.shape[0]
    cdef double mean = 0.0
    for i in range(n):
        mean += a[i]
    mean /= n
    for i in range(n):
        a[i] -= mean


def csr_matvec(indptr_in, indices_in, data_in, x_in):
    cdef const cnp.int64_t[::1] indptr = np.ascontiguousarray(indptr_in, dtype=np.int64)
    cdef const cnp.int64_t[::1] indices = np.ascontiguousarray(indices_in, dtype=np.int64)
    cdef const double[::1] data = np.ascontiguousarray(data_in, dtype=np.float64)
    cdef const double[::1] x = np.ascontiguousarray(x_in, dtype=np.float64)
    y = np.empty(indptr.shape[0] - 1)
    _matvec(indptr, indices, data, x, y)
    return y


def pcg_jacobi(indptr_in, indices_in, data_in, b_in, double tol, Py_ssize_t maxiter, bint project):
    cdef const cnp.int64_t[::1] indptr = np.ascontiguousarray(indptr_in, dtype=np.int64)
    cdef const cnp.int64_t[::1] indices = np.ascontiguousarray(indices_in, dtype=np.int64)
    cdef const double[::1] data = np.ascontiguousarray(data_in, dtype=np.float64)
    cdef const double[::1] b = np.ascontiguousarray(b_in, dtype=np.float64)
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t i, e, it = 0
    cdef double bnorm, rz, rz_new, pq, alpha, beta, rn
    cdef bint converged = False

    x_arr = np.zeros(n)
    cdef double[::1] x = x_arr
    cdef double[::1] r = np.array(b, copy=True)
    cdef double[::1] z = np.empty(n)
    cdef double[::1] p = np.empty(n)
    cdef double[::1] q = np.empty(n)
    cdef double[::1] dinv = np.zeros(n)

    bnorm = sqrt(_dot(b, b))
    if bnorm == 0.0:
        return x_arr, 0, 0.0, True
    with nogil:
        for i in range(n):
            for e in range(indptr[i], indptr[i + 1]):
                if indices[e] == i and data[e] != 0.0:
                    dinv[i] = 1.0 / data[e]
        if project:
            _center(r)
        for i in range(n):
            z[i] = dinv[i] * r[i]
        if project:
            _center(z)
        for i in range(n):
            p[i] = z[i]
        rz = _dot(r, z)
        while it < maxiter:
            it += 1
            _matvec(indptr, indices, data, p, q)
            pq = _dot(p, q)
            if pq <= 0.0:
                break
            alpha = rz / pq
            for i in range(n):
                x[i] += alpha * p[i]
                r[i] -= alpha * q[i]
            if project:
                _center(r)
            if sqrt(_dot(r, r)) <= tol * bnorm:
                _matvec(indptr, indices, data, x, q)
                for i in range(n):
                    r[i] = b[i] - q[i]
                if project:
                    _center(r)
                if sqrt(_dot(r, r)) <= tol * bnorm:
                    converged = True
                    break
                for i in range(n):
                    z[i] = dinv[i] * r[i]
                if project:
                    _center(z)
                for i in range(n):
                    p[i] = z[i]
                rz = _dot(r, z)
                continue
            for i in range(n):
                z[i] = dinv[i] * r[i]
            if project:
                _center(z)
            rz_new = _dot(r, z)
            beta = rz_new / rz
            for i in range(n):
                p[i] = z[i] + beta * p[i]
            rz = rz_new
        _matvec(indptr, indices, data, x, q)
        for i in range(n):
            r[i] = b[i] - q[i]
        if project:
            _center(r)
        rn = sqrt(_dot(r, r))
    return x_arr, it, rn / bnorm, converged
