# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
# distutils: language = c++
"""Compiled hot loops: exact squared EDT and cubical boundary reduction.

Both functions mirror :mod:`phfcox._fallback` exactly; the two are selected
between by :mod:`phfcox._backend`.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport INFINITY
from libcpp.vector cimport vector

cnp.import_array()


cdef void _dt1d(double* f, double* d, Py_ssize_t n, Py_ssize_t* v, double* z) noexcept nogil:
    # Lower envelope of parabolas rooted at the finite entries of f.
    cdef Py_ssize_t q, k = -1
    cdef double s
    for q in range(n):
        if f[q] == INFINITY:
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -INFINITY
            z[1] = INFINITY
            continue
        while True:
            s = ((f[q] + <double>(q * q)) - (f[v[k]] + <double>(v[k] * v[k]))) / (2.0 * (q - v[k]))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = INFINITY
    if k < 0:
        for q in range(n):
            d[q] = INFINITY
        return
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = <double>((q - v[k]) * (q - v[k])) + f[v[k]]


def sq_edt(cnp.ndarray feature):
    """Squared Euclidean distance (voxel units) to the nearest True voxel.

    ``feature`` is a boolean array of up to three dimensions. Voxels in an
    array with no feature at all get ``inf``.
    """
    cdef cnp.ndarray[cnp.float64_t, ndim=3] g
    arr = np.asarray(feature, dtype=bool)
    orig_shape = arr.shape
    while arr.ndim < 3:
        arr = arr[..., np.newaxis]
    g = np.where(arr, 0.0, np.inf).astype(np.float64)
    cdef Py_ssize_t nx = g.shape[0], ny = g.shape[1], nz = g.shape[2]
    cdef Py_ssize_t nmax = max(nx, ny, nz)
    cdef double[::1] fbuf = np.empty(nmax, dtype=np.float64)
    cdef double[::1] dbuf = np.empty(nmax, dtype=np.float64)
    cdef double[::1] zbuf = np.empty(nmax + 1, dtype=np.float64)
    cdef Py_ssize_t[::1] vbuf = np.empty(nmax, dtype=np.intp)
    cdef Py_ssize_t i, j, k
    with nogil:
        if nx > 1:
            for j in range(ny):
                for k in range(nz):
                    for i in range(nx):
                        fbuf[i] = g[i, j, k]
                    _dt1d(&fbuf[0], &dbuf[0], nx, &vbuf[0], &zbuf[0])
                    for i in range(nx):
                        g[i, j, k] = dbuf[i]
        if ny > 1:
            for i in range(nx):
                for k in range(nz):
                    for j in range(ny):
                        fbuf[j] = g[i, j, k]
                    _dt1d(&fbuf[0], &dbuf[0], ny, &vbuf[0], &zbuf[0])
                    for j in range(ny):
                        g[i, j, k] = dbuf[j]
        if nz > 1:
            for i in range(nx):
                for j in range(ny):
                    for k in range(nz):
                        fbuf[k] = g[i, j, k]
                    _dt1d(&fbuf[0], &dbuf[0], nz, &vbuf[0], &zbuf[0])
                    for k in range(nz):
                        g[i, j, k] = dbuf[k]
    return g.reshape(orig_shape)


cdef Py_ssize_t _find(Py_ssize_t[::1] parent, Py_ssize_t a) noexcept nogil:
    cdef Py_ssize_t root = a, nxt
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        nxt = parent[a]
        parent[a] = root
        a = nxt
    return root


cdef void _symdiff(vector[Py_ssize_t]& a, vector[Py_ssize_t]& b, vector[Py_ssize_t]& out) noexcept nogil:
    out.clear()
    cdef size_t i = 0, j = 0, na = a.size(), nb = b.size()
    while i < na and j < nb:
        if a[i] < b[j]:
            out.push_back(a[i]); i += 1
        elif b[j] < a[i]:
            out.push_back(b[j]); j += 1
        else:
            i += 1; j += 1
    while i < na:
        out.push_back(a[i]); i += 1
    while j < nb:
        out.push_back(b[j]); j += 1


def reduce_cubical(double[::1] fval, tuple shape, Py_ssize_t[::1] order):
    """Persistence pairs of a filtered cubical complex on a doubled grid.

    Parameters
    ----------
    fval : flat cell values of the ``(2nx-1, 2ny-1, 2nz-1)`` doubled grid,
        Fortran (x-fastest) order.
    shape : doubled-grid shape.
    order : finite cell ids sorted into filtration order.

    Returns
    -------
    dims, births, deaths : arrays; essential classes carry ``inf`` deaths and
        zero-persistence pairs are dropped.
    """
    cdef Py_ssize_t NX = shape[0], NY = shape[1], NZ = shape[2]
    cdef Py_ssize_t ncell = NX * NY * NZ, nfin = order.shape[0]
    cdef Py_ssize_t[3] stride
    stride[0] = 1
    stride[1] = NX
    stride[2] = NX * NY
    cdef Py_ssize_t[::1] rank = np.full(ncell, -1, dtype=np.intp)
    cdef Py_ssize_t[::1] parent = np.arange(nfin, dtype=np.intp)
    cdef Py_ssize_t[::1] pivot_col = np.full(nfin, -1, dtype=np.intp)
    cdef cnp.uint8_t[::1] negative = np.zeros(nfin, dtype=np.uint8)
    cdef cnp.uint8_t[::1] cdim = np.zeros(nfin, dtype=np.uint8)
    cdef vector[vector[Py_ssize_t]] cols
    cdef vector[Py_ssize_t] work, tmp
    cdef vector[int] out_dim
    cdef vector[double] out_b, out_d
    cdef Py_ssize_t r, c, x, y, z, a, u, v, ru, rv, p, slot, target
    cdef int dim, coord

    with nogil:
        for r in range(nfin):
            c = order[r]
            rank[c] = r
            x = c % NX
            y = (c // NX) % NY
            z = c // (NX * NY)
            cdim[r] = (x & 1) + (y & 1) + (z & 1)

        # dim 0 by union-find with the elder rule
        for r in range(nfin):
            if cdim[r] != 1:
                continue
            c = order[r]
            x = c % NX
            y = (c // NX) % NY
            if x & 1:
                a = 0
            elif y & 1:
                a = 1
            else:
                a = 2
            ru = _find(parent, rank[c - stride[a]])
            rv = _find(parent, rank[c + stride[a]])
            if ru == rv:
                continue
            if ru > rv:
                ru, rv = rv, ru
            parent[rv] = ru
            negative[r] = 1
            if fval[order[rv]] < fval[c]:
                out_dim.push_back(0)
                out_b.push_back(fval[order[rv]])
                out_d.push_back(fval[c])
        for r in range(nfin):
            if cdim[r] == 0 and _find(parent, r) == r:
                out_dim.push_back(0)
                out_b.push_back(fval[order[r]])
                out_d.push_back(INFINITY)

        # cubes then squares, clearing pivots of the higher dimension
        for target in range(3, 1, -1):
            for r in range(nfin):
                if cdim[r] != target or negative[r]:
                    continue
                c = order[r]
                work.clear()
                coord = 0
                for a in range(3):
                    if a == 0:
                        coord = c % NX
                    elif a == 1:
                        coord = (c // NX) % NY
                    else:
                        coord = c // (NX * NY)
                    if coord & 1:
                        work.push_back(rank[c - stride[a]])
                        work.push_back(rank[c + stride[a]])
                _sort_small(work)
                while work.size() > 0:
                    p = work.back()
                    slot = pivot_col[p]
                    if slot < 0:
                        break
                    _symdiff(work, cols[slot], tmp)
                    work.swap(tmp)
                if work.size() > 0:
                    p = work.back()
                    pivot_col[p] = cols.size()
                    cols.push_back(work)
                    negative[p] = 1
                    if fval[order[p]] < fval[c]:
                        out_dim.push_back(target - 1)
                        out_b.push_back(fval[order[p]])
                        out_d.push_back(fval[c])
                elif target == 2:
                    out_dim.push_back(2)
                    out_b.push_back(fval[c])
                    out_d.push_back(INFINITY)

        # positive edges never used as a pivot
        for r in range(nfin):
            if cdim[r] == 1 and not negative[r]:
                out_dim.push_back(1)
                out_b.push_back(fval[order[r]])
                out_d.push_back(INFINITY)

    n = out_dim.size()
    dims = np.empty(n, dtype=np.int64)
    births = np.empty(n, dtype=np.float64)
    deaths = np.empty(n, dtype=np.float64)
    cdef Py_ssize_t i
    for i in range(<Py_ssize_t>n):
        dims[i] = out_dim[i]
        births[i] = out_b[i]
        deaths[i] = out_d[i]
    return dims, births, deaths


cdef void _sort_small(vector[Py_ssize_t]& w) noexcept nogil:
    cdef size_t i, j
    cdef Py_ssize_t key
    for i in range(1, w.size()):
        key = w[i]
        j = i
        while j > 0 and w[j - 1] > key:
            w[j] = w[j - 1]
            j -= 1
        w[j] = key


def cd_quadratic(double[::1] g, double[:, ::1] H, double[::1] gamma, cnp.uint8_t[::1] pen,
                 double lam, double tol=1e-12, Py_ssize_t max_sweeps=5000):
    """Cyclic coordinate descent for ``g'd + d'Hd/2 + lam * |gamma + d|_pen``.

    Returns the step ``d``.
    """
    cdef Py_ssize_t p = gamma.shape[0], j, k, sweep
    cdef double[::1] u = np.array(gamma, dtype=np.float64)
    cdef double[::1] Hd = np.zeros(p, dtype=np.float64)
    cdef double a, b, z, new, step, delta_max, mag
    with nogil:
        for sweep in range(max_sweeps):
            delta_max = 0.0
            for j in range(p):
                a = H[j, j]
                if a <= 0:
                    continue
                b = g[j] + Hd[j] - a * (u[j] - gamma[j])
                z = a * gamma[j] - b
                if pen[j]:
                    mag = (z if z > 0 else -z) - lam
                    if mag <= 0:
                        new = 0.0
                    elif z > 0:
                        new = mag / a
                    else:
                        new = -mag / a
                else:
                    new = z / a
                step = new - u[j]
                if step != 0.0:
                    for k in range(p):
                        Hd[k] += H[k, j] * step
                    u[j] = new
                    if step > delta_max:
                        delta_max = step
                    elif -step > delta_max:
                        delta_max = -step
            if delta_max < tol:
                break
    out = np.asarray(u) - np.asarray(gamma)
    return out
