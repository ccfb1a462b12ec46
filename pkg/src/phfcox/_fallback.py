"""Pure-Python versions of the compiled kernels in ``_kernels.pyx``.

Same inputs, same outputs, same algorithms; used when the extension is not
built or when ``PHFCOX_PURE_PYTHON=1`` is set.
"""

import math

import numpy as np


def _dt1d(f):
    n = len(f)
    v = [0] * n
    z = [0.0] * (n + 1)
    k = -1
    for q in range(n):
        fq = f[q]
        if fq == math.inf:
            continue
        if k < 0:
            k = 0
            v[0] = q
            z[0] = -math.inf
            z[1] = math.inf
            continue
        while True:
            vk = v[k]
            s = ((fq + q * q) - (f[vk] + vk * vk)) / (2.0 * (q - vk))
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = math.inf
    if k < 0:
        return [math.inf] * n
    out = [0.0] * n
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        out[q] = (q - v[k]) ** 2 + f[v[k]]
    return out


def sq_edt(feature):
    arr = np.asarray(feature, dtype=bool)
    orig_shape = arr.shape
    while arr.ndim < 3:
        arr = arr[..., np.newaxis]
    g = np.where(arr, 0.0, np.inf)
    for axis in range(3):
        if g.shape[axis] < 2:
            continue
        moved = np.moveaxis(g, axis, -1)
        flat = moved.reshape(-1, moved.shape[-1])
        for row in range(flat.shape[0]):
            flat[row] = _dt1d(flat[row].tolist())
        g = np.moveaxis(flat.reshape(moved.shape), -1, axis)
    return np.ascontiguousarray(g).reshape(orig_shape)


def _find(parent, a):
    root = a
    while parent[root] != root:
        root = parent[root]
    while parent[a] != root:
        parent[a], a = root, parent[a]
    return root


def reduce_cubical(fval, shape, order):
    NX, NY, NZ = shape
    strides = (1, NX, NX * NY)
    order = [int(c) for c in order]
    nfin = len(order)
    rank = {c: r for r, c in enumerate(order)}
    coords = [(c % NX, (c // NX) % NY, c // (NX * NY)) for c in order]
    cdim = [(x & 1) + (y & 1) + (z & 1) for x, y, z in coords]
    fv = [float(fval[c]) for c in order]

    out = []
    negative = [False] * nfin
    parent = list(range(nfin))
    for r in range(nfin):
        if cdim[r] != 1:
            continue
        c = order[r]
        a = next(i for i in range(3) if coords[r][i] & 1)
        ru = _find(parent, rank[c - strides[a]])
        rv = _find(parent, rank[c + strides[a]])
        if ru == rv:
            continue
        if ru > rv:
            ru, rv = rv, ru
        parent[rv] = ru
        negative[r] = True
        if fv[rv] < fv[r]:
            out.append((0, fv[rv], fv[r]))
    for r in range(nfin):
        if cdim[r] == 0 and _find(parent, r) == r:
            out.append((0, fv[r], math.inf))

    pivot_col = {}
    for target in (3, 2):
        for r in range(nfin):
            if cdim[r] != target or negative[r]:
                continue
            c = order[r]
            col = set()
            for a in range(3):
                if coords[r][a] & 1:
                    col.add(rank[c - strides[a]])
                    col.add(rank[c + strides[a]])
            while col:
                p = max(col)
                other = pivot_col.get(p)
                if other is None:
                    break
                col ^= other
            if col:
                p = max(col)
                pivot_col[p] = col
                negative[p] = True
                if fv[p] < fv[r]:
                    out.append((target - 1, fv[p], fv[r]))
            elif target == 2:
                out.append((2, fv[r], math.inf))

    for r in range(nfin):
        if cdim[r] == 1 and not negative[r]:
            out.append((1, fv[r], math.inf))

    dims = np.array([o[0] for o in out], dtype=np.int64)
    births = np.array([o[1] for o in out], dtype=np.float64)
    deaths = np.array([o[2] for o in out], dtype=np.float64)
    return dims, births, deaths


def cd_quadratic(g, H, gamma, pen, lam, tol=1e-12, max_sweeps=5000):
    p = len(gamma)
    u = [float(x) for x in gamma]
    gam = list(u)
    Hl = [list(map(float, row)) for row in np.asarray(H)]
    gl = [float(x) for x in g]
    pen = [bool(x) for x in pen]
    Hd = [0.0] * p
    for _ in range(max_sweeps):
        delta_max = 0.0
        for j in range(p):
            a = Hl[j][j]
            if a <= 0:
                continue
            b = gl[j] + Hd[j] - a * (u[j] - gam[j])
            z = a * gam[j] - b
            if pen[j]:
                mag = abs(z) - lam
                new = 0.0 if mag <= 0 else math.copysign(mag, z) / a
            else:
                new = z / a
            step = new - u[j]
            if step != 0.0:
                for k in range(p):
                    Hd[k] += Hl[k][j] * step
                u[j] = new
                delta_max = max(delta_max, abs(step))
        if delta_max < tol:
            break
    return np.array(u) - np.asarray(gamma, dtype=np.float64)
