"""Independent reference implementations used by the tests.

Each oracle is deliberately naive (brute force, dense matrices, explicit
loops) and shares no code with the package routine it checks.
"""

import itertools
import math

import numpy as np


# -- distance transform --------------------------------------------------------

def brute_sq_edt(labels, cls):
    """Squared distance from each voxel of class ``cls`` to the nearest other-label voxel."""
    labels = np.asarray(labels)
    inside = np.argwhere(labels == cls)
    outside = np.argwhere(labels != cls)
    out = {}
    for p in inside:
        if outside.size == 0:
            out[tuple(p)] = math.inf
            continue
        d = ((outside - p) ** 2).sum(axis=1).min()
        out[tuple(p)] = int(d)
    return out


def random_label_volume(rng, shape, p=(0.3, 0.35, 0.35)):
    """Random three-class volume guaranteed to contain every class."""
    while True:
        lab = rng.choice(3, size=shape, p=p).astype(np.uint8)
        if all((lab == c).any() for c in range(3)):
            return lab


# -- cubical persistence -------------------------------------------------------

def _cells(shape):
    """Cells of the cubical complex on a voxel grid, as tuples of doubled coordinates."""
    ranges = [range(2 * n - 1) for n in shape]
    return list(itertools.product(*ranges))


def _vertices_of(cell):
    axes = [(c // 2,) if c % 2 == 0 else (c // 2, c // 2 + 1) for c in cell]
    return list(itertools.product(*axes))


def _faces(cell):
    out = []
    for a, c in enumerate(cell):
        if c % 2:
            for s in (-1, 1):
                f = list(cell)
                f[a] += s
                out.append(tuple(f))
    return out


def naive_persistence(values, rng=None):
    """Diagrams (dims 0..2) by standard reduction of the full boundary matrix.

    Cells carry the max over their vertex values; +inf cells are dropped.
    Equal values are ordered by dimension and then randomly, which leaves
    the diagram unchanged. Returns {dim: sorted list of (birth, death)}
    without zero-persistence pairs.
    """
    v = np.asarray(values, dtype=float)
    while v.ndim < 3:
        v = v[..., None]
    rng = rng or np.random.default_rng(0)
    cells = []
    for c in _cells(v.shape):
        val = max(v[p] for p in _vertices_of(c))
        if np.isfinite(val):
            cells.append((val, sum(x % 2 for x in c), c))
    keys = rng.permutation(len(cells))
    order = sorted(range(len(cells)), key=lambda i: (cells[i][0], cells[i][1], keys[i]))
    cells = [cells[i] for i in order]
    index = {c[2]: i for i, c in enumerate(cells)}
    cols = [set(index[f] for f in _faces(c[2])) for c in cells]
    low_of = {}
    paired = set()
    pairs = {0: [], 1: [], 2: []}
    for j in range(len(cols)):
        col = cols[j]
        while col:
            low = max(col)
            if low not in low_of:
                break
            col ^= cols[low_of[low]]
        if col:
            low = max(col)
            low_of[low] = j
            paired.update((low, j))
            b, d = cells[low][0], cells[j][0]
            if b < d:
                pairs[cells[low][1]].append((b, d))
    for i, c in enumerate(cells):
        if i not in paired and c[1] <= 2:
            pairs[c[1]].append((c[0], math.inf))
    return {k: sorted(p) for k, p in pairs.items()}


def sublevel_euler(values, eps):
    """Euler characteristic of the sublevel complex {cells with value <= eps}."""
    v = np.asarray(values, dtype=float)
    while v.ndim < 3:
        v = v[..., None]
    chi = 0
    for c in _cells(v.shape):
        val = max(v[p] for p in _vertices_of(c))
        if val <= eps:
            chi += (-1) ** sum(x % 2 for x in c)
    return chi


def bottleneck(a, b):
    """Bottleneck distance between two small finite diagrams by threshold search.

    Each point may be matched to a point of the other diagram (L-inf cost)
    or to the diagonal (cost half its persistence).
    """
    a, b = list(a), list(b)
    m, n = len(a), len(b)

    def cost(i, j):
        # rows: a points then n diagonal slots; cols: b points then m diagonal slots
        if i < m and j < n:
            return max(abs(a[i][0] - b[j][0]), abs(a[i][1] - b[j][1]))
        if i < m:
            return (a[i][1] - a[i][0]) / 2
        if j < n:
            return (b[j][1] - b[j][0]) / 2
        return 0.0

    size = m + n
    C = [[cost(i, j) for j in range(size)] for i in range(size)]
    cands = sorted(set(x for row in C for x in row))

    def perfect(t):
        match = [-1] * size

        def augment(i, seen):
            for j in range(size):
                if C[i][j] <= t + 1e-12 and not seen[j]:
                    seen[j] = True
                    if match[j] < 0 or augment(match[j], seen):
                        match[j] = i
                        return True
            return False

        return all(augment(i, [False] * size) for i in range(size))

    for t in cands:
        if perfect(t):
            return t
    return 0.0


# -- Cox -----------------------------------------------------------------------

def breslow_loglik(beta, X, time, event):
    """Log partial likelihood with Breslow ties, explicit double loop."""
    eta = X @ beta
    ll = 0.0
    for i in range(len(time)):
        if event[i]:
            risk = [k for k in range(len(time)) if time[k] >= time[i]]
            ll += eta[i] - math.log(sum(math.exp(eta[k]) for k in risk))
    return ll


def newton_cox(X, time, event, iters=100, tol=1e-12):
    """Unpenalized Cox MLE by Newton-Raphson with loop-built gradient and Hessian."""
    n, p = X.shape
    beta = np.zeros(p)
    for _ in range(iters):
        eta = X @ beta
        w = np.exp(eta)
        g = np.zeros(p)
        H = np.zeros((p, p))
        for i in range(n):
            if not event[i]:
                continue
            r = time >= time[i]
            s0 = w[r].sum()
            s1 = (w[r, None] * X[r]).sum(axis=0)
            s2 = (w[r, None, None] * X[r, :, None] * X[r, None, :]).sum(axis=0)
            g += X[i] - s1 / s0
            H -= s2 / s0 - np.outer(s1, s1) / s0**2
        step = np.linalg.solve(H, g)
        beta = beta - step
        if np.max(np.abs(step)) < tol:
            break
    return beta


def union_find_components(mask):
    """Number of 6-connected components of a boolean 3D mask."""
    mask = np.asarray(mask, dtype=bool)
    idx = {tuple(p): i for i, p in enumerate(np.argwhere(mask))}
    parent = list(range(len(idx)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for p, i in idx.items():
        for a in range(3):
            q = list(p)
            q[a] += 1
            j = idx.get(tuple(q))
            if j is not None:
                parent[find(i)] = find(j)
    return len({find(i) for i in range(len(idx))})
