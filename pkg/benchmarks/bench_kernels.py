"""Time the compiled kernels against the pure-Python fallback.

Usage: python benchmarks/bench_kernels.py [--size 24] [--repeat 3]
"""

import argparse
import time

import numpy as np

from phfcox import _fallback
from phfcox.cubical import build_filtration
from phfcox.imaging import LabelVolume, sedt3

try:
    from phfcox import _kernels
except ImportError:  # extension not built
    _kernels = None


def _volume(size, rng):
    g = np.indices((size,) * 3).transpose(1, 2, 3, 0) - (size - 1) / 2
    r = np.linalg.norm(g, axis=-1)
    labels = np.zeros((size,) * 3, dtype=np.uint8)
    labels[r < 0.45 * size] = 1
    labels[r < 0.25 * size] = 2
    labels[(rng.uniform(size=labels.shape) < 0.03) & (labels > 0)] = 0
    return LabelVolume(labels)


def _best(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=24, help="edge length of the test volume")
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    vol = _volume(args.size, rng)
    feature = vol.labels == 0
    cx = build_filtration(sedt3(vol))
    order = cx.filtration_order()
    fval = np.ascontiguousarray(cx.values.ravel(order="F"))
    p = 50
    A = rng.normal(size=(200, p))
    H = np.ascontiguousarray(A.T @ A / 200)
    g = rng.normal(size=p) * 0.1
    gamma = np.zeros(p)
    pen = np.ones(p, dtype=np.uint8)

    cases = {
        f"sq_edt {args.size}^3": lambda m: m.sq_edt(feature),
        f"reduce_cubical ({order.size} cells)": lambda m: m.reduce_cubical(fval, cx.shape, order),
        f"cd_quadratic p={p}": lambda m: m.cd_quadratic(g, H, gamma, pen, 0.01),
    }
    print(f"{'kernel':<34}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}  agree")
    for name, call in cases.items():
        t_py, out_py = _best(lambda: call(_fallback), args.repeat)
        if _kernels is None:
            print(f"{name:<34}{t_py:>12.4f}{'n/a':>12}{'':>10}")
            continue
        t_cy, out_cy = _best(lambda: call(_kernels), args.repeat)
        a = out_py if isinstance(out_py, tuple) else (out_py,)
        b = out_cy if isinstance(out_cy, tuple) else (out_cy,)
        agree = all(np.allclose(np.sort(x), np.sort(y), atol=1e-9) for x, y in zip(a, b))
        print(f"{name:<34}{t_py:>12.4f}{t_cy:>12.4f}{t_py / t_cy:>10.1f}  {agree}")


if __name__ == "__main__":
    main()
