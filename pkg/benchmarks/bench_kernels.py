"""Compare the compiled and NumPy quadrature kernels.

Usage: python3 benchmarks/bench_kernels.py [--sizes 256,512,1024] [--repeat 5]

Prints one row per (kernel, N) with the best wall time of each backend, the
speedup and the max abs difference between the two results.
"""

import argparse
import timeit

import numpy as np

from helegraph.kernels import backend


def _inputs(n, rng):
    x = np.arange(n) * 2 * np.pi / n
    u = np.cos(x) + 0.3 * np.sin(3 * x) + 0.01 * rng.standard_normal(n)
    du = np.gradient(u, x)
    dx = x[1]
    h = np.arange(n // 2 + 1) * dx
    w = np.full(h.size, dx)
    w[:2] = 0.0
    with np.errstate(divide="ignore"):
        wk = np.where(w > 0, w / np.where(h > 0, h, 1.0) ** 2, 0.0)
    hc = np.where(h < 1.0, h, 0.0)
    f = 1.0 + 0.1 * u
    return {
        "linear_sum": (u, du, wk, 0.7 * wk, hc),
        "extremal_sum": (u, wk, 2.0, 0.5),
        "muskat_sum": (f, 0.1 * du, dx, np.zeros(n)),
    }


def run(sizes, repeat):
    py, cy = backend("python"), backend("cython")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'N':>6}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}{'max diff':>12}")
    for n in sizes:
        for name, args in _inputs(n, rng).items():
            fp, fc = getattr(py, name), getattr(cy, name)
            tp = min(timeit.repeat(lambda: fp(*args), number=1, repeat=repeat))
            tc = min(timeit.repeat(lambda: fc(*args), number=1, repeat=repeat))
            diff = float(np.max(np.abs(fp(*args) - fc(*args))))
            print(f"{name:<14}{n:>6}{1e3 * tp:>14.3f}{1e3 * tc:>14.3f}{tp / tc:>10.1f}{diff:>12.2e}")


if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", default="256,512,1024")
    ap.add_argument("--repeat", type=int, default=5)
    a = ap.parse_args()
    run([int(s) for s in a.sizes.split(",")], a.repeat)
