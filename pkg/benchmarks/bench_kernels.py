"""Time the compiled kernels against their pure-Python fallbacks.

Both backends are called with identical inputs and their outputs compared
before timing. Run from the repository root::

    python3 benchmarks/bench_kernels.py --repeat 3
"""

import argparse
import time

import numpy as np

from rdil import kernels


def _mlp_case(rng, n=200, n_in=8, n_hidden=6, n_out=3):
    X = rng.random((n, n_in))
    T = np.eye(n_out)[rng.integers(0, n_out, n)]
    w = rng.random(n)
    order = rng.permutation(n).astype(np.int64)
    params = [rng.uniform(-0.5, 0.5, s) for s in ((n_hidden, n_in), n_hidden, (n_out, n_hidden), n_out)]
    return X, T, w, order, params


def bench_mlp_epoch(mod, case):
    X, T, w, order, params = case
    W1, b1, W2, b2 = (p.copy() for p in params)
    V = [np.zeros_like(p) for p in (W1, b1, W2, b2)]
    mod.mlp_epoch(X, T, w, True, order, W1, b1, W2, b2, V[0], V[1], V[2], V[3], 0.3, 0.2)
    return W1


def bench_split(mod, case):
    v, y, w = case
    return mod.best_numeric_split(v, y, w, 3, 2.0)


def bench_heom(mod, case):
    Q, R, nominal, ranges = case
    return mod.heom_distances(Q, R, nominal, ranges)


def timeit(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not kernels.compiled_available():
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")
    py, cy = kernels.backend_module("python"), kernels.backend_module("cython")
    rng = np.random.default_rng(args.seed)

    mlp = _mlp_case(rng)
    v = np.sort(rng.random(2000))
    split = (v, rng.integers(0, 3, v.size).astype(np.int64), rng.random(v.size))
    Q, R = rng.random((300, 6)), rng.random((500, 6))
    Q[:, 4:] = rng.integers(0, 3, (300, 2))
    R[:, 4:] = rng.integers(0, 3, (500, 2))
    heom = (Q, R, np.array([False] * 4 + [True] * 2), np.ones(6))

    cases = [("mlp_epoch (200 x 8-6-3)", bench_mlp_epoch, mlp),
             ("best_numeric_split (n=2000)", bench_split, split),
             ("heom_distances (300 x 500)", bench_heom, heom)]
    print(f"{'kernel':32s} {'python [s]':>12s} {'cython [s]':>12s} {'speedup':>9s}")
    for name, fn, case in cases:
        a, b = fn(py, case), fn(cy, case)
        if not np.allclose(np.asarray(a, dtype=float), np.asarray(b, dtype=float), rtol=1e-9, atol=1e-12):
            raise SystemExit(f"{name}: backends disagree")
        tp = timeit(lambda: fn(py, case), args.repeat)
        tc = timeit(lambda: fn(cy, case), args.repeat)
        print(f"{name:32s} {tp:12.5f} {tc:12.5f} {tp / tc:8.1f}x")


if __name__ == "__main__":
    main()
