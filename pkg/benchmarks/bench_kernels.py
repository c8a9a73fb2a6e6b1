"""Benchmark the numba kernels against the pure-numpy fallback.

Run:  python3 benchmarks/bench_kernels.py
The numba path must be available (SQLAB_BACKEND=auto or numba).
"""

import sys
import time

import numpy as np

from sqlab import kernels


def timeit(fn, *args, repeat=200):
    fn(*args)  # warm up (JIT compile on the numba path)
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(*args)
    return (time.perf_counter() - t0) / repeat


def main():
    if not kernels.HAS_NUMBA:
        sys.exit("numba is not importable; nothing to compare")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<16} {'size':<12} {'numpy':>12} {'numba':>12} {'speedup':>9}")
    for n in (10, 14):
        size = 2 ** n
        w = np.full(size, 1.0 / size)
        a = rng.uniform(-1, 1, size)
        b = rng.uniform(-1, 1, size)
        mat = rng.uniform(-1, 1, (64, size))
        rows = [
            ("weighted_dot", f"2^{n}", kernels.weighted_dot_numpy,
             kernels.weighted_dot_numba, (a, b, w)),
            ("weighted_many", f"64x2^{n}", kernels.weighted_many_numpy,
             kernels.weighted_many_numba, (mat, b, w)),
            ("gram", f"64x2^{n}", kernels.gram_numpy, kernels.gram_numba, (mat, w)),
        ]
        for name, label, ref, jit, args in rows:
            t_np = timeit(ref, *args)
            t_nb = timeit(jit, *args)
            print(f"{name:<16} {label:<12} {t_np * 1e6:>10.1f}us {t_nb * 1e6:>10.1f}us "
                  f"{t_np / t_nb:>8.2f}x")
    for v in (24, 40):
        adj = rng.random((v, v)) < 0.6
        adj = np.triu(adj, 1)
        adj = adj | adj.T
        t_py = timeit(kernels.max_clique_python, adj, repeat=20)
        t_nb = timeit(kernels.max_clique_numba, adj, repeat=20)
        assert kernels.max_clique_python(adj) == kernels.max_clique_numba(adj)
        print(f"{'max_clique':<16} {f'{v} vertices':<12} {t_py * 1e6:>10.1f}us "
              f"{t_nb * 1e6:>10.1f}us {t_py / t_nb:>8.2f}x")


if __name__ == "__main__":
    main()
