"""Benchmark the numba kernels against the pure-numpy fallback.

Times the geodesic and projected-Euler evolution kernels on identical
pre-drawn increments across a range of matrix sizes, then reports the
per-path-step cost and the speedup.  Run directly:

    python benchmarks/bench_backends.py [--quick]
"""

import argparse
import time

import numpy as np

from ubmlab import kernels

CASES = [
    # (n, steps, batch)
    (8, 200, 64),
    (16, 100, 64),
    (32, 100, 32),
    (64, 100, 8),
    (128, 50, 2),
]


def _run(backend, normals, scales, reps):
    kernels.set_backend(backend)
    n = normals.shape[-1]
    best = np.inf
    for _ in range(reps):
        u = np.broadcast_to(np.eye(n, dtype=np.complex128),
                            (normals.shape[0], n, n)).copy()
        tic = time.perf_counter()
        kernels.evolve_geodesic(u, normals, scales)
        best = min(best, time.perf_counter() - tic)
    return best, u


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--quick", action="store_true", help="fewer repetitions")
    args = parser.parse_args()
    reps = 2 if args.quick else 4

    rng = np.random.default_rng(0)
    header = f"{'n':>5} {'steps':>6} {'batch':>6} {'numpy':>12} {'numba':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for n, steps, batch in CASES:
        normals = rng.standard_normal((batch, steps, 2, n, n))
        scales = np.sqrt(np.full(steps, 0.01 / n))
        t_np, u_np = _run("numpy", normals, scales, reps)
        if kernels._HAVE_NUMBA:
            _run("numba", normals[:1], scales, 1)  # compile warmup
            t_nb, u_nb = _run("numba", normals, scales, reps)
            agree = np.max(np.abs(u_np - u_nb))
            per_step = t_nb / (batch * steps) * 1e6
            print(f"{n:>5} {steps:>6} {batch:>6} {t_np:>10.3f}s {t_nb:>10.3f}s "
                  f"{t_np / t_nb:>8.2f}x   ({per_step:.1f} us/step, "
                  f"backend gap {agree:.1e})")
        else:
            print(f"{n:>5} {steps:>6} {batch:>6} {t_np:>10.3f}s {'-':>12} {'-':>9}")
    kernels.set_backend("numba" if kernels._HAVE_NUMBA else "numpy")


if __name__ == "__main__":
    main()
