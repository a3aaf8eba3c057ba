"""Time the numba and numpy paths of both batch kernels.

Run with ``python benchmarks/bench_kernels.py [--points K] [--repeat R]``.
"""

import argparse
import time

import numpy as np

from su2fisher import _kernels
from su2fisher.su2 import haar_random_batch, matrix_to_euler_batch


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--points", type=int, default=1_000_000)
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    psi = matrix_to_euler_batch(haar_random_batch(rng, args.points))
    amps = rng.standard_normal((args.points, 4)) + 1j * rng.standard_normal((args.points, 4))
    amps /= np.linalg.norm(amps, axis=1, keepdims=True)

    cases = {
        "wtilde_trace_batch": (_kernels.wtilde_trace_batch, psi),
        "optimality_residuals_batch": (_kernels.optimality_residuals_batch, amps),
    }
    print(f"numba available: {_kernels.HAVE_NUMBA}; {args.points} rows, best of {args.repeat}")
    for name, (fn, data) in cases.items():
        t_np = best_of(lambda: fn(data, use_numba=False), args.repeat)
        row = f"{name:28s} numpy {t_np * 1e3:9.1f} ms"
        if _kernels.HAVE_NUMBA:
            fn(data[:10], use_numba=True)  # compile outside the timed region
            t_nb = best_of(lambda: fn(data, use_numba=True), args.repeat)
            a, b = fn(data, use_numba=False), fn(data, use_numba=True)
            ok = np.isfinite(a) == np.isfinite(b)
            rel = np.abs(a - b) / np.maximum(1.0, np.abs(a))
            # large values come from nearly singular W~, where rounding is amplified
            tame = np.abs(a) < 100
            row += f"  numba {t_nb * 1e3:9.1f} ms  speedup {t_np / t_nb:5.2f}x"
            row += f"  max rel diff {np.nanmax(rel):.1e} (values < 100: {np.nanmax(rel[tame]):.1e})"
            row += "" if ok.all() else "  (NaN pattern differs)"
        print(row)


if __name__ == "__main__":
    main()
