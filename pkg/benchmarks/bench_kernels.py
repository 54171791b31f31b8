"""Benchmark the numba backward-induction kernel against the numpy fallback.

Runs the bi_sweep continuation-value kernel at several grid/noise sizes,
checks that both backends agree, and prints the per-call timings and
speedup. Usage:

    python3 benchmarks/bench_kernels.py [--repeats N]
"""

import argparse
import time

import numpy as np

from mfgil.kernels import bi_sweep_numba, bi_sweep_numpy

SIZES = [(50, 100), (200, 500), (500, 1000), (1000, 5000)]


def _time(fn, args, repeats):
    best = np.inf
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeats", type=int, default=5,
                        help="timing repeats per case (best is reported)")
    args = parser.parse_args()

    if bi_sweep_numba is None:
        raise SystemExit("numba is not installed; nothing to compare")

    rng = np.random.default_rng(0)
    eta = 0.3
    print(f"{'grid':>6} {'noise':>6} {'numpy (ms)':>12} {'numba (ms)':>12} "
          f"{'speedup':>8}")
    for g, m in SIZES:
        grid = np.linspace(0.0, 1.0, g)
        pi_pop1 = rng.random((g, 2))
        e0 = rng.beta(2.0, 2.0, size=m)
        v_next = rng.normal(size=(2, g))
        case = (grid, pi_pop1, e0, eta, v_next)

        ref = bi_sweep_numpy(*case)
        bi_sweep_numba(*case)  # warm up the jit before timing
        out = bi_sweep_numba(*case)
        if not np.allclose(out, ref, atol=1e-10):
            raise SystemExit(f"backend mismatch at grid={g}, noise={m}")

        t_np = _time(bi_sweep_numpy, case, args.repeats)
        t_nb = _time(bi_sweep_numba, case, args.repeats)
        print(f"{g:>6} {m:>6} {t_np * 1e3:>12.3f} {t_nb * 1e3:>12.3f} "
              f"{t_np / t_nb:>7.1f}x")


if __name__ == "__main__":
    main()
