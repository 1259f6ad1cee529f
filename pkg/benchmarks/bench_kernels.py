"""Numba vs numpy timings for the collocation kernel and a full solve.

    python benchmarks/bench_kernels.py [--repeat 20]

The solve timing toggles ``_kernels.USE_JIT`` in-process, so both paths
share one Newton implementation.
"""
import argparse
import time

import numpy as np

from rabi_het import _kernels
from rabi_het.bvp import SolveOptions, initial_guess, solve
from rabi_het.params import make_params


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=20)
    args = ap.parse_args()
    if _kernels.numba is None:
        print("numba not installed; only the numpy path is available")
        return

    p = make_params(100.0, 0.25)
    print(f"{'n':>6} {'kernel numpy':>14} {'kernel numba':>14} {'speedup':>8}")
    for n in (513, 2049, 8193):
        g = initial_guess(p, None, SolveOptions(n=n))
        Y, h = g.states, np.diff(g.mesh)
        _kernels.collocation(Y, h, p.lam, p.omega, jit=True)  # compile
        t_np = best_of(lambda: _kernels.collocation(Y, h, p.lam, p.omega, jit=False), args.repeat)
        t_jit = best_of(lambda: _kernels.collocation(Y, h, p.lam, p.omega, jit=True), args.repeat)
        print(f"{n:>6} {t_np * 1e3:>11.3f} ms {t_jit * 1e3:>11.3f} ms {t_np / t_jit:>7.1f}x")

    print(f"\n{'n':>6} {'solve numpy':>14} {'solve numba':>14} {'speedup':>8}")
    saved = _kernels.USE_JIT
    try:
        for n in (513, 2049, 8193):
            opts = SolveOptions(n=n, check_conditioning=False)
            g = initial_guess(p, None, opts)
            res = {}
            for flag in (False, True):
                _kernels.USE_JIT = flag
                res[flag] = best_of(lambda: solve(p, g, opts), max(3, args.repeat // 5))
            print(f"{n:>6} {res[False] * 1e3:>11.1f} ms {res[True] * 1e3:>11.1f} ms "
                  f"{res[False] / res[True]:>7.2f}x")
    finally:
        _kernels.USE_JIT = saved


if __name__ == "__main__":
    main()
