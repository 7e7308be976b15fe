"""Compare the compiled and pure-Python simulation kernels.

Usage::

    python3 benchmarks/bench_kernels.py [--steps N] [--repeat R]

Both backends receive the same noise block, so the run also checks that
their statistics agree bit for bit.
"""

import argparse
import time

import numpy as np

from langevin_ldp import _pykernels
from langevin_ldp.schemes import euler_maruyama
from langevin_ldp.sets import Annulus, BallComplement, Box, encode_sets

try:
    from langevin_ldp import _kernels
except ImportError:
    _kernels = None


def _inputs(steps, seed=0):
    h, eps = 1e-3, 1.0
    A, b = euler_maruyama(3.0).coefficients(h)
    c = np.sqrt(eps * h) * np.asarray(b, dtype=float)
    coef = np.array([A[0, 0], A[0, 1], A[1, 0], A[1, 1], c[0], c[1]])
    sets = np.ascontiguousarray(
        encode_sets([BallComplement(1.0), Annulus(0.5, 1.5), Box(0.2, 1.0, -1.0, 1.0)]),
        dtype=float)
    z = np.random.default_rng(seed).standard_normal(steps)
    return coef, sets, z


def _time(run_block, coef, sets, z, repeat):
    best = np.inf
    for _ in range(repeat):
        state, stats = np.zeros(2), np.zeros(6)
        hits = np.zeros(len(sets), dtype=np.int64)
        t0 = time.perf_counter()
        run_block(coef, state, z, 0, 1000, stats, sets, hits)
        best = min(best, time.perf_counter() - t0)
    return best, stats, hits


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)

    coef, sets, z = _inputs(args.steps)
    t_py, s_py, h_py = _time(_pykernels.run_block, coef, sets, z, args.repeat)
    print(f"python  {args.steps:>10d} steps  {t_py:8.3f} s  {args.steps / t_py:12.3e} steps/s")
    if _kernels is None:
        print("cython  extension not built")
        return
    t_cy, s_cy, h_cy = _time(_kernels.run_block, coef, sets, z, args.repeat)
    print(f"cython  {args.steps:>10d} steps  {t_cy:8.3f} s  {args.steps / t_cy:12.3e} steps/s")
    same = np.array_equal(s_py, s_cy) and np.array_equal(h_py, h_cy)
    print(f"speedup {t_py / t_cy:.1f}x, identical statistics: {same}")


if __name__ == "__main__":
    main()
