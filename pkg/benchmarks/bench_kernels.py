"""Time each hot kernel on the numba path and the numpy path.

    python benchmarks/bench_kernels.py [--repeat 3]

Each kernel is warmed up once (numba compiles on first call), then timed as
the best of ``--repeat`` runs. Outputs agree between paths or the script exits 1.
"""

from __future__ import annotations

import argparse
import sys
import time

import numpy as np

from probrep import _kernels
from probrep.operators import haar_state


def cases():
    pts = haar_state(4, 1, count=2000)
    probes = haar_state(4, 2, count=50_000)
    cands = haar_state(3, 3, count=20_000)
    yield "airplane_numerators(4096, 16384)", lambda k: k.airplane_numerators(4096, 4 * 4096)
    yield "max_overlaps(2000 x 50000, dim 4)", lambda k: k.max_overlaps(pts, probes)[0]
    yield "covered(2000 x 50000, dim 4)", lambda k: k.covered(pts, probes, 0.97)

    def greedy(k):
        buf = np.zeros((20_000, 3), complex)
        count, _ = k.greedy_extend(buf, 0, cands, 0.97, 0, 10**9)
        return buf[:count]

    yield "greedy_extend(20000 candidates, dim 3)", greedy


def best_of(fn, kern, repeat):
    fn(kern)
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        out = fn(kern)
        times.append(time.perf_counter() - start)
    return min(times), out


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if _kernels.NUMBA is None:
        print("numba is not installed; only the numpy path can be timed", file=sys.stderr)
    print(f"{'kernel':<42} {'numpy s':>9} {'numba s':>9} {'speedup':>8}")
    mismatch = False
    for name, fn in cases():
        t_np, out_np = best_of(fn, _kernels.NUMPY, args.repeat)
        if _kernels.NUMBA is None:
            print(f"{name:<42} {t_np:>9.3f} {'-':>9} {'-':>8}")
            continue
        t_nb, out_nb = best_of(fn, _kernels.NUMBA, args.repeat)
        if out_np.shape != out_nb.shape or not np.allclose(out_np, out_nb, atol=1e-12):
            mismatch = True
            print(f"{name}: outputs differ between paths", file=sys.stderr)
        print(f"{name:<42} {t_np:>9.3f} {t_nb:>9.3f} {t_np / t_nb:>7.1f}x")
    return 1 if mismatch else 0


if __name__ == "__main__":
    sys.exit(main())
