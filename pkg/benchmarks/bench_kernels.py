"""Compiled vs pure-Python kernels: wall time and bit-for-bit agreement.

    python benchmarks/bench_kernels.py [--N 2000] [--M 2048] [--repeat 3]
"""
import argparse
import statistics
import time

import numpy as np

from siegellab import _pykernels
from siegellab.curves import dumbbell
from siegellab.curvegeom import pair_separations
from siegellab.linearization import inverse_divisors
from siegellab.rotation import RotationNumber

try:
    from siegellab import _kernels
except ImportError:
    _kernels = None


def best_time(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), statistics.median(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=2000)
    ap.add_argument("--M", type=int, default=2048)
    ap.add_argument("--precision", type=int, default=256)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if _kernels is None:
        print("compiled kernels not built; only the pure backend is available")

    theta = RotationNumber.golden(args.precision)
    inv_re, inv_im, _, _ = inverse_divisors(theta, args.N, args.precision)
    curve = dumbbell(0.01, args.M)
    x, y = curve.points.real.copy(), curve.points.imag.copy()
    seps, _ = pair_separations(args.M)

    cases = [
        (f"series_recurrence N={args.N} @{args.precision} bits",
         lambda k: k.series_recurrence(inv_re, inv_im, args.N, args.precision)),
        (f"pinch_scan M={args.M} (all pairs)",
         lambda k: k.pinch_scan(x, y, seps)),
    ]
    print(f"{'kernel':42s} {'pure (s)':>10s} {'compiled (s)':>13s} {'speedup':>8s}  identical")
    for name, run in cases:
        tp, _, ref = best_time(lambda: run(_pykernels), args.repeat)
        if _kernels is None:
            print(f"{name:42s} {tp:10.4f} {'-':>13s} {'-':>8s}  -")
            continue
        tc, _, got = best_time(lambda: run(_kernels), args.repeat)
        same = all(np.array_equal(np.asarray(a), np.asarray(b)) for a, b in zip(ref, got))
        print(f"{name:42s} {tp:10.4f} {tc:13.4f} {tp / tc:8.1f}x  {same}")


if __name__ == "__main__":
    main()
