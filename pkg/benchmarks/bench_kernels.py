"""Compare the numba and numpy kernels on the triangle quartic grid workload.

    python3 benchmarks/bench_kernels.py [--m 1000] [--repeat 3]

Both implementations must return identical int64 arrays; the script checks
that before printing timings.  The first numba call includes JIT compile
time (or a cache load) and is reported separately.
"""

import argparse
import time

import numpy as np

from polybound import _kernels
from polybound.gridsum import _integer_form
from polybound.polytope import HRep, scaled_lattice
from polybound.ratpoly import Polynomial


def quartic_instance():
    x, y = Polynomial.variable(2, 0), Polynomial.variable(2, 1)
    f = -5 * (x * x - 2) ** 2 - 7 * (y * y - 2) ** 2 + 20
    P = HRep([[-1, 0], [0, -1], [1, 1]], [-1, -1, 3])
    return P, f


def best_of(fn, repeat):
    times = []
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--m", type=int, default=1000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    P, f = quartic_instance()
    exps, coefs, mpow, _ = _integer_form(f, args.m)
    exps = np.array(exps, dtype=np.int64)
    impls = ["numpy"] + (["numba"] if _kernels.HAVE_NUMBA else [])

    if "numba" in impls:
        t0 = time.perf_counter()
        pts = scaled_lattice(P, args.m, "numba")
        _kernels.eval_grid(pts[:1], exps, coefs, mpow, "numba")
        print(f"numba first call (compile/cache): {time.perf_counter() - t0:.3f}s")

    results = {}
    print(f"m={args.m}")
    print(f"{'kernel':<8} {'impl':<6} {'seconds':>9} {'points':>9}")
    for impl in impls:
        t_scan, pts = best_of(lambda: scaled_lattice(P, args.m, impl), args.repeat)
        t_eval, vals = best_of(lambda: _kernels.eval_grid(pts, exps, coefs, mpow, impl), args.repeat)
        results[impl] = (pts, vals)
        print(f"{'scan':<8} {impl:<6} {t_scan:9.4f} {len(pts):9d}")
        print(f"{'eval':<8} {impl:<6} {t_eval:9.4f} {len(vals):9d}")

    if len(results) == 2:
        (p1, v1), (p2, v2) = results["numpy"], results["numba"]
        assert np.array_equal(p1, p2) and np.array_equal(v1, v2), "implementations disagree"
        print("numpy and numba outputs identical")


if __name__ == "__main__":
    main()
