"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--paths 100000]

Each kernel runs on identical inputs in both backends; outputs are compared
bitwise before timings are printed.
"""

import argparse
import sys
import timeit

import numpy as np

from rwre_duality import _fallback
from rwre_duality import rng as R

try:
    from rwre_duality import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def cases(args):
    gen = np.random.default_rng(0)
    width = args.width
    p = gen.uniform(0.05, 0.95, width)
    a, b = p * 0.5, (1 - p) * 0.5
    c = np.exp(gen.uniform(np.log(0.1), np.log(10.0), width))
    s = np.exp(gen.uniform(np.log(0.1), np.log(10.0), args.depth + 1))
    n = args.depth
    walk_p = gen.uniform(0.05, 0.95, n + 1)
    key = R.stream_key(0, R.STREAM_WALK)
    return {
        "killed_gf": lambda m: m.killed_gf(a, b, n, False),
        "killed_gf_reverse": lambda m: m.killed_gf(a, b, n, True),
        "cf_convergents": lambda m: m.cf_convergents(c, n, False),
        "evaluate_cf": lambda m: m.evaluate_cf(s),
        "simulate_paths": lambda m: m.simulate_paths(walk_p, -n, 0, 1, -n - 1, 10**6, key, 0,
                                                     args.paths),
    }


def same(x, y):
    if isinstance(x, tuple):
        return all(same(u, v) for u, v in zip(x, y))
    return np.array_equal(np.asarray(x), np.asarray(y), equal_nan=True)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--width", type=int, default=2000, help="sites per table")
    ap.add_argument("--depth", type=int, default=50)
    ap.add_argument("--paths", type=int, default=100_000)
    args = ap.parse_args(argv)
    if _ckernels is None:
        print("compiled extension not available; build with `pip install -e . --no-build-isolation`")
        return 1
    print(f"{'kernel':<20}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}  outputs")
    for name, fn in cases(args).items():
        ok = same(fn(_fallback), fn(_ckernels))
        t_py = min(timeit.repeat(lambda: fn(_fallback), number=1, repeat=args.repeat))
        t_c = min(timeit.repeat(lambda: fn(_ckernels), number=1, repeat=args.repeat))
        print(f"{name:<20}{1e3 * t_py:>14.3f}{1e3 * t_c:>14.3f}{t_py / t_c:>10.1f}  "
              f"{'identical' if ok else 'DIFFER'}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
