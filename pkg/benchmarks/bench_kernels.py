"""Time the compiled kernels against the numpy fallback.

Usage::

    python3 benchmarks/bench_kernels.py [--repeat 5] [--sizes 100 300]
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from prodwave import _kernels_py as fallback

try:
    from prodwave import _kernels as compiled
except ImportError:
    compiled = None


def _cases(sizes, rng):
    for n in sizes:
        x = rng.standard_normal((50, 20 * n))
        yield f"ar1_filter 50x{20 * n}", lambda mod, x=x: mod.ar1_filter(x, 0.7)
        m = rng.standard_normal((n, n))
        sym = m + m.T
        yield f"tridiagonalize+ql n={n}", lambda mod, s=sym: mod.tridiagonal_ql(*mod.tridiagonalize(s)[:2])
        if n <= 150:
            yield f"jacobi_eigh n={n}", lambda mod, s=sym: mod.jacobi_eigh(s)


def best_time(fn, repeat):
    """Fastest of ``repeat`` single calls, in seconds."""
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[60, 120, 240])
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(args.seed)
    if compiled is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'kernel':<28}{'python s':>12}{'compiled s':>12}{'speedup':>10}")
    for name, call in _cases(args.sizes, rng):
        t_py = best_time(lambda: call(fallback), args.repeat)
        if compiled is None:
            print(f"{name:<28}{t_py:>12.4g}{'-':>12}{'-':>10}")
            continue
        t_c = best_time(lambda: call(compiled), args.repeat)
        print(f"{name:<28}{t_py:>12.4g}{t_c:>12.4g}{t_py / t_c:>10.1f}")


if __name__ == "__main__":
    main()
