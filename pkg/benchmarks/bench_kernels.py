"""Compare the compiled and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--points N ...] [--repeat R]

Both backends must return bit-identical results; the script checks that
before timing.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from momentinv import _kernels_py

try:
    from momentinv import _kernels as compiled
except ImportError:
    compiled = None


def best_of(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--points", type=int, nargs="+", default=[50, 1_000, 10_000, 100_000])
    parser.add_argument("--max-order", type=int, default=3)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    if compiled is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'size':>10}{'python [s]':>14}{'compiled [s]':>14}{'speedup':>10}")
    for n in args.points:
        pts = rng.uniform(-10, 10, (n, 3))
        w = rng.uniform(0.5, 1.5, n)
        a = _kernels_py.power_sums(pts, w, args.max_order)
        b = compiled.power_sums(pts, w, args.max_order)
        assert all(x.tobytes() == y.tobytes() for x, y in zip(a, b)), "backends disagree"
        tp = best_of(lambda: _kernels_py.power_sums(pts, w, args.max_order), args.repeat)
        tc = best_of(lambda: compiled.power_sums(pts, w, args.max_order), args.repeat)
        print(f"{'power_sums':<14}{n:>10}{tp:>14.5f}{tc:>14.5f}{tp / tc:>9.1f}x")

    # a degree-4 invariant-sized polynomial over a batch of moment tensors
    n_terms, n_vars = 60, 16
    re, im = rng.normal(size=n_terms), np.zeros(n_terms)
    exps = rng.integers(0, 2, (n_terms, n_vars))
    for batch in (100, 10_000):
        vals = rng.normal(size=(batch, n_vars))
        assert _kernels_py.eval_monomials(re, im, exps, vals).tobytes() == compiled.eval_monomials(re, im, exps, vals).tobytes()
        tp = best_of(lambda: _kernels_py.eval_monomials(re, im, exps, vals), args.repeat)
        tc = best_of(lambda: compiled.eval_monomials(re, im, exps, vals), args.repeat)
        print(f"{'eval_monomials':<14}{batch:>10}{tp:>14.5f}{tc:>14.5f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
