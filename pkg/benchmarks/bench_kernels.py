"""Compiled vs numpy kernels on the workloads the package actually runs.

    python benchmarks/bench_kernels.py [--repeat 5]

Both backends are imported directly, so the comparison does not depend on
``TRANSLAB_PURE_PYTHON``.  Results are checked for equality before timing.
"""
from __future__ import annotations

import argparse
import math
import sys
import timeit

import numpy as np

from translab.kernels import _fallback

try:
    from translab.kernels import _core
except ImportError:  # extension not built
    _core = None


def workloads():
    rng = np.random.default_rng(0)
    flags = (rng.random(200_000) < 0.7).astype(np.uint8)
    logs = rng.normal(0.2, 1.0, 100_000)
    minimal = np.array([((1 << 5) - 1) << s for s in range(0, 12)], dtype=np.uint64)
    return [
        ("longest_run (200k flags)", "longest_run", (flags,)),
        ("first_run L=12 (200k flags)", "first_run", (flags, 12)),
        ("subset_longest_runs H=16", "subset_longest_runs", (16,)),
        ("window_cover_table H=16 w=4", "window_cover_table", (16, 4)),
        ("upward_closure_table H=16, 12 gens", "upward_closure_table", (minimal, 16)),
        ("sliding_max_sum 100k, L=64", "sliding_max_sum", (logs, 64)),
    ]


def _same(a, b) -> bool:
    if isinstance(a, np.ndarray):
        return np.array_equal(np.asarray(a), np.asarray(b))
    if isinstance(a, tuple):
        return all(_same(x, y) for x, y in zip(a, b))
    if isinstance(a, float):
        return math.isclose(a, b, rel_tol=1e-9, abs_tol=1e-9)
    return a == b


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _core is None:
        print("compiled kernel not built; only the fallback is available", file=sys.stderr)
        return 1
    print(f"{'workload':<38} {'cython [ms]':>12} {'numpy [ms]':>12} {'speedup':>8}")
    for label, name, fargs in workloads():
        fast, slow = getattr(_core, name), getattr(_fallback, name)
        if not _same(fast(*fargs), slow(*fargs)):
            print(f"{label}: backends disagree", file=sys.stderr)
            return 1
        t_fast = min(timeit.repeat(lambda: fast(*fargs), number=1, repeat=args.repeat)) * 1e3
        t_slow = min(timeit.repeat(lambda: slow(*fargs), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:<38} {t_fast:>12.3f} {t_slow:>12.3f} {t_slow / t_fast:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
