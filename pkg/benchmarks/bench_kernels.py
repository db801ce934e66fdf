"""Benchmark the compiled kernels against the NumPy fallback.

Runs both backends on identical inputs, checks they agree, and prints a
timing table. Usage: python3 benchmarks/bench_kernels.py
"""

import pathlib
import sys
import time

import numpy as np

sys.path.insert(0, str(pathlib.Path(__file__).resolve().parents[1] / "src"))

from kcgen._kernels import _py  # noqa: E402

try:
    from kcgen._kernels import _ckern
except ImportError:
    _ckern = None


def timeit(fn, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def bench_assign_nearest(rng):
    points = rng.normal(size=(20000, 16))
    centroids = rng.normal(size=(50, 16))
    rows = []
    t_py, (lab_py, d_py) = timeit(lambda: _py.assign_nearest(points, centroids))
    rows.append(("python", t_py))
    if _ckern is not None:
        t_c, (lab_c, d_c) = timeit(lambda: _ckern.assign_nearest(points, centroids))
        assert np.array_equal(lab_py, lab_c), "backend label mismatch"
        assert np.allclose(d_py, d_c), "backend distance mismatch"
        rows.append(("compiled", t_c))
    return "assign_nearest (20000x16, k=50)", rows


def bench_signrank(rng):
    ranks = np.arange(1, 19, dtype=np.float64)
    rng.shuffle(ranks)
    w_obs = float(ranks.sum()) * 0.25
    rows = []
    t_py, count_py = timeit(lambda: _py.signrank_count_leq(ranks, w_obs), repeats=3)
    rows.append(("python", t_py))
    if _ckern is not None:
        t_c, count_c = timeit(lambda: _ckern.signrank_count_leq(ranks, w_obs), repeats=3)
        assert count_py == count_c, "backend count mismatch"
        rows.append(("compiled", t_c))
    return "signrank_count_leq (n=18, 2^18 assignments)", rows


def main():
    if _ckern is None:
        print("compiled backend unavailable; benchmarking the fallback only\n")
    rng = np.random.default_rng(0)
    for title, rows in (bench_assign_nearest(rng), bench_signrank(rng)):
        print(title)
        base = rows[0][1]
        for name, t in rows:
            speedup = f"  ({base / t:.1f}x vs python)" if name != "python" else ""
            print(f"  {name:<9} {t * 1e3:9.2f} ms{speedup}")
        print()


if __name__ == "__main__":
    main()
