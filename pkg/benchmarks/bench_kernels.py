"""Benchmark the numba kernels against the pure-numpy fallbacks.

Run from the repository root:

    python3 benchmarks/bench_kernels.py

Covers the three hot paths: empirical-characteristic-function evaluation,
the batched bootstrap ECF, and the dense simplex pivot loop (timed through
a full min-max LP solve on a 2000-point sphere grid).  Unset
JOINTLAB_NO_NUMBA to have both backends available.
"""

import time

import numpy as np

from jointlab import accel
from jointlab.separability import fibonacci_grid, _point_statistics


def timeit(fn, *args, repeats=5):
    best = np.inf
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def check_close(results):
    names = list(results)
    for other in names[1:]:
        np.testing.assert_allclose(
            results[names[0]], results[other], atol=1e-10,
            err_msg=f"{names[0]} vs {other} disagree",
        )


def minmax_solve_with(simplex, a, b):
    # phase-2-only construction is involved; route through lp.solve_minmax
    # with the chosen kernel temporarily installed
    saved = accel.simplex_iterate
    accel.simplex_iterate = simplex
    try:
        from jointlab.lp import solve_minmax

        residual, weights, iters = solve_minmax(a, b)
        return residual
    finally:
        accel.simplex_iterate = saved


def main():
    impls = accel.implementations()
    print(f"active backend: {accel.BACKEND}; available: {', '.join(impls)}")
    rng = np.random.default_rng(0)

    n = 100_000
    x = rng.standard_normal(n) * 0.5
    y = rng.standard_normal(n) * 0.5
    axis = np.linspace(-2.0, 2.0, 9)

    print(f"\nECF on 9x9 grid, {n} samples")
    if "numba" in impls:
        impls["numba"]["ecf_grid"](x[:10], y[:10], axis, axis)  # compile
    results, times = {}, {}
    for name, fns in impls.items():
        times[name], results[name] = timeit(fns["ecf_grid"], x, y, axis, axis)
        print(f"  {name:>6}: {times[name] * 1e3:8.2f} ms")
    check_close(results)
    if len(times) == 2:
        print(f"  speedup numba vs numpy: {times['numpy'] / times['numba']:.2f}x")

    n_boot = 50
    weights = np.stack(
        [np.bincount(rng.integers(0, n, n), minlength=n) for _ in range(n_boot)]
    ).astype(float)
    print(f"\nbootstrap ECF, {n_boot} resamples x {n} samples")
    if "numba" in impls:
        impls["numba"]["ecf_grid_weighted"](x[:10], y[:10], axis, axis, weights[:1, :10])
    results, times = {}, {}
    for name, fns in impls.items():
        times[name], results[name] = timeit(
            fns["ecf_grid_weighted"], x, y, axis, axis, weights, repeats=2
        )
        print(f"  {name:>6}: {times[name] * 1e3:8.1f} ms")
    check_close(results)
    if len(times) == 2:
        print(f"  speedup numba vs numpy: {times['numpy'] / times['numba']:.2f}x")

    grid = fibonacci_grid(2000)
    a = _point_statistics(grid.points, 1.0)
    b = np.array([0.25 * (1 + x_ * y_ / np.sqrt(3)) for x_ in (-1, 1) for y_ in (-1, 1)])
    print("\nmin-max LP on the 2000-point sphere grid (full solve)")
    results, times = {}, {}
    for name, fns in impls.items():
        minmax_solve_with(fns["simplex_iterate"], a, b)  # warm/compile
        times[name], results[name] = timeit(
            minmax_solve_with, fns["simplex_iterate"], a, b
        )
        print(f"  {name:>6}: {times[name] * 1e3:8.2f} ms  (residual {results[name]:.6f})")
    check_close(results)
    if len(times) == 2:
        print(f"  speedup numba vs numpy: {times['numpy'] / times['numba']:.2f}x")


if __name__ == "__main__":
    main()
