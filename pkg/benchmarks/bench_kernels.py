"""Timing of the compiled and numpy tracking kernels.

    python benchmarks/bench_kernels.py [--repeat R]

Prints the best-of-R time per call for both backends on problem sizes
typical of the quadrature grids (a few branch points, up to 10^5 nodes).
"""

from __future__ import annotations

import argparse
import timeit

import numpy as np

from picardlab._core import _tracking_py

try:
    from picardlab._core import _tracking as _compiled
except ImportError:  # pragma: no cover
    _compiled = None


def problem(P: int, K: int, M: int, seed: int = 0):
    rng = np.random.default_rng(seed)
    t = np.linspace(0.0, 1.0, K)
    centers = rng.standard_normal(P) + 1j * rng.standard_normal(P)
    w_grid = (np.exp(4j * np.pi * t) * (1 + t))[None, :] - 0.3 * centers[:, None]
    theta_grid = _tracking_py.lift_phases(w_grid, np.zeros(P))
    idx = rng.integers(0, K, M).astype(np.intp)
    w = w_grid[:, idx] * (1 + 1e-3 * rng.standard_normal((P, M)))
    exps = rng.uniform(0.1, 1.5, P)
    return w_grid, theta_grid, idx, w, exps


def bench(repeat: int) -> list[tuple[str, str, int, float, float]]:
    rows = []
    for P, K, M in [(4, 1_000, 1_000), (4, 10_000, 100_000), (8, 10_000, 100_000)]:
        w_grid, theta_grid, idx, w, exps = problem(P, K, M)
        for name, impl in (("python", _tracking_py), ("cython", _compiled)):
            if impl is None:
                continue
            lift = min(timeit.repeat(lambda: impl.lift_phases(w_grid, np.zeros(P)), number=5, repeat=repeat)) / 5
            logs = min(
                timeit.repeat(lambda: impl.tracked_log_sum(w, idx, w_grid, theta_grid, exps), number=5, repeat=repeat)
            ) / 5
            rows.append((name, f"P={P} K={K} M={M}", P, lift, logs))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()
    print(f"{'backend':8} {'size':28} {'lift_phases':>14} {'tracked_log_sum':>16}")
    for name, size, _, lift, logs in bench(args.repeat):
        print(f"{name:8} {size:28} {lift * 1e3:11.3f} ms {logs * 1e3:13.3f} ms")


if __name__ == "__main__":
    main()
