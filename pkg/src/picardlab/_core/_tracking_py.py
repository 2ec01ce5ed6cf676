"""Pure numpy versions of the tracking kernels."""

from __future__ import annotations

import numpy as np


def lift_phases(w: np.ndarray, theta0: np.ndarray) -> np.ndarray:
    """Continuous arguments along each row of ``w`` (shape P x K), starting at
    ``theta0``; consecutive samples must differ by less than pi in argument."""
    w = np.asarray(w, dtype=complex)
    steps = np.angle(w[:, 1:] / w[:, :-1])
    out = np.empty(w.shape, dtype=float)
    out[:, 0] = theta0
    out[:, 1:] = theta0[:, None] + np.cumsum(steps, axis=1)
    return out


def tracked_log_sum(
    w: np.ndarray,
    idx: np.ndarray,
    w_grid: np.ndarray,
    theta_grid: np.ndarray,
    exps: np.ndarray,
) -> np.ndarray:
    """sum_p exps[p] * (log|w[p, m]| + i * theta_p(m)) for every node m.

    ``theta_p(m)`` is the continuous argument at node m, recovered from the
    lifted grid value at the nearest grid point ``idx[m]`` plus the principal
    argument of the ratio ``w[p, m] / w_grid[p, idx[m]]``.
    """
    w = np.asarray(w, dtype=complex)
    ref = w_grid[:, idx]
    theta = theta_grid[:, idx] + np.angle(w / ref)
    logs = np.log(np.abs(w)) + 1j * theta
    return np.asarray(exps, dtype=float) @ logs
