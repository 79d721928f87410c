"""Constant-velocity and constant-acceleration reference predictors."""

from __future__ import annotations

import numpy as np

from .validation import as_positions, check_positive


def _steps(horizon: float, dt: float) -> int:
    check_positive(horizon, "horizon")
    check_positive(dt, "dt")
    return int(round(horizon / dt))


def cv_baseline(window, horizon: float, dt: float) -> np.ndarray:
    """Continue the last displacement; exact on constant-velocity tracks."""
    window = as_positions(window, "window")
    if len(window) < 2:
        raise ValueError("constant-velocity baseline needs at least 2 points")
    steps = _steps(horizon, dt)
    d = window[-1] - window[-2]
    ks = np.arange(1, steps + 1)[:, None]
    return window[-1] + ks * d


def ca_baseline(window, horizon: float, dt: float) -> np.ndarray:
    """Extrapolate the last displacement difference as constant acceleration.

    Exact on discretely quadratic tracks: each step adds the constant
    second difference to the running displacement.
    """
    window = as_positions(window, "window")
    if len(window) < 3:
        raise ValueError("constant-acceleration baseline needs at least 3 points")
    steps = _steps(horizon, dt)
    d = window[-1] - window[-2]
    d2 = window[-1] - 2.0 * window[-2] + window[-3]
    out = np.empty((steps, 2))
    p = window[-1].copy()
    for k in range(steps):
        d = d + d2
        p = p + d
        out[k] = p
    return out
