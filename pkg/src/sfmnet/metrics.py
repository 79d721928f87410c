"""Trajectory error metrics."""

from __future__ import annotations

import math

import numpy as np

from .validation import as_positions


def mde(predicted, ground_truth) -> float:
    """Mean Euclidean distance between aligned points."""
    predicted = as_positions(predicted, "predicted")
    ground_truth = as_positions(ground_truth, "ground_truth")
    if len(predicted) != len(ground_truth):
        raise ValueError(
            f"length mismatch: {len(predicted)} predicted vs {len(ground_truth)} truth"
        )
    if len(predicted) == 0:
        raise ValueError("empty trajectories")
    diff = predicted - ground_truth
    return float(np.mean(np.hypot(diff[:, 0], diff[:, 1])))


def fde(predicted, ground_truth) -> float:
    """Euclidean distance between the final points."""
    predicted = as_positions(predicted, "predicted")
    ground_truth = as_positions(ground_truth, "ground_truth")
    if len(predicted) == 0 or len(ground_truth) == 0:
        raise ValueError("empty trajectories")
    diff = predicted[-1] - ground_truth[-1]
    return float(math.hypot(diff[0], diff[1]))
