"""Planar point/segment geometry for wall interactions."""

from __future__ import annotations

import math

import numpy as np


def closest_point_on_segment(point, seg_a, seg_b) -> np.ndarray:
    """Orthogonal projection of ``point`` onto segment a-b, clamped to the ends."""
    point = np.asarray(point, dtype=np.float64)
    a = np.asarray(seg_a, dtype=np.float64)
    b = np.asarray(seg_b, dtype=np.float64)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0.0:
        return a.copy()
    t = float((point - a) @ ab) / denom
    t = min(1.0, max(0.0, t))
    return a + t * ab


def segment_distance(point, seg_a, seg_b) -> float:
    closest = closest_point_on_segment(point, seg_a, seg_b)
    point = np.asarray(point, dtype=np.float64)
    return math.hypot(point[0] - closest[0], point[1] - closest[1])


def nearest_segment_point(point, segments) -> tuple[np.ndarray, float]:
    """Closest point over a nonempty list of (a, b) segment pairs.

    Returns (closest_point, distance); ties resolved by list order.
    """
    best_point = None
    best_dist = math.inf
    for a, b in segments:
        cp = closest_point_on_segment(point, a, b)
        d = math.hypot(point[0] - cp[0], point[1] - cp[1])
        if d < best_dist:
            best_dist = d
            best_point = cp
    if best_point is None:
        raise ValueError("segment list is empty")
    return best_point, best_dist
