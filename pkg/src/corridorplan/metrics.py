"""Report metrics: arm travel imbalance and SLERP-relative path error."""

from __future__ import annotations

import numpy as np

__all__ = ["MetricError", "imbalance", "relative_error_slerp", "slerp_distance"]


class MetricError(ValueError):
    """Degenerate inputs (empty coordinate groups, coincident rotations)."""


def imbalance(path_c, controlled) -> float:
    """Travel asymmetry (d_s - d_c)/(d_s + d_c) between the two arms.

    d_c sums piecewise-linear motion over the controlled coordinate group,
    d_s over the remaining (subordinate) coordinates.  +1 means only the
    subordinate arm moved, -1 only the controlled arm, 0 balanced travel.
    """
    pts = np.asarray(path_c, dtype=float)
    if pts.ndim != 2 or len(pts) < 2:
        raise MetricError("need a 2-d array of at least two path samples")
    controlled = np.asarray(controlled)
    if controlled.dtype == bool:
        if controlled.shape != (pts.shape[1],):
            raise MetricError("boolean mask must cover every coordinate")
        mask = controlled.copy()
    else:
        mask = np.zeros(pts.shape[1], dtype=bool)
        mask[controlled.astype(int)] = True
    if not mask.any() or mask.all():
        raise MetricError("both coordinate groups must be nonempty")
    steps = np.diff(pts, axis=0)
    d_c = float(np.sum(np.linalg.norm(steps[:, mask], axis=1)))
    d_s = float(np.sum(np.linalg.norm(steps[:, ~mask], axis=1)))
    total = d_s + d_c
    if total <= 0.0:
        return 0.0
    return (d_s - d_c) / total


def slerp_distance(q_start, q_goal) -> float:
    """Geodesic angle between unit quaternions (double cover folded)."""
    a = np.asarray(q_start, dtype=float)
    b = np.asarray(q_goal, dtype=float)
    return float(np.arccos(min(1.0, abs(float(a @ b)))))


def relative_error_slerp(path_len: float, q_start, q_goal) -> float:
    """(path_len - d*)/d* against the closed-form geodesic distance d*."""
    if path_len < 0.0:
        raise MetricError("path length must be nonnegative")
    d_star = slerp_distance(q_start, q_goal)
    if d_star < 1e-9:
        raise MetricError("rotations coincide; geodesic baseline undefined")
    return (path_len - d_star) / d_star
