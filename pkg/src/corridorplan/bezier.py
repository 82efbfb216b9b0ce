"""Bezier segments and composite paths.

Evaluation is de Casteljau; batch sampling goes through Bernstein basis
rows so the sample positions are also available as linear maps from the
stacked control-point vector (which is what the sampled objectives and
their gradients consume).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import comb

from .geom import _freeze

__all__ = [
    "BezierError",
    "BezierSegment",
    "CompositePath",
    "PathLayout",
    "sample_path",
    "bernstein_rows",
    "sample_rows",
    "num_samples",
    "num_stacked_points",
]


class BezierError(ValueError):
    """Bad degree, parameter out of range, or a discontinuous path."""


class BezierSegment:
    """Polynomial segment in Bernstein form, any dimension.

    Degree 0 arises only as the derivative of a degree-1 segment; paths
    are built from degree >= 1 segments.
    """

    def __init__(self, control_points):
        pts = np.atleast_2d(np.asarray(control_points, dtype=float))
        if pts.shape[0] < 1:
            raise BezierError("need at least one control point")
        self.points = _freeze(pts)

    @property
    def degree(self) -> int:
        return self.points.shape[0] - 1

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def eval(self, t: float) -> np.ndarray:
        if not 0.0 <= t <= 1.0:
            raise BezierError(f"parameter {t} outside [0, 1]")
        pts = self.points
        for _ in range(self.degree):  # de Casteljau
            pts = (1.0 - t) * pts[:-1] + t * pts[1:]
        return pts[0].copy()

    def eval_batch(self, ts) -> np.ndarray:
        ts = np.asarray(ts, dtype=float)
        if ts.size and (ts.min() < 0.0 or ts.max() > 1.0):
            raise BezierError("parameters outside [0, 1]")
        return bernstein_rows(self.degree, ts) @ self.points

    def derivative(self) -> "BezierSegment":
        d = self.degree
        if d == 0:
            raise BezierError("constant segment has no derivative")
        return BezierSegment(d * (self.points[1:] - self.points[:-1]))

    def __repr__(self):
        return f"BezierSegment(degree={self.degree}, dim={self.dim})"


class CompositePath:
    """Chain of segments, continuous at the junctions."""

    def __init__(self, segments):
        segments = list(segments)
        if not segments:
            raise BezierError("path needs at least one segment")
        dim = segments[0].dim
        for seg in segments[1:]:
            if seg.dim != dim:
                raise BezierError("segments have mixed dimensions")
        for a, b in zip(segments, segments[1:]):
            gap = np.max(np.abs(a.points[-1] - b.points[0]))
            if gap > 1e-8:
                raise BezierError(f"junction gap {gap:.3e} exceeds 1e-8")
        self.segments = segments
        self.dim = dim

    @property
    def num_segments(self) -> int:
        return len(self.segments)


def bernstein_rows(degree: int, ts) -> np.ndarray:
    """Rows of Bernstein basis values, shape (len(ts), degree + 1)."""
    ts = np.atleast_1d(np.asarray(ts, dtype=float))
    j = np.arange(degree + 1)
    return comb(degree, j) * ts[:, None] ** j * (1.0 - ts[:, None]) ** (degree - j)


def num_samples(num_segments: int, k: int) -> int:
    return k + (num_segments - 1) * (k - 1)


@dataclass(frozen=True)
class PathLayout:
    """Shape of a stacked control-point vector."""

    num_segments: int
    degree: int
    dim: int

    @property
    def size(self) -> int:
        return num_stacked_points(self.num_segments, self.degree) * self.dim

    def points(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float).reshape(-1, self.dim)


def num_stacked_points(num_segments: int, degree: int) -> int:
    return num_segments * (degree + 1)


def sample_path(path: CompositePath, k: int):
    """Evenly sampled points, junctions listed once.

    Returns a flat list of (segment index, t, point); each segment is
    sampled at t = j/(k-1) and the duplicate t=0 sample of every segment
    after the first is dropped, so the junction belongs to the earlier
    segment.
    """
    if k < 2:
        raise BezierError("need at least two samples per segment")
    ts = np.linspace(0.0, 1.0, k)
    out = []
    for i, seg in enumerate(path.segments):
        pts = seg.eval_batch(ts)
        start = 1 if i > 0 else 0
        for j in range(start, k):
            out.append((i, float(ts[j]), pts[j]))
    return out


def _hodograph(d: int) -> np.ndarray:
    # maps d+1 control points to the d control points of the derivative
    return d * (np.eye(d, d + 1, k=1) - np.eye(d, d + 1))


def sample_rows(num_segments: int, degree: int, k: int, order: int = 0) -> np.ndarray:
    """Linear map from stacked control points to sampled derivatives.

    The stacked layout lists every segment's d+1 control points, so
    segment i owns columns i*(d+1) .. (i+1)*(d+1)-1; junction points
    appear twice and are tied by equality constraints elsewhere.  Row r
    gives the weights producing the order-th parameter derivative at
    the r-th flattened sample (same ordering as sample_path, junction
    samples charged to the earlier segment).  Orders beyond the degree
    give zero rows.
    """
    if k < 2:
        raise BezierError("need at least two samples per segment")
    if order < 0:
        raise BezierError("derivative order must be nonnegative")
    m = num_samples(num_segments, k)
    cols = num_stacked_points(num_segments, degree)
    W = np.zeros((m, cols))
    if order > degree:
        return W
    chain = np.eye(degree + 1)
    for step in range(order):
        chain = _hodograph(degree - step) @ chain
    ts = np.linspace(0.0, 1.0, k)
    rows = bernstein_rows(degree - order, ts) @ chain  # (k, degree + 1)
    r = 0
    w = degree + 1
    for i in range(num_segments):
        start = 1 if i > 0 else 0
        for j in range(start, k):
            W[r, i * w:(i + 1) * w] = rows[j]
            r += 1
    return W
