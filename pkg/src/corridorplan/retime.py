"""Time-optimal retiming of spatial paths under velocity and acceleration
box limits.

Works on the squared path speed b(u) = (du/dt)^2 over a uniform grid of the
path parameter.  A backward reachability pass computes per-stage upper
bounds on b, a greedy forward pass then rides those bounds; with box limits
every stage program reduces to intersecting per-coordinate intervals, so no
LP solves are needed.  Profiles are rest-to-rest.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline

from .bezier import CompositePath, sample_path
from .parametrizations import Parametrization

__all__ = ["RetimeError", "LimitSpec", "SpeedProfile", "retime", "duration_of"]

_TINY = 1e-12


class RetimeError(ValueError):
    """Bad limits or malformed sample input."""


@dataclass(frozen=True)
class LimitSpec:
    vel_max: np.ndarray
    acc_max: np.ndarray

    def __post_init__(self):
        vel = np.array(self.vel_max, dtype=float, ndmin=1)
        acc = np.array(self.acc_max, dtype=float, ndmin=1)
        if vel.ndim != 1 or acc.ndim != 1 or vel.shape != acc.shape:
            raise RetimeError("limits must be vectors of matching length")
        if np.any(vel <= 0.0) or np.any(acc <= 0.0):
            raise RetimeError("all limits must be strictly positive")
        vel.flags.writeable = False
        acc.flags.writeable = False
        object.__setattr__(self, "vel_max", vel)
        object.__setattr__(self, "acc_max", acc)


@dataclass(frozen=True)
class SpeedProfile:
    grid: np.ndarray  # N+1 parameter values on [0, 1]
    b: np.ndarray  # squared path speed (du/dt)^2 at each grid point
    duration: float


def _resample(samples: np.ndarray, n_grid: int) -> np.ndarray:
    """Chord-length resampling onto a uniform parameter grid.

    Uses a natural cubic spline so the resampled path stays smooth even
    when the grid is finer than the input sampling; linear interpolation
    would inject corner spikes into the second-difference estimates.
    """
    ds = np.linalg.norm(np.diff(samples, axis=0), axis=1)
    keep = np.concatenate([[True], ds > 0.0])
    pts = samples[keep]
    if len(pts) == 1:
        return np.repeat(pts, n_grid, axis=0)
    s = np.concatenate([[0.0], np.cumsum(np.linalg.norm(np.diff(pts, axis=0), axis=1))])
    u_src = s / s[-1]
    u_dst = np.linspace(0.0, 1.0, n_grid)
    if len(pts) >= 4:
        return CubicSpline(u_src, pts, axis=0, bc_type="natural")(u_dst)
    return np.column_stack([np.interp(u_dst, u_src, pts[:, i]) for i in range(pts.shape[1])])


def _derivatives(q: np.ndarray, du: float):
    d1 = np.empty_like(q)
    d1[1:-1] = (q[2:] - q[:-2]) / (2.0 * du)
    d1[0] = (q[1] - q[0]) / du
    d1[-1] = (q[-1] - q[-2]) / du
    d2 = np.zeros_like(q)
    d2[1:-1] = (q[2:] - 2.0 * q[1:-1] + q[:-2]) / du**2
    d2[0] = d2[1]
    d2[-1] = d2[-2]
    return d1, d2


def _accel_interval(d1, d2, acc, b):
    """Feasible path-acceleration interval {a : |d2*b + d1*a| <= acc}."""
    lo, hi = -np.inf, np.inf
    for c1, c2, A in zip(d1, d2, acc):
        if abs(c1) <= _TINY:
            continue  # pure-b constraint, handled by the caller's caps
        l, h = (-A - c2 * b) / c1, (A - c2 * b) / c1
        if c1 < 0.0:
            l, h = h, l
        lo, hi = max(lo, l), min(hi, h)
    return lo, hi


def _stage_bound(d1, d2, acc, b_cap, b_next, du):
    """Largest b at the stage head reaching [0, b_next] under the limits.

    All constraints are half-planes a >= alpha + beta*b or a <= gamma +
    delta*b; feasibility of the pair (alpha, beta) vs (gamma, delta) caps b
    at (gamma - alpha)/(beta - delta) whenever beta > delta.
    """
    lows, ups = [(0.0, -0.5 / du)], [(b_next / (2.0 * du), -0.5 / du)]
    bound = b_cap
    for c1, c2, A in zip(d1, d2, acc):
        if abs(c1) <= _TINY:
            if abs(c2) > _TINY:
                bound = min(bound, A / abs(c2))
            continue
        lo = (-A / c1, -c2 / c1)
        hi = (A / c1, -c2 / c1)
        if c1 < 0.0:
            lo, hi = hi, lo
        lows.append(lo)
        ups.append(hi)
    for alpha, beta in lows:
        for gamma, delta in ups:
            if beta > delta + _TINY:
                bound = min(bound, (gamma - alpha) / (beta - delta))
    return max(bound, 0.0)


def retime(path_samples, limits: LimitSpec, grid: int = 200) -> SpeedProfile:
    """Compute the time-optimal rest-to-rest speed profile along a path."""
    samples = np.asarray(path_samples, dtype=float)
    if samples.ndim != 2 or len(samples) < 3:
        raise RetimeError("need at least 3 path samples")
    if grid < 8:
        raise RetimeError("grid must have at least 8 stages")
    if samples.shape[1] != len(limits.vel_max):
        raise RetimeError("limit dimension does not match path dimension")
    n = grid
    u = np.linspace(0.0, 1.0, n + 1)
    length = float(np.sum(np.linalg.norm(np.diff(samples, axis=0), axis=1)))
    if length <= _TINY:
        return SpeedProfile(grid=u, b=np.zeros(n + 1), duration=0.0)
    q = _resample(samples, n + 1)
    du = 1.0 / n
    d1, d2 = _derivatives(q, du)

    vel, acc = limits.vel_max, limits.acc_max
    with np.errstate(divide="ignore"):
        per_coord = np.where(np.abs(d1) > _TINY, (vel / np.maximum(np.abs(d1), _TINY)) ** 2, np.inf)
    b_vel = per_coord.min(axis=1)

    # backward reachability: largest b at k that can brake into [0, K[k+1]]
    K = np.empty(n + 1)
    K[n] = 0.0
    for k in range(n - 1, -1, -1):
        K[k] = _stage_bound(d1[k], d2[k], acc, b_vel[k], K[k + 1], du)
    K[0] = 0.0

    # greedy forward pass along the backward envelope
    b = np.zeros(n + 1)
    for k in range(n):
        lo, hi = _accel_interval(d1[k], d2[k], acc, b[k])
        nxt = min(K[k + 1], b[k] + 2.0 * du * hi)
        nxt = max(nxt, b[k] + 2.0 * du * lo)
        b[k + 1] = min(max(nxt, 0.0), K[k + 1])

    duration = 0.0
    sqrt_b = np.sqrt(np.maximum(b, 0.0))
    for k in range(n):
        denom = sqrt_b[k] + sqrt_b[k + 1]
        if denom > _TINY:
            duration += 2.0 * du / denom
        else:
            # both endpoints at rest: acceleration-limited traversal
            with np.errstate(divide="ignore"):
                a_path = np.min(acc / np.maximum(np.abs(d1[k]), _TINY))
            if np.isfinite(a_path) and a_path > 0.0:
                duration += 2.0 * np.sqrt(du / a_path)
    return SpeedProfile(grid=u, b=b, duration=float(duration))


def duration_of(path: CompositePath, param: Parametrization, limits: LimitSpec,
                k_dense: int = 50, grid: int = 200) -> float:
    """Densely sample a path, map it through the parametrization, retime."""
    pts = np.array([p for _, _, p in sample_path(path, k_dense)])
    mapped = param.map_batch(pts)
    return retime(mapped, limits, grid).duration
