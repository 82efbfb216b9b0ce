"""Differentiable costs over stacked control-point vectors.

The convex surrogate measures squared control-point spacing; the sampled
length measures the true (possibly distorted) configuration-space length
of the curve; the curvature term aggregates per-sample curvatures with a
smooth maximum.  Every objective carries an analytic gradient; grad_check
compares it against central differences.
"""

from __future__ import annotations

import numpy as np
from scipy.special import logsumexp, softmax

from .bezier import num_samples, sample_rows
from .parametrizations import ParamError, Parametrization

__all__ = [
    "ObjectiveError",
    "Objective",
    "surrogate_length",
    "undistorted_length",
    "curvature_softmax",
    "curvature_values",
    "weighted_sum",
    "grad_check",
]

# curvature guards: stationary samples and numerically straight samples
# contribute zero (the kappa formula is singular at both)
_SPEED_FLOOR = 1e-8
_STRAIGHT_REL = 1e-14


class ObjectiveError(ValueError):
    """Mismatched shapes, bad parameters, or a failed sample evaluation."""


class Objective:
    """Callable pair (value, gradient) with a self-describing descriptor."""

    def __init__(self, value, gradient, descriptor: dict):
        self.value = value
        self.gradient = gradient
        self.descriptor = dict(descriptor)

    @property
    def name(self) -> str:
        return self.descriptor["name"]

    def __repr__(self):
        inner = ", ".join(f"{k}={v}" for k, v in self.descriptor.items() if k != "name")
        return f"{self.name}({inner})"


def _points(layout, x) -> np.ndarray:
    X = np.asarray(x, dtype=float)
    per_seg = layout.degree + 1
    expect = layout.num_segments * per_seg * layout.dim
    if X.size != expect:
        raise ObjectiveError(f"stacked vector has {X.size} entries, expected {expect}")
    return X.reshape(layout.num_segments, per_seg, layout.dim)


def surrogate_length(layout) -> Objective:
    """Sum of squared differences of adjacent control points per segment."""

    def value(x):
        d = np.diff(_points(layout, x), axis=1)
        return float(np.sum(d * d))

    def gradient(x):
        pts = _points(layout, x)
        d = 2.0 * np.diff(pts, axis=1)
        g = np.zeros_like(pts)
        g[:, :-1] -= d
        g[:, 1:] += d
        return g.reshape(-1)

    return Objective(value, gradient, {"name": "surrogate_length"})


def _sample_params(num_segments: int, k: int):
    # (segment, t) for each flattened sample, mirroring sample_path order
    ts = np.linspace(0.0, 1.0, k)
    out = []
    for i in range(num_segments):
        for j in range(1 if i > 0 else 0, k):
            out.append((i, float(ts[j])))
    return out


def undistorted_length(param: Parametrization, layout, k: int = 10) -> Objective:
    """Sum of squared metric distances between consecutive mapped samples."""
    if k < 2:
        raise ObjectiveError("need at least two samples per segment")
    if layout.dim != param.dim_q:
        raise ObjectiveError(
            f"layout dimension {layout.dim} does not match the "
            f"parametrization's {param.dim_q}")
    W = sample_rows(layout.num_segments, layout.degree, k, order=0)
    where = _sample_params(layout.num_segments, k)

    def mapped(x):
        samples = W @ _points(layout, x).reshape(-1, layout.dim)
        try:
            return samples, param.map_batch(samples)
        except ParamError:
            for r, s in enumerate(samples):  # locate the offender for the report
                try:
                    param.map(s)
                except ParamError as exc:
                    i, t = where[r]
                    raise ObjectiveError(
                        f"parametrization failed at segment {i}, t={t:.4f}: {exc}")
            raise

    def value(x):
        _, C = mapped(x)
        return float(np.sum(param.metric_sq_batch(C[1:], C[:-1])))

    def gradient(x):
        samples, C = mapped(x)
        Ga, Gb = param.metric_sq_grads_batch(C[1:], C[:-1])
        dC = np.zeros_like(C)
        dC[1:] += Ga
        dC[:-1] += Gb
        J = param.jacobian_batch(samples)
        dS = np.einsum("mcq,mc->mq", J, dC)
        return (W.T @ dS).reshape(-1)

    return Objective(value, gradient,
                     {"name": "undistorted_length", "param": param.name, "k": k})


def _curvature_terms(D1, D2):
    a = np.sum(D1 * D1, axis=1)
    b = np.sum(D2 * D2, axis=1)
    c = np.sum(D1 * D2, axis=1)
    G = np.maximum(a * b - c * c, 0.0)
    live = (a > _SPEED_FLOOR ** 2) & (G > _STRAIGHT_REL * a * b)
    kappa = np.zeros_like(a)
    lv = live
    kappa[lv] = np.sqrt(G[lv]) / a[lv] ** 1.5
    return a, b, c, G, live, kappa


def curvature_values(layout, k: int, x) -> np.ndarray:
    """Per-sample path curvatures (guarded), for inspection and tests."""
    if layout.degree < 2:
        raise ObjectiveError("curvature needs degree >= 2")
    W1 = sample_rows(layout.num_segments, layout.degree, k, order=1)
    W2 = sample_rows(layout.num_segments, layout.degree, k, order=2)
    X = _points(layout, x).reshape(-1, layout.dim)
    return _curvature_terms(W1 @ X, W2 @ X)[5]


def curvature_softmax(layout, k: int = 10, beta: float = 10.0) -> Objective:
    """Smooth maximum of sampled curvatures: logsumexp(beta*kappa)/beta."""
    if layout.degree < 2:
        raise ObjectiveError("curvature needs degree >= 2")
    if k < 3:
        raise ObjectiveError("need at least three curvature samples per segment")
    if beta <= 0:
        raise ObjectiveError("beta must be positive")
    W1 = sample_rows(layout.num_segments, layout.degree, k, order=1)
    W2 = sample_rows(layout.num_segments, layout.degree, k, order=2)

    def value(x):
        X = _points(layout, x).reshape(-1, layout.dim)
        kappa = _curvature_terms(W1 @ X, W2 @ X)[5]
        return float(logsumexp(beta * kappa) / beta)

    def gradient(x):
        X = _points(layout, x).reshape(-1, layout.dim)
        D1, D2 = W1 @ X, W2 @ X
        a, b, c, G, live, kappa = _curvature_terms(D1, D2)
        w = softmax(beta * kappa)
        dk = np.zeros_like(kappa)
        da = np.zeros_like(a)
        db = np.zeros_like(a)
        dc = np.zeros_like(a)
        lv = live
        sqrtG = np.sqrt(G[lv])
        a32 = a[lv] ** 1.5
        dG = w[lv] / (2.0 * sqrtG * a32)
        da[lv] = dG * b[lv] - 1.5 * w[lv] * sqrtG / a[lv] ** 2.5
        db[lv] = dG * a[lv]
        dc[lv] = -2.0 * dG * c[lv]
        dD1 = 2.0 * da[:, None] * D1 + dc[:, None] * D2
        dD2 = 2.0 * db[:, None] * D2 + dc[:, None] * D1
        return (W1.T @ dD1 + W2.T @ dD2).reshape(-1)

    return Objective(value, gradient,
                     {"name": "curvature_softmax", "k": k, "beta": beta})


def sampled_length(param: Parametrization, layout, x, k: int = 10) -> float:
    """Piecewise-linear configuration-space length of the sampled curve."""
    W = sample_rows(layout.num_segments, layout.degree, k, order=0)
    samples = W @ np.asarray(x, dtype=float).reshape(-1, layout.dim)
    C = param.map_batch(samples)
    return float(np.sum(np.sqrt(param.metric_sq_batch(C[1:], C[:-1]))))


def weighted_sum(objs, weights) -> Objective:
    objs = list(objs)
    weights = [float(w) for w in weights]
    if len(objs) != len(weights):
        raise ObjectiveError(f"{len(objs)} objectives vs {len(weights)} weights")
    if any(w < 0 for w in weights):
        raise ObjectiveError("weights must be nonnegative")

    def value(x):
        return float(sum(w * o.value(x) for o, w in zip(objs, weights)))

    def gradient(x):
        g = np.zeros(np.asarray(x).size)
        for o, w in zip(objs, weights):
            if w != 0.0:
                g += w * o.gradient(x)
        return g

    terms = [o.descriptor.get("name", "?") for o in objs]
    return Objective(value, gradient,
                     {"name": "weighted_sum", "terms": terms, "weights": weights})


def grad_check(obj: Objective, x, h: float = 1e-6) -> float:
    """Worst relative disagreement between analytic and central-difference."""
    if h <= 0:
        raise ObjectiveError("step must be positive")
    x = np.asarray(x, dtype=float)
    g = obj.gradient(x)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd = (obj.value(x + e) - obj.value(x - e)) / (2.0 * h)
        worst = max(worst, abs(g[i] - fd) / max(1.0, abs(g[i])))
    return worst
