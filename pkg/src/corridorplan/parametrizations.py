"""Nonlinear changes of coordinates between planning and configuration space.

Each parametrization maps a planning point x to a configuration alpha(x),
carries an analytic jacobian, and defines the metric used to measure true
path length in configuration space.  The squared metric and its gradients
are the smooth quantities consumed by the sampled length objective; the
plain metric keeps a guarded gradient for completeness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "ParamError",
    "Parametrization",
    "identity_param",
    "euler_param",
    "rational_param",
    "bimanual_planar_param",
    "BimanualGeometry",
    "GraspTransform",
    "lead_fk",
    "sub_fk",
    "grasp_target",
]


class ParamError(ValueError):
    """Bad inputs or an unreachable inverse-kinematics target."""


class Parametrization:
    """Base: Euclidean metric, per-point map/jacobian, batched loops."""

    name = "base"

    def __init__(self, dim_q: int, dim_c: int):
        if dim_q < 1 or dim_c < 1:
            raise ParamError("dimensions must be positive")
        self.dim_q = dim_q
        self.dim_c = dim_c

    def map(self, x) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        raise NotImplementedError

    def map_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array([self.map(x) for x in X])

    def jacobian_batch(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return np.array([self.jacobian(x) for x in X])

    # Euclidean metric family; overridden by the quaternion parametrization

    def metric(self, a, b) -> float:
        return float(np.linalg.norm(np.asarray(a, float) - np.asarray(b, float)))

    def metric_grads(self, a, b):
        d = np.asarray(a, float) - np.asarray(b, float)
        nrm = np.linalg.norm(d)
        if nrm < 1e-12:
            return np.zeros_like(d), np.zeros_like(d)
        return d / nrm, -d / nrm

    def metric_sq_batch(self, A, B) -> np.ndarray:
        d = np.asarray(A, float) - np.asarray(B, float)
        return np.sum(d * d, axis=-1)

    def metric_sq_grads_batch(self, A, B):
        d = 2.0 * (np.asarray(A, float) - np.asarray(B, float))
        return d, -d

    def metric_sq(self, a, b) -> float:
        return float(self.metric_sq_batch(np.asarray(a)[None], np.asarray(b)[None])[0])


class IdentityParam(Parametrization):
    name = "identity"

    def __init__(self, n: int):
        super().__init__(n, n)

    def map(self, x):
        return np.asarray(x, dtype=float).copy()

    def jacobian(self, x):
        return np.eye(self.dim_q)

    def map_batch(self, X):
        return np.asarray(X, dtype=float).copy()

    def jacobian_batch(self, X):
        X = np.asarray(X, dtype=float)
        return np.broadcast_to(np.eye(self.dim_q), (X.shape[0],) * 1 + (self.dim_q, self.dim_q)).copy()


def identity_param(n: int) -> Parametrization:
    return IdentityParam(n)


# --- roll-pitch-yaw to unit quaternion ---------------------------------

def _qmul(a, b):
    # Hamilton product on (..., 4) arrays, components (w, x, y, z)
    w1, x1, y1, z1 = np.moveaxis(a, -1, 0)
    w2, x2, y2, z2 = np.moveaxis(b, -1, 0)
    return np.stack([
        w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
        w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
        w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
        w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
    ], axis=-1)


def _axis_quats(half, axis):
    # (..., 4) quaternions about one fixed axis, given half angles
    c, s = np.cos(half), np.sin(half)
    q = np.zeros(half.shape + (4,))
    q[..., 0] = c
    q[..., 1 + axis] = s
    return q


class EulerParam(Parametrization):
    """Extrinsic X-Y-Z (roll, pitch, yaw) angles to unit quaternions.

    The metric is the geodesic half angle arccos(min(1, |<q1, q2>|)),
    which is symmetric under the double cover q ~ -q.
    """

    name = "euler_rpy"

    def __init__(self):
        super().__init__(3, 4)

    def map_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        qx = _axis_quats(0.5 * X[..., 0], 0)
        qy = _axis_quats(0.5 * X[..., 1], 1)
        qz = _axis_quats(0.5 * X[..., 2], 2)
        return _qmul(qz, _qmul(qy, qx))

    def map(self, x):
        return self.map_batch(np.asarray(x)[None])[0]

    def jacobian_batch(self, X):
        X = np.atleast_2d(np.asarray(X, dtype=float))
        hx, hy, hz = 0.5 * X[..., 0], 0.5 * X[..., 1], 0.5 * X[..., 2]
        qx, qy, qz = _axis_quats(hx, 0), _axis_quats(hy, 1), _axis_quats(hz, 2)

        def d_axis(half, axis):
            q = np.zeros(half.shape + (4,))
            q[..., 0] = -0.5 * np.sin(half)
            q[..., 1 + axis] = 0.5 * np.cos(half)
            return q

        dr = _qmul(qz, _qmul(qy, d_axis(hx, 0)))
        dp = _qmul(qz, _qmul(d_axis(hy, 1), qx))
        dy = _qmul(d_axis(hz, 2), _qmul(qy, qx))
        return np.stack([dr, dp, dy], axis=-1)  # (..., 4, 3)

    def jacobian(self, x):
        return self.jacobian_batch(np.asarray(x)[None])[0]

    def metric(self, a, b) -> float:
        d = abs(float(np.dot(a, b)))
        return float(np.arccos(min(1.0, d)))

    def metric_grads(self, a, b):
        a = np.asarray(a, float)
        b = np.asarray(b, float)
        d = float(np.dot(a, b))
        if abs(d) >= 1.0 - 1e-12:  # coincident rotations, metric at its minimum
            return np.zeros_like(a), np.zeros_like(b)
        g = -np.sign(d) / np.sqrt(1.0 - d * d)
        return g * b, g * a

    def metric_sq_batch(self, A, B):
        d = np.sum(np.asarray(A, float) * np.asarray(B, float), axis=-1)
        return np.arccos(np.minimum(1.0, np.abs(d))) ** 2

    def metric_sq_grads_batch(self, A, B):
        A = np.asarray(A, float)
        B = np.asarray(B, float)
        d = np.sum(A * B, axis=-1)
        ad = np.minimum(1.0, np.abs(d))
        # d/dd of arccos(|d|)^2; the limit at |d| -> 1 is -2 sign(d)
        near = ad >= 1.0 - 1e-9
        denom = np.sqrt(np.where(near, 1.0, 1.0 - ad * ad))
        g = np.where(near, -2.0 * np.sign(d),
                     -2.0 * np.arccos(ad) * np.sign(d) / denom)
        return g[..., None] * B, g[..., None] * A


def euler_param() -> Parametrization:
    return EulerParam()


# --- tangent half-angle joints -----------------------------------------

class RationalParam(Parametrization):
    """Per-joint theta = 2 atan(s); angles live in (-pi, pi)."""

    name = "rational"

    def __init__(self, n: int):
        super().__init__(n, n)

    def map_batch(self, X):
        return 2.0 * np.arctan(np.asarray(X, dtype=float))

    def map(self, x):
        return self.map_batch(x)

    def jacobian(self, x):
        s = np.asarray(x, dtype=float)
        return np.diag(2.0 / (1.0 + s * s))

    def jacobian_batch(self, X):
        X = np.asarray(X, dtype=float)
        J = np.zeros((X.shape[0], self.dim_c, self.dim_q))
        idx = np.arange(self.dim_q)
        J[:, idx, idx] = 2.0 / (1.0 + X * X)
        return J


def rational_param(n: int) -> Parametrization:
    return RationalParam(n)


# --- planar bimanual analog --------------------------------------------

def _u(theta):
    return np.array([np.cos(theta), np.sin(theta)])


def _du(theta):
    return np.array([-np.sin(theta), np.cos(theta)])


@dataclass(frozen=True)
class BimanualGeometry:
    """Planar two-arm layout: a 3R leading arm and a 4R subordinate arm."""

    lead_base: tuple
    lead_links: tuple
    sub_base: tuple
    sub_links: tuple

    def __post_init__(self):
        if len(self.lead_links) != 3 or len(self.sub_links) != 4:
            raise ParamError("need 3 leading and 4 subordinate link lengths")
        if min(self.lead_links) <= 0 or min(self.sub_links) <= 0:
            raise ParamError("link lengths must be positive")


@dataclass(frozen=True)
class GraspTransform:
    """Fixed offset (in the leading end-effector frame) and relative angle."""

    offset: tuple
    angle: float


def lead_fk(geom: BimanualGeometry, q):
    """End-effector (position, heading) of the leading 3R arm."""
    q = np.asarray(q, dtype=float)
    p = np.asarray(geom.lead_base, dtype=float).copy()
    phi = 0.0
    for qi, li in zip(q, geom.lead_links):
        phi += qi
        p = p + li * _u(phi)
    return p, phi


def sub_fk(geom: BimanualGeometry, r):
    """End-effector (position, heading) of the subordinate 4R arm."""
    r = np.asarray(r, dtype=float)
    p = np.asarray(geom.sub_base, dtype=float).copy()
    phi = 0.0
    for ri, mi in zip(r, geom.sub_links):
        phi += ri
        p = p + mi * _u(phi)
    return p, phi


def grasp_target(geom: BimanualGeometry, grasp: GraspTransform, q):
    """Pose the subordinate end effector must hold, given the leading arm."""
    p, phi = lead_fk(geom, q)
    c, s = np.cos(phi), np.sin(phi)
    off = np.asarray(grasp.offset, dtype=float)
    pt = p + np.array([c * off[0] - s * off[1], s * off[0] + c * off[1]])
    return pt, phi + grasp.angle


class BimanualPlanarParam(Parametrization):
    """(3 leading joints, redundancy angle) -> all 7 joints.

    The redundancy angle is the absolute heading of the subordinate's
    first link; the remaining three subordinate joints follow from the
    closed-form planar solution for the wrist position (fixed elbow
    branch) and the grasp orientation.
    """

    name = "bimanual_planar"

    def __init__(self, geom: BimanualGeometry, grasp: GraspTransform, branch: int = 1):
        if branch not in (1, -1):
            raise ParamError("elbow branch must be +1 or -1")
        super().__init__(4, 7)
        self.geom = geom
        self.grasp = grasp
        self.branch = branch

    def _solve(self, x, with_jacobian: bool):
        x = np.asarray(x, dtype=float)
        if x.shape != (4,):
            raise ParamError(f"expected 4 coordinates, got shape {x.shape}")
        q, psi = x[:3], x[3]
        g = self.geom
        l1, l2, l3 = g.lead_links
        m1, m2, m3, m4 = g.sub_links
        phi1 = q[0]
        phi2 = q[0] + q[1]
        phi3 = q[0] + q[1] + q[2]
        p3 = np.asarray(g.lead_base, float) + l1 * _u(phi1) + l2 * _u(phi2) + l3 * _u(phi3)
        off = np.asarray(self.grasp.offset, float)
        c, s = np.cos(phi3), np.sin(phi3)
        pt = p3 + np.array([c * off[0] - s * off[1], s * off[0] + c * off[1]])
        phit = phi3 + self.grasp.angle
        e = np.asarray(g.sub_base, float) + m1 * _u(psi)
        w = pt - m4 * _u(phit)
        v = w - e
        D2 = float(v @ v)
        D = np.sqrt(D2)
        if not (abs(m2 - m3) <= D <= m2 + m3):
            raise ParamError(
                f"wrist target at distance {D:.4f} outside the reachable "
                f"annulus [{abs(m2 - m3):.4f}, {m2 + m3:.4f}]")
        gamma = float(np.arctan2(v[1], v[0]))
        h = (D2 + m2 * m2 - m3 * m3) / (2.0 * m2 * D)
        beta = float(np.arccos(np.clip(h, -1.0, 1.0)))
        a2 = gamma + self.branch * beta
        z = v - m2 * _u(a2)  # wrist minus second elbow; length m3 exactly
        a3 = float(np.arctan2(z[1], z[0]))
        r2 = a2 - psi
        r3 = a3 - a2
        r4 = phit - a3
        alpha = np.concatenate([q, [psi, r2, r3, r4]])
        if not with_jacobian:
            return alpha, None

        # partials with respect to (q1, q2, q3, psi), assembled by chain rule
        dphi3 = np.array([1.0, 1.0, 1.0, 0.0])
        dp3 = np.zeros((2, 4))
        dp3[:, 0] = l1 * _du(phi1) + l2 * _du(phi2) + l3 * _du(phi3)
        dp3[:, 1] = l2 * _du(phi2) + l3 * _du(phi3)
        dp3[:, 2] = l3 * _du(phi3)
        rot_off = np.array([-s * off[0] - c * off[1], c * off[0] - s * off[1]])
        dpt = dp3 + np.outer(rot_off, dphi3)
        dw = dpt - m4 * np.outer(_du(phit), dphi3)
        de = np.zeros((2, 4))
        de[:, 3] = m1 * _du(psi)
        dv = dw - de
        dD = (v @ dv) / D
        dgamma = np.array([-v[1], v[0]]) / D2 @ dv
        dh = (D2 - m2 * m2 + m3 * m3) / (2.0 * m2 * D2) * dD
        sin_beta_sq = max(1.0 - h * h, 1e-12)  # fixture sets keep a margin
        dbeta = -dh / np.sqrt(sin_beta_sq)
        da2 = dgamma + self.branch * dbeta
        dz = dv - m2 * np.outer(_du(a2), da2)
        da3 = np.array([-z[1], z[0]]) / (m3 * m3) @ dz
        J = np.zeros((7, 4))
        J[0, 0] = J[1, 1] = J[2, 2] = J[3, 3] = 1.0
        J[4] = da2
        J[4, 3] -= 1.0
        J[5] = da3 - da2
        J[6] = dphi3 - da3
        return alpha, J

    def map(self, x):
        return self._solve(x, with_jacobian=False)[0]

    def jacobian(self, x):
        return self._solve(x, with_jacobian=True)[1]


def bimanual_planar_param(geom: BimanualGeometry, grasp: GraspTransform,
                          branch: int = 1) -> Parametrization:
    return BimanualPlanarParam(geom, grasp, branch)
