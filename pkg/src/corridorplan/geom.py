"""H-representation polytopes: membership, intersection, affine hulls, projections.

All sets are {x : A x <= b, E x = f}. Arrays are immutable after construction;
every operation here is a pure function, so values can be shared freely across
threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import linprog

DEFAULT_TOL = 1e-6


class GeometryError(ValueError):
    pass


def _as_matrix(M, n_cols=None) -> np.ndarray:
    M = np.atleast_2d(np.asarray(M, dtype=float))
    if n_cols is not None and M.size == 0:
        M = M.reshape(0, n_cols)
    return M


def _freeze(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Polytope:
    """Convex set {x : A x <= b, E x = f} with an explicit equality block.

    A polytope with no equalities stores an empty (0, n) block, never a
    zero-row sentinel.
    """

    A: np.ndarray
    b: np.ndarray
    E: np.ndarray = field(default=None)
    f: np.ndarray = field(default=None)

    def __post_init__(self):
        A = _as_matrix(self.A)
        b = np.atleast_1d(np.asarray(self.b, dtype=float))
        if A.shape[0] != b.shape[0]:
            raise GeometryError(f"A has {A.shape[0]} rows but b has {b.shape[0]}")
        n = A.shape[1]
        E = _as_matrix(self.E, n_cols=n) if self.E is not None else np.zeros((0, n))
        f = (
            np.atleast_1d(np.asarray(self.f, dtype=float))
            if self.f is not None
            else np.zeros(0)
        )
        if E.shape[0] != f.shape[0]:
            raise GeometryError(f"E has {E.shape[0]} rows but f has {f.shape[0]}")
        if E.shape[0] > 0 and E.shape[1] != n:
            raise GeometryError(f"E has {E.shape[1]} columns, expected {n}")
        object.__setattr__(self, "A", _freeze(A))
        object.__setattr__(self, "b", _freeze(b))
        object.__setattr__(self, "E", _freeze(E))
        object.__setattr__(self, "f", _freeze(f))

    @property
    def dim(self) -> int:
        return self.A.shape[1]

    @property
    def num_ineq(self) -> int:
        return self.A.shape[0]

    @property
    def num_eq(self) -> int:
        return self.E.shape[0]

    def contains(self, x, tol: float = DEFAULT_TOL) -> bool:
        """True iff A x <= b + tol componentwise and |E x - f| <= tol."""
        x = np.asarray(x, dtype=float).ravel()
        if x.shape[0] != self.dim:
            raise GeometryError(f"point has dim {x.shape[0]}, polytope has {self.dim}")
        if tol < 0:
            raise GeometryError("tol must be nonnegative")
        if self.num_ineq and np.any(self.A @ x > self.b + tol):
            return False
        if self.num_eq and np.any(np.abs(self.E @ x - self.f) > tol):
            return False
        return True

    def violation(self, x) -> float:
        """Largest constraint residual at x (0 if feasible)."""
        x = np.asarray(x, dtype=float).ravel()
        v = 0.0
        if self.num_ineq:
            v = max(v, float(np.max(self.A @ x - self.b)))
        if self.num_eq:
            v = max(v, float(np.max(np.abs(self.E @ x - self.f))))
        return v

    @staticmethod
    def box(lo, hi) -> "Polytope":
        """Axis-aligned box {lo <= x <= hi}."""
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        hi = np.atleast_1d(np.asarray(hi, dtype=float))
        n = lo.shape[0]
        A = np.vstack([np.eye(n), -np.eye(n)])
        b = np.concatenate([hi, -lo])
        return Polytope(A, b)


@dataclass(frozen=True)
class AffineSubspace:
    """Affine subspace {origin + basis @ z} with orthonormal basis columns."""

    basis: np.ndarray
    origin: np.ndarray

    def __post_init__(self):
        B = _as_matrix(self.basis)
        o = np.atleast_1d(np.asarray(self.origin, dtype=float))
        if B.shape[0] != o.shape[0]:
            raise GeometryError("basis rows and origin dim disagree")
        object.__setattr__(self, "basis", _freeze(B))
        object.__setattr__(self, "origin", _freeze(o))

    @property
    def ambient_dim(self) -> int:
        return self.origin.shape[0]

    @property
    def dim(self) -> int:
        return self.basis.shape[1]


def intersect(P: Polytope, Q: Polytope) -> Polytope:
    """Stack constraint rows; membership in the result <=> membership in both."""
    if P.dim != Q.dim:
        raise GeometryError(f"ambient dims differ: {P.dim} vs {Q.dim}")
    return Polytope(
        np.vstack([P.A, Q.A]),
        np.concatenate([P.b, Q.b]),
        np.vstack([P.E, Q.E]),
        np.concatenate([P.f, Q.f]),
    )


def _feasibility_lp(P: Polytope, tol: float):
    # Relax every constraint by tol so feasibility matches "residual <= tol".
    res = linprog(
        c=np.zeros(P.dim),
        A_ub=P.A if P.num_ineq else None,
        b_ub=P.b + tol if P.num_ineq else None,
        A_eq=P.E if P.num_eq else None,
        b_eq=P.f if P.num_eq else None,
        bounds=[(None, None)] * P.dim,
        method="highs",
    )
    return res


def is_empty(P: Polytope, tol: float = 1e-7) -> bool:
    """True iff no point satisfies all constraints within residual tol."""
    if P.num_ineq == 0 and P.num_eq == 0:
        return False
    res = _feasibility_lp(P, tol)
    if res.status == 0:
        return False
    if res.status == 2:
        return True
    raise GeometryError(
        f"feasibility LP did not converge (status {res.status}): {res.message}"
    )


def affine_hull(P: Polytope) -> AffineSubspace:
    """Subspace {x : E x = f} from the explicit equality block only.

    The hull is taken from declared equalities; inequality-induced degeneracy
    is deliberately not detected (sets are assumed full-dimensional inside
    their equality block).
    """
    n = P.dim
    if P.num_eq == 0:
        return AffineSubspace(np.eye(n), np.zeros(n))
    origin, *_ = np.linalg.lstsq(P.E, P.f, rcond=None)
    resid = np.max(np.abs(P.E @ origin - P.f)) if P.num_eq else 0.0
    scale = max(1.0, float(np.max(np.abs(P.f))) if P.f.size else 1.0)
    if resid > 1e-8 * scale:
        raise GeometryError(f"inconsistent equality block (residual {resid:.3e})")
    basis = null_space(P.E)
    if basis.size == 0:
        basis = np.zeros((n, 0))
    return AffineSubspace(basis, origin)


def project_affine(S: AffineSubspace, x) -> np.ndarray:
    """Closed-form orthogonal projection origin + B B^T (x - origin)."""
    x = np.asarray(x, dtype=float).ravel()
    if x.shape[0] != S.ambient_dim:
        raise GeometryError(f"point dim {x.shape[0]} != ambient dim {S.ambient_dim}")
    d = x - S.origin
    return S.origin + S.basis @ (S.basis.T @ d)


def _chebyshev_stage(G, h, norms, z_dim):
    """LP: max r s.t. G z + r * norms <= h. Returns (z, r, duals)."""
    c = np.zeros(z_dim + 1)
    c[-1] = -1.0
    A_ub = np.hstack([G, norms[:, None]])
    res = linprog(
        c,
        A_ub=A_ub,
        b_ub=h,
        bounds=[(None, None)] * z_dim + [(0, None)],
        method="highs",
    )
    if res.status == 3:
        raise GeometryError("chebyshev center: polytope unbounded in its affine hull")
    if res.status == 2:
        raise GeometryError("chebyshev center: empty polytope")
    if res.status != 0:
        raise GeometryError(f"chebyshev LP failed (status {res.status}): {res.message}")
    duals = np.abs(res.ineqlin.marginals)
    return res.x[:z_dim], float(res.x[z_dim]), duals


def chebyshev_center(P: Polytope) -> np.ndarray:
    """Center of the largest ball inscribed within the affine hull of P.

    Degenerate optimal faces (e.g. elongated boxes) are resolved by a
    deterministic lexicographic max-min-slack recursion: constraints active in
    the LP dual are pinned at the optimal slack and the minimum slack of the
    remainder is maximized again. On boxes this lands on the symmetric center.
    """
    hull = affine_hull(P)
    if hull.dim == 0:
        x = hull.origin
        if not P.contains(x, 1e-7):
            raise GeometryError("chebyshev center: empty polytope (point infeasible)")
        return x

    # Reduce to hull coordinates z, keeping original-facet norms for slack units.
    G = P.A @ hull.basis
    h = P.b - P.A @ hull.origin
    norms = np.linalg.norm(G, axis=1)
    keep = norms > 1e-12
    if np.any(h[~keep] < -1e-9):
        raise GeometryError("chebyshev center: empty polytope (constant row violated)")
    G, h, norms = G[keep], h[keep], norms[keep]

    basis = hull.basis
    center = hull.origin.copy()
    r_prev = -np.inf
    for _ in range(hull.dim + 1):
        if G.shape[0] == 0 or basis.shape[1] == 0:
            break
        w, r, duals = _chebyshev_stage(G, h, norms, basis.shape[1])
        # Fold the found center into the offset so w = 0 is the current center.
        center = center + basis @ w
        h = h - G @ w
        active = duals > 1e-9
        if r <= r_prev + 1e-12 or not np.any(active):
            break
        r_prev = r
        # Active rows sit at slack exactly r; pin them (G_a w = 0) and
        # re-maximize the minimum slack of the remaining rows on that subspace.
        N = null_space(G[active])
        if N.size == 0:
            break
        G = G[~active] @ N
        h = h[~active]
        norms = norms[~active]
        basis = basis @ N
        keep = np.linalg.norm(G, axis=1) > 1e-12
        G, h, norms = G[keep], h[keep], norms[keep]

    return center


def bounding_box(P: Polytope):
    """Tight axis-aligned bounds (lo, hi) via one LP pair per coordinate."""
    lo = np.empty(P.dim)
    hi = np.empty(P.dim)
    for i in range(P.dim):
        for sign, out in ((1.0, lo), (-1.0, hi)):
            c = np.zeros(P.dim)
            c[i] = sign
            res = linprog(
                c,
                A_ub=P.A if P.num_ineq else None,
                b_ub=P.b if P.num_ineq else None,
                A_eq=P.E if P.num_eq else None,
                b_eq=P.f if P.num_eq else None,
                bounds=[(None, None)] * P.dim,
                method="highs",
            )
            if res.status == 3:
                raise GeometryError(f"bounding box: unbounded along coordinate {i}")
            if res.status != 0:
                raise GeometryError(f"bounding box LP failed (status {res.status})")
            out[i] = sign * res.fun
    return lo, hi
