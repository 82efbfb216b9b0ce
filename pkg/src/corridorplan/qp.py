"""Dense convex QP/LP solving via operator splitting.

Programs here are small (stacked control points, at most a few hundred
variables), so everything stays dense: a cached Cholesky factorization of
the splitting normal matrix, over-relaxed iterations, and an active-set
refinement pass once the iterates settle.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .geom import Polytope, _freeze

__all__ = [
    "SolverError",
    "QuadProgram",
    "SolveReport",
    "AdmmSolver",
    "PolytopeProjector",
    "solve",
    "project_polytope",
]


class SolverError(ValueError):
    """Malformed program, or a projection onto an empty set."""


def _is_psd(Q: np.ndarray) -> bool:
    # jitter absorbs roundoff-level negative eigenvalues only
    if Q.size == 0:
        return True
    d = np.diagonal(Q)
    if not np.any(Q - np.diag(d)):  # diagonal fast path (identity, zero, ...)
        return bool(np.all(d >= -1e-10))
    jitter = 1e-10 * max(1.0, float(np.max(np.abs(Q))))
    try:
        np.linalg.cholesky(Q + jitter * np.eye(Q.shape[0]))
    except np.linalg.LinAlgError:
        return False
    return True


@dataclass(frozen=True)
class QuadProgram:
    """min (1/2) x'Qx + c'x  subject to  A x <= b  and  E x = f.

    Q = 0 is allowed and gives an LP.  Arrays are copied and frozen, so a
    program can be shared and its identity used as a cache key.
    """

    Q: np.ndarray
    c: np.ndarray
    A: np.ndarray | None = None
    b: np.ndarray | None = None
    E: np.ndarray | None = None
    f: np.ndarray | None = None

    def __post_init__(self):
        Q = np.atleast_2d(np.asarray(self.Q, dtype=float))
        c = np.atleast_1d(np.asarray(self.c, dtype=float))
        n = c.shape[0]
        if Q.shape != (n, n):
            raise SolverError(f"Q shape {Q.shape} does not match c ({n})")
        if Q.size and np.max(np.abs(Q - Q.T)) > 1e-10:
            raise SolverError("Q must be symmetric")
        if not _is_psd(Q):
            raise SolverError("Q must be positive semidefinite")
        A = np.zeros((0, n)) if self.A is None else np.atleast_2d(np.asarray(self.A, float))
        b = np.zeros(0) if self.b is None else np.atleast_1d(np.asarray(self.b, float))
        E = np.zeros((0, n)) if self.E is None else np.atleast_2d(np.asarray(self.E, float))
        f = np.zeros(0) if self.f is None else np.atleast_1d(np.asarray(self.f, float))
        if A.shape != (b.shape[0], n):
            raise SolverError(f"inequality block {A.shape} vs b {b.shape} mismatch")
        if E.shape != (f.shape[0], n):
            raise SolverError(f"equality block {E.shape} vs f {f.shape} mismatch")
        for name, arr in (("Q", Q), ("c", c), ("A", A), ("b", b), ("E", E), ("f", f)):
            if not np.all(np.isfinite(arr)):
                raise SolverError(f"{name} contains non-finite entries")
            object.__setattr__(self, name, _freeze(arr))

    @property
    def n(self) -> int:
        return self.c.shape[0]


@dataclass
class SolveReport:
    x_opt: np.ndarray
    objective: float
    primal_residual: float
    dual_residual: float
    iterations: int
    status: str  # optimal | max_iter | infeasible
    y: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        assert self.status in ("optimal", "max_iter", "infeasible")


class AdmmSolver:
    """Operator-splitting solver with fixed penalty and over-relaxation.

    The factorization of Q + sigma*I + M' R M is cached and reused while
    consecutive programs share the same (frozen) Q/A/E arrays, which is
    the common case when only the linear term or right-hand sides change
    between solves.  One solve at a time per instance.
    """

    def __init__(self, sigma: float = 1e-6, rho: float = 0.1, alpha: float = 1.6,
                 eps: float = 1e-6, max_iters: int = 20000, check_every: int = 5,
                 eps_infeas: float = 1e-6):
        self.sigma = sigma
        self.rho = rho
        self.alpha = alpha
        self.eps = eps
        self.max_iters = max_iters
        self.check_every = check_every
        self.eps_infeas = eps_infeas
        self._key = None

    # -- setup ---------------------------------------------------------

    @staticmethod
    def _block_key(arr):
        # empty blocks never affect the factorization, so key them by shape
        return id(arr) if arr.size else arr.shape

    def _setup(self, prog: QuadProgram):
        key = (self._block_key(prog.Q), self._block_key(prog.A), self._block_key(prog.E))
        if key == self._key:
            return
        M = np.vstack([prog.A, prog.E])
        rho_vec = np.full(M.shape[0], self.rho)
        rho_vec[prog.A.shape[0]:] *= 1000.0  # stiffer penalty on equality rows
        K = prog.Q + self.sigma * np.eye(prog.n) + (M * rho_vec[:, None]).T @ M
        try:
            chol = cho_factor(K)
        except np.linalg.LinAlgError:
            raise SolverError("splitting matrix is not positive definite")
        self._M, self._rho_vec, self._chol = M, rho_vec, chol
        self._n_ineq = prog.A.shape[0]
        self._key = key

    # -- divergence certificates --------------------------------------

    def _primal_cert(self, lb, ub, dy) -> bool:
        nrm = np.max(np.abs(dy), initial=0.0)
        if nrm <= 1e-12:
            return False
        e = self.eps_infeas * nrm
        if np.max(np.abs(self._M.T @ dy), initial=0.0) > e:
            return False
        dy = np.where(np.abs(dy) <= 1e-10 * nrm, 0.0, dy)
        neg = dy < 0.0
        if np.any(neg & np.isinf(lb)):  # pushing on a bound that does not exist
            return False
        pos = np.maximum(dy, 0.0)
        gap = ub @ pos + lb[neg] @ dy[neg]
        return gap <= -e

    def _dual_cert(self, prog, lb, dx) -> bool:
        nrm = np.max(np.abs(dx), initial=0.0)
        if nrm <= 1e-12:
            return False
        e = self.eps_infeas * nrm
        if np.max(np.abs(prog.Q @ dx), initial=0.0) > e:
            return False
        if prog.c @ dx > -e:
            return False
        Mdx = self._M @ dx
        if np.max(Mdx, initial=0.0) > e:  # every row has a finite upper bound
            return False
        if np.min(Mdx[np.isfinite(lb)], initial=0.0) < -e:
            return False
        return True

    # -- active-set refinement ----------------------------------------

    def _polish(self, prog, lb, ub, x, y, r_prim, r_dual):
        M, n, m = self._M, prog.n, self._M.shape[0]
        eq = np.zeros(m, dtype=bool)
        eq[self._n_ineq:] = True
        low = (y < -1e-9) & np.isfinite(lb)
        upp = y > 1e-9
        act = low | upp | eq
        k = int(np.count_nonzero(act))
        G = M[act]
        g = np.where(upp, ub, np.where(low, lb, ub))[act]
        delta = 1e-9
        KKT = np.zeros((n + k, n + k))
        KKT[:n, :n] = prog.Q + delta * np.eye(n)
        KKT[:n, n:] = G.T
        KKT[n:, :n] = G
        KKT[n:, n:] = -delta * np.eye(k)
        rhs = np.concatenate([-prog.c, g])
        try:
            sol = np.linalg.solve(KKT, rhs)
            K0 = KKT.copy()
            K0[:n, :n] -= delta * np.eye(n)
            K0[n:, n:] += delta * np.eye(k)
            for _ in range(2):  # refine against the unregularized system
                sol = sol + np.linalg.solve(KKT, rhs - K0 @ sol)
        except np.linalg.LinAlgError:
            return None
        x_p = sol[:n]
        y_p = np.zeros(m)
        y_p[act] = sol[n:]
        if np.any(y_p[low] > 1e-8) or np.any(y_p[upp & ~eq] < -1e-8):
            return None  # active-set guess was wrong
        Mx = M @ x_p
        r_p = max(np.max(Mx - ub, initial=0.0), np.max(lb - Mx, initial=0.0))
        r_d = np.max(np.abs(prog.Q @ x_p + prog.c + M.T @ y_p), initial=0.0)
        if r_p <= max(self.eps, r_prim) and r_d <= max(self.eps, r_dual):
            return x_p, y_p, r_p, r_d
        return None

    # -- main loop -----------------------------------------------------

    def solve(self, prog: QuadProgram, warm_start=None) -> SolveReport:
        self._setup(prog)
        M, rho = self._M, self._rho_vec
        n, m = prog.n, M.shape[0]
        lb = np.concatenate([np.full(self._n_ineq, -np.inf), prog.f])
        ub = np.concatenate([prog.b, prog.f])
        if warm_start is None:
            x = np.zeros(n)
        else:
            x = np.array(warm_start, dtype=float)
            if x.shape != (n,):
                raise SolverError(f"warm start shape {x.shape}, expected ({n},)")
        Mx = M @ x
        z = np.clip(Mx, lb, ub)
        y = np.zeros(m)
        status = "max_iter"
        iters = self.max_iters
        best = (np.inf, x, y, np.inf, np.inf)
        r_prim = r_dual = np.inf
        for it in range(1, self.max_iters + 1):
            x_prev, y_prev = x, y
            rhs = self.sigma * x - prog.c + M.T @ (rho * z - y)
            x_hat = cho_solve(self._chol, rhs)
            z_hat = M @ x_hat
            x = self.alpha * x_hat + (1.0 - self.alpha) * x
            Mx = self.alpha * z_hat + (1.0 - self.alpha) * Mx
            zr = self.alpha * z_hat + (1.0 - self.alpha) * z
            z = np.clip(zr + y / rho, lb, ub)
            y = y + rho * (zr - z)
            if it % self.check_every == 0 or it == self.max_iters:
                r_prim = np.max(np.abs(Mx - z), initial=0.0)
                r_dual = np.max(np.abs(prog.Q @ x + prog.c + M.T @ y), initial=0.0)
                crit = max(r_prim, r_dual)
                if crit < best[0]:
                    best = (crit, x, y, r_prim, r_dual)
                if r_prim <= self.eps and r_dual <= self.eps:
                    status, iters = "optimal", it
                    break
                if self._primal_cert(lb, ub, y - y_prev) or \
                        self._dual_cert(prog, lb, x - x_prev):
                    status, iters = "infeasible", it
                    break
        if status == "max_iter":
            _, x, y, r_prim, r_dual = best
        if status == "optimal":
            polished = self._polish(prog, lb, ub, x, y, r_prim, r_dual)
            if polished is not None:
                x, y, r_prim, r_dual = polished
        obj = 0.5 * x @ prog.Q @ x + prog.c @ x
        return SolveReport(x_opt=x, objective=float(obj), primal_residual=float(r_prim),
                           dual_residual=float(r_dual), iterations=iters, status=status,
                           y=y)


def solve(prog: QuadProgram, warm_start=None) -> SolveReport:
    """One-shot convenience wrapper around a fresh solver instance."""
    return AdmmSolver().solve(prog, warm_start)


class PolytopeProjector:
    """Repeated nearest-point projections onto one fixed polytope.

    Reuses the solver factorization across calls and warm-starts each
    solve from the previous projection, which is what the refinement
    loop wants: successive query points move slowly.
    """

    def __init__(self, P: Polytope, tol: float = 1e-6):
        self.P = P
        self.tol = tol
        self._Q = _freeze(2.0 * np.eye(P.dim))
        self._solver = AdmmSolver()
        self._warm = None

    def __call__(self, x0) -> np.ndarray:
        x0 = np.asarray(x0, dtype=float)
        if self.P.contains(x0, self.tol):
            return x0.copy()
        P = self.P
        prog = QuadProgram(self._Q, -2.0 * x0, P.A, P.b, P.E, P.f)
        rep = self._solver.solve(prog, warm_start=self._warm if self._warm is not None else x0)
        if rep.status == "infeasible":
            raise SolverError("projection target is empty")
        self._warm = rep.x_opt
        return rep.x_opt


def project_polytope(P: Polytope, x0, tol: float = 1e-6) -> np.ndarray:
    """Closest point in P to x0; returns x0 unchanged when already inside."""
    return PolytopeProjector(P, tol)(x0)
