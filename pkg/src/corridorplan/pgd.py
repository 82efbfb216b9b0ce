"""Projected gradient descent over a stacked feasibility polytope.

Steps follow the negative objective gradient; candidates are projected
back to feasibility before the Armijo test, so every accepted iterate is
feasible and the returned best iterate never degrades the initialization.
Projection is two-stage: a closed-form affine-hull projection handles the
equality block, and the quadratic program runs only when inequalities
remain violated.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .geom import AffineSubspace, project_affine
from .objectives import Objective
from .qp import PolytopeProjector, SolverError

__all__ = [
    "PGDError",
    "PGDConfig",
    "PGDResult",
    "ConvergenceTracker",
    "Projector",
    "pgd_solve",
]


class PGDError(ValueError):
    """Infeasible start, projection failure, or objective failure."""


@dataclass(frozen=True)
class PGDConfig:
    max_iters: int = 70
    window: int = 5
    rel_tol: float = 0.005
    armijo_c: float = 1e-4
    backtrack_factor: float = 0.5
    initial_step: float = None  # None: 1 / (1 + |grad| at the start point)
    max_backtracks: int = 30
    feas_tol: float = 1e-6

    def __post_init__(self):
        if not 0.0 < self.backtrack_factor < 1.0:
            raise PGDError("backtrack factor must lie in (0, 1)")
        if self.window < 1:
            raise PGDError("window must be at least 1")
        if self.rel_tol <= 0.0:
            raise PGDError("relative tolerance must be positive")
        if self.max_iters < 1 or self.max_backtracks < 0:
            raise PGDError("iteration limits out of range")


@dataclass
class PGDResult:
    x_best: np.ndarray
    cost_trace: list
    iterations: int
    termination: str  # converged | max_iters | line_search_stall
    qp_projections: int
    affine_only_projections: int
    wall_time: float = field(repr=False, default=0.0)


class ConvergenceTracker:
    """Moving-average stop rule: converged when the window mean moves
    by less than rel_tol relative to its previous value."""

    def __init__(self, window: int, rel_tol: float):
        self.window = window
        self.rel_tol = rel_tol
        self.values = []
        self._prev_avg = None

    def update(self, cost: float) -> bool:
        self.values.append(float(cost))
        avg = float(np.mean(self.values[-self.window:]))
        prev = self._prev_avg
        self._prev_avg = avg
        if prev is None:
            return False
        return abs(avg - prev) / max(abs(prev), 1e-12) < self.rel_tol


class Projector:
    """Two-stage feasibility projection with call counters."""

    def __init__(self, feasible, hull: AffineSubspace, feas_tol: float = 1e-6):
        self.polytope = feasible.polytope
        self.hull = hull
        self.feas_tol = feas_tol
        self.qp_projections = 0
        self.affine_only_projections = 0
        self._qp = PolytopeProjector(self.polytope, tol=feas_tol)

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        P, tol = self.polytope, self.feas_tol
        if P.contains(x, tol):
            self.affine_only_projections += 1
            return x, False
        p = project_affine(self.hull, x)
        ineq_ok = P.num_ineq == 0 or np.max(P.A @ p - P.b) <= tol
        if ineq_ok:
            self.affine_only_projections += 1
            return p, False
        self.qp_projections += 1
        try:
            return self._qp(x), True  # project the original point, not p
        except SolverError as exc:
            raise PGDError(f"projection failed: {exc}")


def pgd_solve(obj: Objective, feasible, hull: AffineSubspace, x0,
              cfg: PGDConfig = None) -> PGDResult:
    """Refine x0 against obj while staying inside the stacked polytope."""
    cfg = cfg or PGDConfig()
    t0 = time.perf_counter()
    proj = Projector(feasible, hull, cfg.feas_tol)
    x = np.asarray(x0, dtype=float)
    if not proj.polytope.contains(x, cfg.feas_tol):
        x, _ = proj(x)
        if not proj.polytope.contains(x, cfg.feas_tol):
            raise PGDError("start point infeasible even after projection")

    def evaluate(kind, fn, arg, it):
        try:
            return fn(arg)
        except PGDError:
            raise
        except ValueError as exc:
            raise PGDError(f"{kind} evaluation failed at iteration {it}: {exc}")

    cost = evaluate("objective", obj.value, x, 0)
    tracker = ConvergenceTracker(cfg.window, cfg.rel_tol)
    tracker.update(cost)
    best_x, best_cost = x.copy(), cost
    termination = "max_iters"
    iterations = 0
    step0 = cfg.initial_step
    for it in range(1, cfg.max_iters + 1):
        g = evaluate("gradient", obj.gradient, x, it)
        gnorm_sq = float(g @ g)
        if step0 is None:
            step0 = 1.0 / (1.0 + np.sqrt(gnorm_sq))
        s = step0
        accepted = False
        for _ in range(cfg.max_backtracks + 1):
            cand, _ = proj(x - s * g)
            cand_cost = evaluate("objective", obj.value, cand, it)
            if cand_cost <= cost - cfg.armijo_c * s * gnorm_sq:
                accepted = True
                break
            s *= cfg.backtrack_factor
        if not accepted:
            termination = "line_search_stall"
            break
        if not proj.polytope.contains(cand, cfg.feas_tol):
            raise PGDError(f"iterate left the feasible set at iteration {it}")
        x, cost = cand, cand_cost
        iterations = it
        if cost < best_cost:
            best_x, best_cost = x.copy(), cost
        if tracker.update(cost):
            termination = "converged"
            break
    return PGDResult(x_best=best_x, cost_trace=list(tracker.values),
                     iterations=iterations, termination=termination,
                     qp_projections=proj.qp_projections,
                     affine_only_projections=proj.affine_only_projections,
                     wall_time=time.perf_counter() - t0)
