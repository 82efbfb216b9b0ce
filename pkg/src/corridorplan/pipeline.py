"""End-to-end experiment pipeline: plan, refine, retime, report.

For each start/goal pair: pick the set sequence on the shared graph, solve
the convex restriction for surrogate-optimal control points, refine them
with projected gradient descent against the true objective, then retime
both paths.  Per-pair failures are recorded as error rows and the run
continues.  Everything is deterministic under a fixed seed; the CSV schema
deliberately excludes wall-clock columns so reports are byte-stable.
"""

from __future__ import annotations

import csv
import io
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .bezier import PathLayout, sample_path
from .corridor import (
    CorridorError,
    RestrictionProblem,
    build_graph,
    discrete_path,
    solve_restriction,
    surrogate_cost,
)
from .geom import GeometryError, affine_hull
from .metrics import MetricError, imbalance, relative_error_slerp
from .objectives import (
    ObjectiveError,
    curvature_softmax,
    sampled_length,
    undistorted_length,
    weighted_sum,
)
from .parametrizations import ParamError
from .pgd import PGDError, pgd_solve
from .qp import SolverError
from .retime import RetimeError, duration_of
from .scenario import Scenario, ScenarioError, resolve_pairs

# dense sampling used for report metrics, independent of the objective's k
K_METRIC_SAMPLES = 50

CSV_COLUMNS = [
    "pair",
    "status",
    "sequence",
    "surrogate_cost",
    "initial_objective",
    "refined_objective",
    "length_before",
    "length_after",
    "duration_before",
    "duration_after",
    "imbalance_before",
    "imbalance_after",
    "slerp_error_before",
    "slerp_error_after",
    "iterations",
    "termination",
    "qp_projections",
    "affine_only_projections",
    "feasible",
    "error",
]

_NAN = float("nan")

__all__ = [
    "K_METRIC_SAMPLES",
    "CSV_COLUMNS",
    "PairRow",
    "RunReport",
    "run_scenario",
    "write_csv",
    "csv_text",
    "summarize",
]


@dataclass
class PairRow:
    pair: int
    start: np.ndarray
    goal: np.ndarray
    status: str = "ok"
    error: str = ""
    sequence: tuple = ()
    surrogate_cost: float = _NAN
    initial_objective: float = _NAN
    refined_objective: float = _NAN
    length_before: float = _NAN
    length_after: float = _NAN
    duration_before: float = _NAN
    duration_after: float = _NAN
    imbalance_before: float = None
    imbalance_after: float = None
    slerp_error_before: float = None
    slerp_error_after: float = None
    iterations: int = 0
    termination: str = ""
    qp_projections: int = 0
    affine_only_projections: int = 0
    feasible: bool = False
    time_plan: float = 0.0
    time_refine: float = 0.0
    time_retime: float = 0.0
    paths: tuple = field(default=(), repr=False)  # (before, after), not serialized


@dataclass
class RunReport:
    scenario_name: str
    rows: list

    @property
    def failed(self) -> int:
        return sum(1 for r in self.rows if r.status != "ok")

    @property
    def termination_counts(self) -> dict:
        counts = {}
        for r in self.rows:
            if r.status == "ok":
                counts[r.termination] = counts.get(r.termination, 0) + 1
        return counts


def _build_objective(scn: Scenario, param, layout):
    parts, weights = [], []
    for comp, w in zip(scn.objective.components, scn.objective.weights):
        if w == 0.0:
            continue
        if comp == "undistorted_length":
            parts.append(undistorted_length(param, layout, k=scn.samples))
        else:
            parts.append(curvature_softmax(layout, k=scn.samples, beta=scn.objective.beta))
        weights.append(w)
    if len(parts) == 1 and weights[0] == 1.0:
        return parts[0]
    return weighted_sum(parts, weights)


def _c_samples(path, param):
    pts = np.array([p for _, _, p in sample_path(path, K_METRIC_SAMPLES)])
    return param.map_batch(pts)


def _solve_pair(idx, start, goal, scn, sets, graph, param, limits, cfg):
    row = PairRow(pair=idx, start=start, goal=goal)
    t0 = time.perf_counter()
    seq = discrete_path(graph, start, goal)
    row.sequence = tuple(seq)
    expanded = [i for i in seq for _ in range(scn.segments_per_set)]
    problem = RestrictionProblem(
        sequence=tuple(sets[i] for i in expanded),
        start=start,
        goal=goal,
        degree=scn.degree,
        continuity_order=scn.continuity,
    )
    stacked, x_qp, _ = solve_restriction(problem)
    row.time_plan = time.perf_counter() - t0
    row.surrogate_cost = surrogate_cost(stacked, x_qp)

    layout = PathLayout(num_segments=len(expanded), degree=scn.degree, dim=scn.dim_q)
    obj = _build_objective(scn, param, layout)
    row.initial_objective = obj.value(x_qp)

    t1 = time.perf_counter()
    hull = affine_hull(stacked.polytope)
    res = pgd_solve(obj, stacked, hull, x_qp, cfg)
    row.time_refine = time.perf_counter() - t1
    row.refined_objective = obj.value(res.x_best)
    row.iterations = res.iterations
    row.termination = res.termination
    row.qp_projections = res.qp_projections
    row.affine_only_projections = res.affine_only_projections
    row.feasible = stacked.polytope.contains(res.x_best, 1e-6)

    row.length_before = sampled_length(param, layout, x_qp, k=K_METRIC_SAMPLES)
    row.length_after = sampled_length(param, layout, res.x_best, k=K_METRIC_SAMPLES)
    path_before = stacked.to_path(x_qp)
    path_after = stacked.to_path(res.x_best)
    row.paths = (path_before, path_after)

    t2 = time.perf_counter()
    row.duration_before = duration_of(path_before, param, limits)
    row.duration_after = duration_of(path_after, param, limits)
    row.time_retime = time.perf_counter() - t2

    if scn.controlled_coords:
        row.imbalance_before = imbalance(_c_samples(path_before, param), scn.controlled_coords)
        row.imbalance_after = imbalance(_c_samples(path_after, param), scn.controlled_coords)
    if scn.parametrization.id == "euler_xyz":
        q_s, q_g = param.map(start), param.map(goal)
        row.slerp_error_before = relative_error_slerp(row.length_before, q_s, q_g)
        row.slerp_error_after = relative_error_slerp(row.length_after, q_s, q_g)
    return row


def run_scenario(scn: Scenario, seed=None, pairs=None, max_iters=None,
                 k_samples=None) -> RunReport:
    """Run every pair of a scenario; errors become rows, not aborts."""
    if k_samples is not None:
        scn = scn.model_copy(update={"samples": int(k_samples)})
    param = scn.build_param()
    sets = scn.build_sets()
    limits = scn.build_limits()
    cfg = scn.pgd.to_config(max_iters=max_iters)
    graph = build_graph(sets)
    pair_list = resolve_pairs(scn, sets, param, seed=seed, count=pairs)
    rows = []
    for idx, (start, goal) in enumerate(pair_list):
        try:
            rows.append(_solve_pair(idx, start, goal, scn, sets, graph, param, limits, cfg))
        except (CorridorError, SolverError, PGDError, ObjectiveError, ParamError,
                RetimeError, MetricError, ScenarioError, GeometryError) as exc:
            rows.append(PairRow(pair=idx, start=start, goal=goal, status="error",
                                error=f"{type(exc).__name__}: {exc}"))
    return RunReport(scenario_name=scn.name, rows=rows)


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return "" if math.isnan(value) else format(value, ".9g")
    if isinstance(value, tuple):
        return "|".join(str(v) for v in value)
    return str(value)


def write_csv(report: RunReport, target) -> None:
    """One row per pair, 9 significant digits, stable column order."""
    own = isinstance(target, str)
    fh = open(target, "w", newline="") if own else target
    try:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for r in report.rows:
            writer.writerow([_fmt(getattr(r, col)) for col in CSV_COLUMNS])
    finally:
        if own:
            fh.close()


def csv_text(report: RunReport) -> str:
    buf = io.StringIO()
    write_csv(report, buf)
    return buf.getvalue()


def _mean(values):
    vals = [v for v in values if v is not None and not math.isnan(v)]
    return float(np.mean(vals)) if vals else None


def summarize(report: RunReport) -> dict:
    ok = [r for r in report.rows if r.status == "ok"]
    out = {
        "scenario": report.scenario_name,
        "pairs": len(report.rows),
        "failed": report.failed,
        "terminations": report.termination_counts,
        "mean_length_before": _mean(r.length_before for r in ok),
        "mean_length_after": _mean(r.length_after for r in ok),
        "mean_duration_before": _mean(r.duration_before for r in ok),
        "mean_duration_after": _mean(r.duration_after for r in ok),
    }
    slerp_b = _mean(r.slerp_error_before for r in ok)
    if slerp_b is not None:
        out["mean_slerp_error_before"] = slerp_b
        out["mean_slerp_error_after"] = _mean(r.slerp_error_after for r in ok)
    imb_b = _mean(abs(r.imbalance_before) for r in ok if r.imbalance_before is not None)
    if imb_b is not None:
        out["mean_abs_imbalance_before"] = imb_b
        out["mean_abs_imbalance_after"] = _mean(
            abs(r.imbalance_after) for r in ok if r.imbalance_after is not None
        )
    return out
