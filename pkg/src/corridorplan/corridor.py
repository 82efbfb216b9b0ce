"""Corridor graphs and the convex restriction over a fixed set sequence.

A corridor is a collection of convex sets whose pairwise intersections
form an undirected graph.  A discrete shortest-path search picks the set
sequence; the restriction then optimizes Bezier control points inside
that sequence, with continuity and endpoint pinning expressed as one
stacked polytope (which is also what the refinement loop projects onto).
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .bezier import BezierSegment, CompositePath, num_stacked_points
from .geom import Polytope, chebyshev_center, intersect, is_empty
from .qp import AdmmSolver, QuadProgram, SolveReport

__all__ = [
    "CorridorError",
    "SetGraph",
    "RestrictionProblem",
    "StackedFeasibleSet",
    "build_graph",
    "discrete_path",
    "stack_feasible",
    "solve_restriction",
    "convex_restriction",
]


class CorridorError(ValueError):
    """Unreachable queries, inconsistent problems, or solver failures."""


@dataclass(frozen=True)
class SetGraph:
    """Undirected intersection graph over convex sets.

    edges hold (i, j) with i < j; edge_weights[k] is the Euclidean
    distance between the Chebyshev centers of edge k's endpoints.
    """

    vertices: tuple
    edges: tuple
    edge_weights: np.ndarray
    centers: np.ndarray

    @property
    def num_vertices(self) -> int:
        return len(self.vertices)


def build_graph(sets, tol: float = 1e-7) -> SetGraph:
    """Connect every pair of sets whose intersection is nonempty."""
    sets = tuple(sets)
    if not sets:
        raise CorridorError("need at least one set")
    dim = sets[0].dim
    for P in sets:
        if P.dim != dim:
            raise CorridorError("sets have mixed ambient dimensions")
    centers = np.array([chebyshev_center(P) for P in sets])
    edges, weights = [], []
    for i in range(len(sets)):
        for j in range(i + 1, len(sets)):
            if not is_empty(intersect(sets[i], sets[j]), tol=tol):
                edges.append((i, j))
                weights.append(float(np.linalg.norm(centers[i] - centers[j])))
    return SetGraph(vertices=sets, edges=tuple(edges),
                    edge_weights=np.asarray(weights), centers=centers)


def discrete_path(graph: SetGraph, start, goal) -> list:
    """Minimum-weight set sequence from a start point to a goal point.

    Virtual endpoint nodes connect to every containing set, weighted by
    the distance from the query point to that set's center.  Ties break
    toward the lowest vertex index.
    """
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    n = graph.num_vertices
    start_sets = [i for i, P in enumerate(graph.vertices) if P.contains(start)]
    goal_sets = [i for i, P in enumerate(graph.vertices) if P.contains(goal)]
    if not start_sets:
        raise CorridorError("start point lies in no set")
    if not goal_sets:
        raise CorridorError("goal point lies in no set")

    adj = [[] for _ in range(n + 2)]  # n = virtual start, n+1 = virtual goal
    for (i, j), w in zip(graph.edges, graph.edge_weights):
        adj[i].append((j, w))
        adj[j].append((i, w))
    for i in start_sets:
        adj[n].append((i, float(np.linalg.norm(start - graph.centers[i]))))
    for i in goal_sets:
        adj[i].append((n + 1, float(np.linalg.norm(goal - graph.centers[i]))))

    dist = np.full(n + 2, np.inf)
    prev = np.full(n + 2, -1, dtype=int)
    dist[n] = 0.0
    heap = [(0.0, n)]
    done = np.zeros(n + 2, dtype=bool)
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == n + 1:
            break
        for v, w in adj[u]:
            if d + w < dist[v]:
                dist[v] = d + w
                prev[v] = u
                heapq.heappush(heap, (d + w, v))
    if not np.isfinite(dist[n + 1]):
        raise CorridorError("no set sequence connects start to goal")
    seq, u = [], prev[n + 1]
    while u != n:
        seq.append(int(u))
        u = prev[u]
    return seq[::-1]


@dataclass(frozen=True)
class RestrictionProblem:
    """Fixed set sequence with pinned endpoints and a curve degree."""

    sequence: tuple
    start: np.ndarray
    goal: np.ndarray
    degree: int = 3
    continuity_order: int = 0

    def __post_init__(self):
        seq = tuple(self.sequence)
        start = np.asarray(self.start, dtype=float)
        goal = np.asarray(self.goal, dtype=float)
        object.__setattr__(self, "sequence", seq)
        object.__setattr__(self, "start", start)
        object.__setattr__(self, "goal", goal)
        if not seq:
            raise CorridorError("empty set sequence")
        if self.degree < 1:
            raise CorridorError("degree must be at least 1")
        if self.continuity_order not in (0, 1):
            raise CorridorError("continuity order must be 0 or 1")
        if not seq[0].contains(start, tol=1e-7):
            raise CorridorError("start point outside the first set")
        if not seq[-1].contains(goal, tol=1e-7):
            raise CorridorError("goal point outside the last set")
        for a, b in zip(seq, seq[1:]):
            if is_empty(intersect(a, b)):
                raise CorridorError("consecutive sets do not intersect")

    @property
    def dim(self) -> int:
        return self.sequence[0].dim


@dataclass(frozen=True)
class StackedFeasibleSet:
    """All control points of all segments, as one polytope.

    Layout: segment-major then point-major; the vector has
    num_segments * (degree + 1) * dim entries.  C0 (and optionally C1)
    junction conditions and the endpoint pins sit in the equality block.
    """

    polytope: Polytope
    num_segments: int
    degree: int
    dim: int

    @property
    def size(self) -> int:
        return num_stacked_points(self.num_segments, self.degree) * self.dim

    def unflatten(self, x) -> np.ndarray:
        return np.asarray(x, dtype=float).reshape(
            self.num_segments, self.degree + 1, self.dim)

    def flatten(self, points) -> np.ndarray:
        return np.asarray(points, dtype=float).reshape(-1)

    def to_path(self, x) -> CompositePath:
        # junction pairs may disagree by the solver residual; average them
        # so the path meets the 1e-8 continuity contract
        pts = self.unflatten(x).copy()
        for i in range(self.num_segments - 1):
            mid = 0.5 * (pts[i, -1] + pts[i + 1, 0])
            pts[i, -1] = mid
            pts[i + 1, 0] = mid
        return CompositePath([BezierSegment(p) for p in pts])


def stack_feasible(problem: RestrictionProblem) -> StackedFeasibleSet:
    """Assemble the feasibility polytope over all stacked control points."""
    seq, d, n = problem.sequence, problem.degree, problem.dim
    S = len(seq)
    w = (d + 1) * n  # variables per segment
    size = S * w

    A_rows, b_rows, E_rows, f_rows = [], [], [], []
    for i, P in enumerate(seq):
        for j in range(d + 1):
            col = i * w + j * n
            if P.num_ineq:
                A = np.zeros((P.num_ineq, size))
                A[:, col:col + n] = P.A
                A_rows.append(A)
                b_rows.append(P.b)
            if P.num_eq:
                E = np.zeros((P.num_eq, size))
                E[:, col:col + n] = P.E
                E_rows.append(E)
                f_rows.append(P.f)

    def pin(col, value):
        E = np.zeros((n, size))
        E[:, col:col + n] = np.eye(n)
        E_rows.append(E)
        f_rows.append(np.asarray(value, dtype=float))

    pin(0, problem.start)
    pin((S - 1) * w + d * n, problem.goal)
    for i in range(S - 1):
        E = np.zeros((n, size))
        E[:, i * w + d * n:(i + 1) * w] = np.eye(n)  # last point of segment i
        E[:, (i + 1) * w:(i + 1) * w + n] -= np.eye(n)  # first point of i+1
        E_rows.append(E)
        f_rows.append(np.zeros(n))
        if problem.continuity_order >= 1:
            E = np.zeros((n, size))
            E[:, i * w + d * n:(i + 1) * w] = d * np.eye(n)
            E[:, i * w + (d - 1) * n:i * w + d * n] -= d * np.eye(n)
            E[:, (i + 1) * w + n:(i + 1) * w + 2 * n] -= d * np.eye(n)
            E[:, (i + 1) * w:(i + 1) * w + n] += d * np.eye(n)
            E_rows.append(E)
            f_rows.append(np.zeros(n))

    A = np.vstack(A_rows) if A_rows else np.zeros((0, size))
    b = np.concatenate(b_rows) if b_rows else np.zeros(0)
    E = np.vstack(E_rows)
    f = np.concatenate(f_rows)
    polytope = Polytope(A, b, E=E, f=f)
    return StackedFeasibleSet(polytope=polytope, num_segments=S, degree=d, dim=n)


def _surrogate_quadratic(S: int, d: int, n: int) -> np.ndarray:
    # sum of squared control-point differences within each segment:
    # x' (blockdiag D'D kron I) x with D the forward difference operator
    D = np.eye(d, d + 1, k=1) - np.eye(d, d + 1)
    block = np.kron(D.T @ D, np.eye(n))
    Q = np.zeros((S * block.shape[0], S * block.shape[0]))
    for i in range(S):
        lo = i * block.shape[0]
        Q[lo:lo + block.shape[0], lo:lo + block.shape[0]] = block
    return 2.0 * Q


def line_init(stacked: StackedFeasibleSet, start, goal) -> np.ndarray:
    """Stacked control points evenly spaced along the start-goal chord."""
    S, d = stacked.num_segments, stacked.degree
    start = np.asarray(start, dtype=float)
    goal = np.asarray(goal, dtype=float)
    ts = np.linspace(0.0, 1.0, S * d + 1)
    pts = np.empty((S, d + 1, stacked.dim))
    for i in range(S):
        for j in range(d + 1):
            t = ts[i * d + j]
            pts[i, j] = (1.0 - t) * start + t * goal
    return stacked.flatten(pts)


def surrogate_cost(stacked: StackedFeasibleSet, x) -> float:
    """Sum of squared adjacent control-point differences."""
    pts = stacked.unflatten(x)
    d = np.diff(pts, axis=1)
    return float(np.sum(d * d))


def solve_restriction(problem: RestrictionProblem, solver: AdmmSolver = None):
    """Optimize the stacked surrogate QP; returns (stacked set, x, report)."""
    stacked = stack_feasible(problem)
    P = stacked.polytope
    Q = _surrogate_quadratic(len(problem.sequence), problem.degree, problem.dim)
    prog = QuadProgram(Q, np.zeros(stacked.size), P.A, P.b, P.E, P.f)
    warm = line_init(stacked, problem.start, problem.goal)
    report = (solver or AdmmSolver()).solve(prog, warm_start=warm)
    if report.status == "infeasible":
        raise CorridorError(f"restriction is infeasible: {report}")
    if not P.contains(report.x_opt, tol=1e-6):
        raise CorridorError(f"restriction solve did not reach feasibility: {report}")
    return stacked, report.x_opt, report


def convex_restriction(problem: RestrictionProblem, solver: AdmmSolver = None) -> CompositePath:
    """Surrogate-optimal continuous path through the fixed set sequence."""
    stacked, x, _ = solve_restriction(problem, solver)
    return stacked.to_path(x)
