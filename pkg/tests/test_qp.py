import numpy as np
import pytest

from corridorplan.geom import Polytope
from corridorplan.qp import (
    AdmmSolver,
    PolytopeProjector,
    QuadProgram,
    SolverError,
    project_polytope,
    solve,
)


def box_program(Q, c, n):
    P = Polytope.box(-np.ones(n), np.ones(n))
    return QuadProgram(Q, c, P.A, P.b)


class TestQuadProgram:
    def test_asymmetric_q_rejected(self):
        with pytest.raises(SolverError):
            QuadProgram([[1.0, 0.5], [0.0, 1.0]], [0.0, 0.0])

    def test_indefinite_q_rejected(self):
        with pytest.raises(SolverError):
            QuadProgram([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0])

    def test_zero_q_is_fine(self):
        prog = QuadProgram(np.zeros((2, 2)), [1.0, 1.0], [[1.0, 0.0]], [1.0])
        assert prog.n == 2

    def test_shape_mismatch_rejected(self):
        with pytest.raises(SolverError):
            QuadProgram(np.eye(2), [0.0, 0.0], [[1.0, 0.0]], [1.0, 2.0])

    def test_nonfinite_rejected(self):
        with pytest.raises(SolverError):
            QuadProgram(np.eye(1), [np.nan])


class TestSolve:
    def test_scalar_active_bound(self):
        # min x^2 s.t. x >= 1
        rep = solve(QuadProgram([[2.0]], [0.0], [[-1.0]], [-1.0]))
        assert rep.status == "optimal"
        assert abs(rep.x_opt[0] - 1.0) <= 1e-6
        assert rep.primal_residual <= 1e-6 and rep.dual_residual <= 1e-6

    def test_face_projection(self):
        # min ||x - (2, 0)||^2 over the unit box
        rep = solve(box_program(2.0 * np.eye(2), [-4.0, 0.0], 2))
        assert rep.status == "optimal"
        assert np.allclose(rep.x_opt, [1.0, 0.0], atol=1e-6)

    def test_lp_vertex(self):
        # min x1 + x2 over the unit box
        rep = solve(box_program(np.zeros((2, 2)), [1.0, 1.0], 2))
        assert rep.status == "optimal"
        assert np.allclose(rep.x_opt, [-1.0, -1.0], atol=1e-6)

    def test_unconstrained(self):
        rep = solve(QuadProgram(2.0 * np.eye(3), [-2.0, 4.0, 0.0]))
        assert rep.status == "optimal"
        assert np.allclose(rep.x_opt, [1.0, -2.0, 0.0], atol=1e-6)

    def test_equality_only_matches_kkt(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            n, p = 6, 2
            B = rng.normal(size=(n, n))
            Q = B @ B.T + np.eye(n)  # strictly convex
            c = rng.normal(size=n)
            E = rng.normal(size=(p, n))
            f = rng.normal(size=p)
            rep = solve(QuadProgram(Q, c, E=E, f=f))
            kkt = np.block([[Q, E.T], [E, np.zeros((p, p))]])
            ref = np.linalg.solve(kkt, np.concatenate([-c, f]))[:n]
            assert rep.status == "optimal"
            assert np.linalg.norm(rep.x_opt - ref) <= 1e-6 * max(1.0, np.linalg.norm(ref))

    def test_infeasible_detected(self):
        # x <= -1 and x >= 1 cannot hold
        prog = QuadProgram([[2.0]], [0.0], [[1.0], [-1.0]], [-1.0, -1.0])
        rep = solve(prog)
        assert rep.status == "infeasible"

    def test_unbounded_lp_flagged(self):
        # min -x s.t. x >= 0 has no finite optimum
        rep = solve(QuadProgram([[0.0]], [-1.0], [[-1.0]], [0.0]))
        assert rep.status == "infeasible"

    def test_warm_start_preserves_solution(self):
        prog = box_program(2.0 * np.eye(2), [-4.0, 0.0], 2)
        cold = solve(prog)
        warm = solve(prog, warm_start=cold.x_opt)
        assert np.allclose(warm.x_opt, cold.x_opt, atol=1e-6)
        assert warm.iterations <= cold.iterations

    def test_deterministic(self):
        prog = box_program(2.0 * np.eye(2), [-4.0, -1.0], 2)
        a, b = solve(prog), solve(prog)
        assert np.array_equal(a.x_opt, b.x_opt)
        assert a.iterations == b.iterations

    def test_factorization_cache_reused(self):
        solver = AdmmSolver()
        P = Polytope.box(-np.ones(3), np.ones(3))
        Q = 2.0 * np.eye(3)
        prog1 = QuadProgram(Q, [-4.0, 0.0, 0.0], P.A, P.b)
        r1 = solver.solve(prog1)
        key = solver._key
        prog2 = QuadProgram(prog1.Q, [0.0, -4.0, 0.0], prog1.A, prog1.b)
        r2 = solver.solve(prog2)
        assert solver._key == key  # same Q/A objects, factorization reused
        assert np.allclose(r1.x_opt, [1.0, 0.0, 0.0], atol=1e-6)
        assert np.allclose(r2.x_opt, [0.0, 1.0, 0.0], atol=1e-6)


class TestProjectPolytope:
    def test_inside_point_returned_exactly(self):
        P = Polytope.box(-np.ones(2), np.ones(2))
        x0 = np.array([0.3, -0.7])
        assert np.array_equal(project_polytope(P, x0), x0)

    def test_corner_projection(self):
        P = Polytope.box(-np.ones(2), np.ones(2))
        assert np.allclose(project_polytope(P, [2.0, 2.0]), [1.0, 1.0], atol=1e-6)

    def test_facet_projection(self):
        P = Polytope([[1.0, 0.0]], [0.0])  # halfspace x1 <= 0
        assert np.allclose(project_polytope(P, [3.0, 4.0]), [0.0, 4.0], atol=1e-6)

    def test_empty_target_raises(self):
        P = Polytope([[1.0], [-1.0]], [-1.0, -1.0])
        with pytest.raises(SolverError):
            project_polytope(P, [0.0])

    def test_idempotence(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(1, 4))
            lo = rng.uniform(-2, 0, n)
            hi = rng.uniform(0.2, 2, n)
            cuts = rng.normal(size=(2, n))
            P = Polytope(np.vstack([np.eye(n), -np.eye(n), cuts]),
                         np.concatenate([hi, -lo, rng.uniform(0.5, 2.0, 2)]))
            x0 = rng.normal(size=n) * 3
            p1 = project_polytope(P, x0)
            p2 = project_polytope(P, p1)
            assert np.linalg.norm(p2 - p1) <= 1e-8

    def test_variational_inequality(self):
        rng = np.random.default_rng(3)
        P = Polytope.box(np.array([-1.0, -0.5]), np.array([0.5, 1.0]))
        x0 = np.array([2.0, -2.0])
        x_star = project_polytope(P, x0)
        for _ in range(100):
            z = rng.uniform([-1.0, -0.5], [0.5, 1.0])
            assert (x0 - x_star) @ (z - x_star) <= 1e-6

    def test_projection_with_equalities(self):
        # project onto the segment {x + y = 1, 0 <= x <= 1}
        P = Polytope([[1.0, 0.0], [-1.0, 0.0]], [1.0, 0.0], E=[[1.0, 1.0]], f=[1.0])
        p = project_polytope(P, [2.0, 2.0])
        assert np.allclose(p, [0.5, 0.5], atol=1e-6)
        p = project_polytope(P, [4.0, 0.0])
        assert np.allclose(p, [1.0, 0.0], atol=1e-6)

    def test_projector_reuse_matches_one_shot(self):
        P = Polytope.box(-np.ones(2), np.ones(2))
        proj = PolytopeProjector(P)
        pts = [[2.0, 2.0], [1.5, -3.0], [0.0, 5.0], [0.2, 0.2]]
        for x0 in pts:
            a = proj(x0)
            b = project_polytope(P, x0)
            assert np.allclose(a, b, atol=1e-6)
