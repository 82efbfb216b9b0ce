import numpy as np
import pytest

from corridorplan.geom import (
    AffineSubspace,
    GeometryError,
    Polytope,
    affine_hull,
    chebyshev_center,
    intersect,
    is_empty,
    project_affine,
)


def unit_box(n=2):
    return Polytope.box(-np.ones(n), np.ones(n))


class TestPolytope:
    def test_row_count_mismatch_rejected(self):
        with pytest.raises(GeometryError):
            Polytope(np.eye(2), np.zeros(3))

    def test_equality_block_mismatch_rejected(self):
        with pytest.raises(GeometryError):
            Polytope(np.eye(2), np.zeros(2), E=np.eye(2), f=np.zeros(1))

    def test_no_equalities_stored_as_empty_block(self):
        P = unit_box()
        assert P.E.shape == (0, 2)
        assert P.f.shape == (0,)

    def test_arrays_immutable(self):
        P = unit_box()
        with pytest.raises(ValueError):
            P.A[0, 0] = 5.0


class TestContains:
    def test_interior_point(self):
        assert unit_box().contains((0.0, 0.0), tol=0.0)

    def test_violated_facet(self):
        assert not unit_box().contains((1.0 + 1e-3, 0.0), tol=1e-6)

    def test_boundary_is_feasible(self):
        assert unit_box().contains((1.0, 1.0), tol=0.0)

    def test_equality_checked_both_sides(self):
        P = Polytope(np.zeros((0, 2)), np.zeros(0), E=[[1.0, 0.0]], f=[0.5])
        assert P.contains((0.5, 9.0), tol=0.0)
        assert not P.contains((0.5 + 1e-5, 0.0), tol=1e-6)

    def test_dimension_mismatch(self):
        with pytest.raises(GeometryError):
            unit_box().contains((0.0, 0.0, 0.0))


class TestIntersect:
    def test_interval_overlap(self):
        P = Polytope.box([-1.0], [1.0])
        Q = Polytope.box([0.0], [2.0])
        R = intersect(P, Q)
        assert R.contains([0.5])
        assert R.contains([0.0]) and R.contains([1.0])
        assert not R.contains([-0.5], tol=1e-9)
        assert not R.contains([1.5], tol=1e-9)

    def test_self_intersection_same_member_set(self):
        P = unit_box()
        R = intersect(P, P)
        rng = np.random.default_rng(0)
        for x in rng.uniform(-2, 2, size=(200, 2)):
            assert R.contains(x, 1e-9) == P.contains(x, 1e-9)

    def test_disjoint_intervals_empty(self):
        P = Polytope.box([-1.0], [0.0])
        Q = Polytope.box([1.0], [2.0])
        assert is_empty(intersect(P, Q))

    def test_dimension_mismatch(self):
        with pytest.raises(GeometryError):
            intersect(unit_box(2), Polytope.box([0.0], [1.0]))

    def test_commutative_membership(self):
        rng = np.random.default_rng(7)
        A = rng.normal(size=(5, 2))
        P = Polytope(A, rng.uniform(0.5, 2.0, 5))
        Q = unit_box()
        PQ, QP = intersect(P, Q), intersect(Q, P)
        pts = rng.uniform(-2, 2, size=(1000, 2))
        for x in pts:
            assert PQ.contains(x, 1e-9) == QP.contains(x, 1e-9)


class TestIsEmpty:
    def test_interval_nonempty(self):
        assert not is_empty(Polytope.box([0.0], [1.0]))

    def test_contradictory_halfspaces_empty(self):
        P = Polytope([[1.0], [-1.0]], [-1.0, -1.0])  # x <= -1 and x >= 1
        assert is_empty(P)

    def test_equality_thin_set_nonempty(self):
        P = Polytope([[1.0], [-1.0]], [0.5, -0.5])  # x = 0.5 as two inequalities
        assert not is_empty(P)


class TestAffineHull:
    def test_full_space_when_no_equalities(self):
        S = affine_hull(unit_box(3))
        assert S.basis.shape == (3, 3)
        assert np.allclose(S.basis.T @ S.basis, np.eye(3), atol=1e-10)

    def test_line_in_plane(self):
        P = Polytope(np.zeros((0, 2)), np.zeros(0), E=[[1.0, 1.0]], f=[1.0])
        S = affine_hull(P)
        assert S.dim == 1
        assert np.allclose(S.origin, [0.5, 0.5], atol=1e-12)
        for z in (-3.0, 0.0, 2.5):
            x = S.origin + S.basis[:, 0] * z
            assert abs(x.sum() - 1.0) <= 1e-8

    def test_single_point(self):
        c = np.array([1.0, -2.0])
        P = Polytope(np.zeros((0, 2)), np.zeros(0), E=np.eye(2), f=c)
        S = affine_hull(P)
        assert S.dim == 0
        assert np.allclose(S.origin, c, atol=1e-12)

    def test_inconsistent_equalities_rejected(self):
        P = Polytope(np.zeros((0, 1)), np.zeros(0), E=[[1.0], [1.0]], f=[0.0, 1.0])
        with pytest.raises(GeometryError):
            affine_hull(P)

    def test_orthonormal_basis(self):
        rng = np.random.default_rng(3)
        E = rng.normal(size=(2, 5))
        f = rng.normal(size=2)
        S = affine_hull(Polytope(np.zeros((0, 5)), np.zeros(0), E=E, f=f))
        assert np.allclose(S.basis.T @ S.basis, np.eye(S.dim), atol=1e-10)
        assert np.max(np.abs(E @ S.origin - f)) <= 1e-8


class TestProjectAffine:
    def test_fixed_point(self):
        P = Polytope(np.zeros((0, 2)), np.zeros(0), E=[[0.0, 1.0]], f=[0.0])
        S = affine_hull(P)
        x = np.array([3.0, 0.0])
        assert np.linalg.norm(project_affine(S, x) - x) <= 1e-10

    def test_drop_second_coordinate(self):
        P = Polytope(np.zeros((0, 2)), np.zeros(0), E=[[0.0, 1.0]], f=[0.0])
        S = affine_hull(P)
        assert np.allclose(project_affine(S, [3.0, 4.0]), [3.0, 0.0], atol=1e-12)

    def test_idempotent(self):
        rng = np.random.default_rng(11)
        E = rng.normal(size=(2, 4))
        f = rng.normal(size=2)
        S = affine_hull(Polytope(np.zeros((0, 4)), np.zeros(0), E=E, f=f))
        x = rng.normal(size=4)
        p1 = project_affine(S, x)
        p2 = project_affine(S, p1)
        assert np.linalg.norm(p2 - p1) <= 1e-10

    def test_projection_satisfies_equalities(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            E = rng.normal(size=(2, 4))
            f = rng.normal(size=2)
            P = Polytope(np.zeros((0, 4)), np.zeros(0), E=E, f=f)
            S = affine_hull(P)
            x = rng.normal(size=4) * 5
            y = project_affine(S, x)
            assert np.max(np.abs(E @ y - f)) <= 1e-8


class TestChebyshevCenter:
    def test_unit_box(self):
        assert np.allclose(chebyshev_center(unit_box()), [0.0, 0.0], atol=1e-7)

    def test_elongated_box_symmetric_center(self):
        P = Polytope.box([0.0, 0.0], [4.0, 2.0])
        assert np.allclose(chebyshev_center(P), [2.0, 1.0], atol=1e-7)

    def test_triangle(self):
        # x >= 0, y >= 0, x + y <= 1; by hand the max inscribed ball has
        # r = 1/(2 + sqrt(2)) and center (r, r).
        P = Polytope([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]], [0.0, 0.0, 1.0])
        r = 1.0 / (2.0 + np.sqrt(2.0))
        assert np.allclose(chebyshev_center(P), [r, r], atol=1e-7)

    def test_center_inside_random_boxes(self):
        rng = np.random.default_rng(20)
        for _ in range(100):
            n = int(rng.integers(1, 5))
            lo = rng.uniform(-5, 4, n)
            hi = lo + rng.uniform(0.2, 6.0, n)
            P = Polytope.box(lo, hi)
            c = chebyshev_center(P)
            assert P.contains(c, tol=0.0)
            assert np.allclose(c, (lo + hi) / 2, atol=1e-7)

    def test_thin_set_with_equality(self):
        # Segment {x1 + x2 = 1, 0 <= x1 <= 1} has its in-hull center at (.5, .5).
        P = Polytope(
            [[1.0, 0.0], [-1.0, 0.0]], [1.0, 0.0], E=[[1.0, 1.0]], f=[1.0]
        )
        assert np.allclose(chebyshev_center(P), [0.5, 0.5], atol=1e-7)

    def test_empty_raises(self):
        P = Polytope([[1.0], [-1.0]], [-1.0, -1.0])
        with pytest.raises(GeometryError):
            chebyshev_center(P)

    def test_unbounded_raises(self):
        P = Polytope([[1.0, 0.0]], [1.0])
        with pytest.raises(GeometryError):
            chebyshev_center(P)


class TestHullProjectionInvariant:
    def test_projection_lands_in_equality_block(self):
        rng = np.random.default_rng(42)
        for _ in range(50):
            E = rng.normal(size=(1, 3))
            f = rng.normal(size=1)
            P = Polytope(np.eye(3), rng.uniform(1, 3, 3), E=E, f=f)
            x = rng.normal(size=3) * 2
            y = project_affine(affine_hull(P), x)
            eq_only = Polytope(np.zeros((0, 3)), np.zeros(0), E=E, f=f)
            assert eq_only.contains(y, tol=1e-8)


def test_bounding_box_of_rotated_triangle():
    from corridorplan.geom import bounding_box

    # triangle x >= 0, y >= 0, x + y <= 3
    P = Polytope(A=np.array([[-1.0, 0.0], [0.0, -1.0], [1.0, 1.0]]), b=np.array([0.0, 0.0, 3.0]))
    lo, hi = bounding_box(P)
    np.testing.assert_allclose(lo, [0.0, 0.0], atol=1e-9)
    np.testing.assert_allclose(hi, [3.0, 3.0], atol=1e-9)


def test_bounding_box_respects_equalities_and_unbounded_raises():
    from corridorplan.geom import bounding_box

    box = Polytope.box([-1.0, 2.0], [5.0, 4.0])
    P = Polytope(box.A, box.b, E=np.array([[1.0, 1.0]]), f=np.array([5.0]))
    lo, hi = bounding_box(P)
    np.testing.assert_allclose(lo, [1.0, 2.0], atol=1e-9)
    np.testing.assert_allclose(hi, [3.0, 4.0], atol=1e-9)
    half = Polytope(A=np.array([[1.0, 0.0]]), b=np.array([1.0]))
    with pytest.raises(GeometryError):
        bounding_box(half)
