import numpy as np
import pytest

from corridorplan.bezier import PathLayout
from corridorplan.objectives import (
    ObjectiveError,
    curvature_softmax,
    curvature_values,
    grad_check,
    sampled_length,
    surrogate_length,
    undistorted_length,
    weighted_sum,
)
from corridorplan.parametrizations import (
    euler_param,
    identity_param,
    rational_param,
)


def stacked_line(layout, start, goal):
    # control points evenly spaced along the chord, junctions duplicated
    S, d = layout.num_segments, layout.degree
    start, goal = np.asarray(start, float), np.asarray(goal, float)
    ts = np.linspace(0.0, 1.0, S * d + 1)
    pts = np.empty((S, d + 1, layout.dim))
    for i in range(S):
        for j in range(d + 1):
            t = ts[i * d + j]
            pts[i, j] = (1 - t) * start + t * goal
    return pts.reshape(-1)


def random_continuous(rng, layout):
    S, d, n = layout.num_segments, layout.degree, layout.dim
    pts = rng.normal(size=(S, d + 1, n))
    for i in range(S - 1):
        pts[i + 1, 0] = pts[i, d]
    return pts.reshape(-1)


class TestSurrogate:
    def test_all_equal_is_zero(self):
        layout = PathLayout(2, 3, 2)
        x = np.tile([1.0, -2.0], 8)
        assert surrogate_length(layout).value(x) == 0.0

    def test_two_points_distance_three(self):
        layout = PathLayout(1, 1, 2)
        x = np.array([0.0, 0.0, 3.0, 0.0])
        assert surrogate_length(layout).value(x) == pytest.approx(9.0)

    def test_midpoint_stationary_on_symmetric_line(self):
        layout = PathLayout(1, 2, 1)
        g = surrogate_length(layout).gradient([0.0, 1.0, 2.0])
        assert g[1] == pytest.approx(0.0, abs=1e-14)

    def test_grad_check_tight(self):
        rng = np.random.default_rng(0)
        layout = PathLayout(2, 3, 2)
        obj = surrogate_length(layout)
        assert grad_check(obj, rng.normal(size=layout.size)) <= 1e-7


class TestUndistortedLength:
    def test_straight_line_equal_pieces(self):
        layout = PathLayout(1, 3, 2)
        obj = undistorted_length(identity_param(2), layout, k=10)
        x = stacked_line(layout, [0.0, 0.0], [3.0, 0.0])
        assert obj.value(x) == pytest.approx(9.0 / 9.0, abs=1e-12)

    def test_degenerate_path_is_zero(self):
        layout = PathLayout(2, 3, 2)
        obj = undistorted_length(identity_param(2), layout, k=10)
        x = stacked_line(layout, [1.0, 1.0], [1.0, 1.0])
        assert obj.value(x) == pytest.approx(0.0, abs=1e-15)

    def test_identity_k2_equals_surrogate_on_degree_one(self):
        rng = np.random.default_rng(1)
        layout = PathLayout(3, 1, 2)
        obj = undistorted_length(identity_param(2), layout, k=2)
        srg = surrogate_length(layout)
        for _ in range(20):
            x = random_continuous(rng, layout)
            assert obj.value(x) == pytest.approx(srg.value(x), rel=1e-12)

    def test_duplicate_junction_samples_change_nothing(self):
        rng = np.random.default_rng(2)
        layout = PathLayout(3, 2, 2)
        par = identity_param(2)
        obj = undistorted_length(par, layout, k=5)
        x = random_continuous(rng, layout)
        pts = x.reshape(3, 3, 2)
        ts = np.linspace(0, 1, 5)
        chain = []
        from corridorplan.bezier import BezierSegment
        for i in range(3):
            seg = BezierSegment(pts[i])
            for t in ts:  # no dedup: every segment contributes all k samples
                chain.append(seg.eval(t))
        chain = np.array(chain)
        dup_val = float(np.sum(par.metric_sq_batch(chain[1:], chain[:-1])))
        assert obj.value(x) == pytest.approx(dup_val, rel=1e-12)

    def test_rational_length_matches_dense_sampling(self):
        layout = PathLayout(1, 1, 1)
        par = rational_param(1)
        x = np.array([0.0, 2.0])  # straight s-space chord
        sparse = sampled_length(par, layout, x, k=10) ** 2
        dense = sampled_length(par, layout, x, k=1000) ** 2
        assert sparse == pytest.approx(dense, rel=0.02)
        assert np.sqrt(dense) == pytest.approx(2.0 * np.arctan(2.0), rel=1e-9)

    def test_grad_identity(self):
        rng = np.random.default_rng(3)
        layout = PathLayout(2, 3, 2)
        obj = undistorted_length(identity_param(2), layout, k=10)
        x = random_continuous(rng, layout)
        assert grad_check(obj, x) <= 1e-6

    def test_grad_rational(self):
        rng = np.random.default_rng(4)
        layout = PathLayout(2, 3, 3)
        obj = undistorted_length(rational_param(3), layout, k=10)
        x = random_continuous(rng, layout)
        assert grad_check(obj, x) <= 1e-4

    def test_grad_euler(self):
        rng = np.random.default_rng(5)
        layout = PathLayout(2, 1, 3)
        obj = undistorted_length(euler_param(), layout, k=10)
        x = random_continuous(rng, layout) * 0.8
        assert grad_check(obj, x) <= 1e-4

    def test_dim_mismatch_rejected(self):
        with pytest.raises(ObjectiveError):
            undistorted_length(identity_param(3), PathLayout(1, 1, 2), k=5)


class TestCurvature:
    def test_straight_line_baseline(self):
        layout = PathLayout(1, 3, 2)
        k = 10
        obj = curvature_softmax(layout, k=k, beta=10.0)
        x = stacked_line(layout, [0.0, 0.0], [4.0, 1.0])
        assert obj.value(x) == pytest.approx(np.log(k) / 10.0, abs=1e-12)

    def test_parabola_apex(self):
        # quadratic segment tracing y = x^2; curvature at the apex is 2
        layout = PathLayout(1, 2, 2)
        x = np.array([-1.0, 1.0, 0.0, -1.0, 1.0, 1.0])
        kappa = curvature_values(layout, 11, x)
        assert kappa[5] == pytest.approx(2.0, abs=1e-6)

    def test_circle_arc_curvature(self):
        r = 2.0
        c = 0.5522847498307936
        for k in (9, 33):
            layout = PathLayout(1, 3, 2)
            x = r * np.array([1.0, 0.0, 1.0, c, c, 1.0, 0.0, 1.0])
            kappa = curvature_values(layout, k, x)
            assert np.max(kappa) == pytest.approx(1.0 / r, rel=0.01)

    def test_softmax_bounds(self):
        rng = np.random.default_rng(6)
        layout = PathLayout(2, 3, 2)
        beta, k = 10.0, 10
        obj = curvature_softmax(layout, k=k, beta=beta)
        from corridorplan.bezier import num_samples
        count = num_samples(2, k)
        for _ in range(20):
            x = random_continuous(rng, layout)
            kmax = float(np.max(curvature_values(layout, k, x)))
            v = obj.value(x)
            assert kmax - 1e-9 <= v <= kmax + np.log(count) / beta + 1e-9

    def test_gradient(self):
        rng = np.random.default_rng(7)
        layout = PathLayout(2, 3, 2)
        obj = curvature_softmax(layout, k=10, beta=10.0)
        for _ in range(5):
            x = random_continuous(rng, layout)
            assert grad_check(obj, x) <= 1e-4

    def test_degree_below_two_rejected(self):
        with pytest.raises(ObjectiveError):
            curvature_softmax(PathLayout(2, 1, 2), k=5)


class TestWeightedSum:
    def test_single_weight_passthrough(self):
        rng = np.random.default_rng(8)
        layout = PathLayout(2, 3, 2)
        a = surrogate_length(layout)
        b = curvature_softmax(layout, k=5)
        w = weighted_sum([a, b], [1.0, 0.0])
        x = random_continuous(rng, layout)
        assert w.value(x) == pytest.approx(a.value(x), rel=1e-12)
        assert np.allclose(w.gradient(x), a.gradient(x), atol=1e-12)

    def test_paper_style_mix(self):
        rng = np.random.default_rng(9)
        layout = PathLayout(2, 3, 2)
        dist = undistorted_length(identity_param(2), layout, k=10)
        curv = curvature_softmax(layout, k=10)
        mix = weighted_sum([dist, curv], [8.0, 0.01])
        x = random_continuous(rng, layout)
        assert mix.value(x) == pytest.approx(
            8.0 * dist.value(x) + 0.01 * curv.value(x), rel=1e-12)
        assert grad_check(mix, x) <= 1e-4

    def test_zero_weights(self):
        layout = PathLayout(1, 3, 2)
        z = weighted_sum([surrogate_length(layout)], [0.0])
        x = np.arange(8.0)
        assert z.value(x) == 0.0
        assert np.all(z.gradient(x) == 0.0)

    def test_length_mismatch_rejected(self):
        layout = PathLayout(1, 3, 2)
        with pytest.raises(ObjectiveError):
            weighted_sum([surrogate_length(layout)], [1.0, 2.0])
