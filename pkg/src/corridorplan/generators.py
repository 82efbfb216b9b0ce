"""Scenario generators: orientation chart cover, tangent-space corridors,
and the planar two-arm fixture.

Each generator returns a fully validated Scenario; the bimanual generator
additionally proves inverse kinematics reachable on 10^4 random samples
per set before returning, so downstream runs cannot hit unreachable sets.
"""

from __future__ import annotations

import numpy as np

from .parametrizations import ParamError
from .scenario import (
    GeometrySpec,
    GraspSpec,
    LimitsSpec,
    ObjectiveSpec,
    PairSpec,
    ParametrizationSpec,
    PGDSpec,
    PolytopeSpec,
    RandomPairsSpec,
    SCHEMA_VERSION,
    Scenario,
    ScenarioError,
)

__all__ = ["gen_so3_scenario", "gen_rational_scenario", "gen_bimanual_scenario"]


def _box_spec(lo, hi) -> PolytopeSpec:
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    A = np.vstack([np.eye(n), -np.eye(n)])
    b = np.concatenate([hi, -lo])
    return PolytopeSpec(A=A.tolist(), b=b.tolist())


def _overlapping_intervals(lo, hi, count, overlap):
    edges = np.linspace(lo, hi, count + 1)
    out = []
    for i in range(count):
        a = edges[i] - (overlap if i > 0 else 0.0)
        b = edges[i + 1] + (overlap if i < count - 1 else 0.0)
        out.append((a, b))
    return out


GIMBAL_MARGIN = 0.2
# generous overlap keeps slack at every junction so the refiner can cut
# corners; 0.8 rad measured best among {0.2 .. 0.9} on 125-pair batches
_CHART_OVERLAP = 0.8
_SO3_STEP = 1000.0


def gen_so3_scenario(seed: int, pairs: int = 125) -> Scenario:
    """Orientation planning over an overlapping chart cover.

    Roll and yaw are split into 4 overlapping intervals over [-pi, pi];
    pitch stays 0.2 rad away from the +-pi/2 singularities in 2 intervals.
    Degree-1 curves with repeated segments give the refiner evenly spaced
    interior points to move.
    """
    if pairs < 1:
        raise ScenarioError("pairs must be at least 1")
    roll = _overlapping_intervals(-np.pi, np.pi, 4, _CHART_OVERLAP)
    pitch = _overlapping_intervals(
        -np.pi / 2 + GIMBAL_MARGIN, np.pi / 2 - GIMBAL_MARGIN, 2, _CHART_OVERLAP
    )
    yaw = _overlapping_intervals(-np.pi, np.pi, 4, _CHART_OVERLAP)
    sets = [
        _box_spec([rl, pl, yl], [rh, ph, yh])
        for rl, rh in roll
        for pl, ph in pitch
        for yl, yh in yaw
    ]
    return Scenario(
        schema_version=SCHEMA_VERSION,
        name="so3-charts",
        dim_q=3,
        dim_c=4,
        parametrization=ParametrizationSpec(id="euler_xyz"),
        sets=sets,
        degree=1,
        continuity=0,
        samples=10,
        segments_per_set=3,
        objective=ObjectiveSpec(components=["undistorted_length"], weights=[1.0]),
        limits=LimitsSpec(vel_max=[1.0] * 4, acc_max=[1.0] * 4),
        random_pairs=RandomPairsSpec(count=pairs, seed=seed, min_separation=0.1),
        pgd=PGDSpec(initial_step=_SO3_STEP),
    )


# climb corridor in tangent space: joint 1 runs from the origin out to
# s ~ 5 (theta within 22 deg of the pi limit) while joint 2 detours
# through a dogleg placed where theta = 2*atan(s) bends hardest, so the
# straight s-space seed is visibly far from the theta-space optimum.
# The near-origin variant is the same shape shrunk into the regime
# where the map is nearly linear.
_CHICANE = [
    ([-0.2, -0.2], [2.6, 0.6]),
    ([1.0, -0.2], [3.0, 3.4]),
    ([1.4, 2.6], [5.4, 3.4]),
]
_CHICANE_PAIR = ([0.0, 0.0], [5.2, 3.0])
_NEAR_ORIGIN_SCALE = 0.06
_RATIONAL_STEP = 10.0


def gen_rational_scenario(seed: int, regime: str = "near_limit") -> Scenario:
    """Two-joint corridor in tangent-half-angle space.

    near_limit: the first joint traverses |theta| close to pi (|s| ~ 5)
    where the map compresses distances hard.  near_origin: identical
    corridor scaled to |s| <= 0.31 where the map is essentially linear.
    """
    if regime not in ("near_limit", "near_origin"):
        raise ScenarioError(f"unknown regime {regime!r}")
    scale = 1.0 if regime == "near_limit" else _NEAR_ORIGIN_SCALE
    sets = [
        _box_spec(np.array(lo) * scale, np.array(hi) * scale) for lo, hi in _CHICANE
    ]
    start, goal = (np.array(p) * scale for p in _CHICANE_PAIR)
    return Scenario(
        schema_version=SCHEMA_VERSION,
        name=f"rational-{regime.replace('_', '-')}",
        dim_q=2,
        dim_c=2,
        parametrization=ParametrizationSpec(id="rational"),
        sets=sets,
        degree=2,
        continuity=1,
        samples=10,
        segments_per_set=2,
        objective=ObjectiveSpec(components=["undistorted_length"], weights=[1.0]),
        limits=LimitsSpec(vel_max=[1.0, 1.0], acc_max=[1.0, 1.0]),
        pairs=[PairSpec(start=start.tolist(), goal=goal.tolist())],
        pgd=PGDSpec(initial_step=_RATIONAL_STEP),
    )


_BIM_GEOMETRY = GeometrySpec(
    lead_base=[0.0, 0.0],
    lead_links=[1.0, 1.0, 0.5],
    sub_base=[2.8, 0.0],
    sub_links=[0.9, 1.1, 0.9, 0.5],
)
_BIM_GRASP = GraspSpec(offset=[0.0, 0.0], angle=float(np.pi))
# L-shaped chain: two boxes lower the lead shoulder, then two raise the
# lead elbow.  End boxes are disjoint, so every route turns the corner;
# rounding that corner is what the curvature objective buys at retiming.
_BIM_CENTER = np.array([0.9, -0.6, -0.3, 2.4])
_BIM_LEG1 = np.array([-0.25, 0.0, 0.0, 0.0])
_BIM_LEG2 = np.array([0.0, 0.3, 0.0, 0.0])
_BIM_HALF = 0.2
_BIM_PAIRS = [
    ([0.95, -0.55, -0.35, 2.45], [0.35, -0.05, -0.25, 2.35]),
    ([0.84, -0.58, -0.26, 2.35], [0.46, -0.02, -0.34, 2.45]),
    ([0.93, -0.66, -0.28, 2.46], [0.37, 0.06, -0.32, 2.34]),
]
# lead joints get tighter limits than the subordinate chain, so smoother
# lead trajectories pay off at retiming time
_BIM_VEL = [0.8, 0.8, 0.8, 2.0, 2.0, 2.0, 2.0]
_BIM_ACC = [0.5, 0.5, 0.5, 2.0, 2.0, 2.0, 2.0]
_BIM_STEP_SIZE = 5.0

IK_VALIDATION_SAMPLES = 10_000


def gen_bimanual_scenario(seed: int) -> Scenario:
    """Planar two-arm grasp corridor over (lead joints, redundancy).

    Five overlapping boxes form an L: the lead shoulder drops, then the
    lead elbow swings up, forcing every route around a corner whose
    sharpness decides the retimed duration.  Inverse kinematics is proven
    reachable on 10^4 seeded random samples per box before the scenario
    is returned.
    """
    base = _BIM_CENTER
    corner = base + 2 * _BIM_LEG1
    centers = [base, base + _BIM_LEG1, corner,
               corner + _BIM_LEG2, corner + 2 * _BIM_LEG2]
    sets = [_box_spec(c - _BIM_HALF, c + _BIM_HALF) for c in centers]
    scn = Scenario(
        schema_version=SCHEMA_VERSION,
        name="bimanual-planar",
        dim_q=4,
        dim_c=7,
        parametrization=ParametrizationSpec(
            id="bimanual_planar", geometry=_BIM_GEOMETRY, grasp=_BIM_GRASP
        ),
        sets=sets,
        degree=3,
        continuity=1,
        samples=10,
        segments_per_set=1,
        objective=ObjectiveSpec(components=["undistorted_length"], weights=[1.0]),
        limits=LimitsSpec(vel_max=_BIM_VEL, acc_max=_BIM_ACC),
        controlled_coords=[0, 1, 2],
        pairs=[PairSpec(start=list(s), goal=list(g)) for s, g in _BIM_PAIRS],
        pgd=PGDSpec(initial_step=_BIM_STEP_SIZE),
    )
    param = scn.build_param()
    rng = np.random.default_rng(seed)
    for i, c in enumerate(centers):
        pts = rng.uniform(c - _BIM_HALF, c + _BIM_HALF, size=(IK_VALIDATION_SAMPLES, 4))
        try:
            param.map_batch(pts)
        except ParamError as exc:
            raise ScenarioError(f"IK unreachable inside set {i}: {exc}")
    return scn
