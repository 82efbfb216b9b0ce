"""Versioned JSON scenario schema and loaders.

A scenario bundles everything one experiment needs: the convex sets (as
explicit row-major matrices), the coordinate map into configuration space,
curve degree/continuity, objective mix, kinodynamic limits, optimizer
overrides, and either explicit start/goal pairs or a seeded random-pair
spec.  Unknown fields are rejected at every level so fixture files stay
hand-authorable and drift is caught early.
"""

from __future__ import annotations

import json
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .geom import GeometryError, Polytope, bounding_box
from .parametrizations import (
    BimanualGeometry,
    GraspTransform,
    ParamError,
    Parametrization,
    bimanual_planar_param,
    euler_param,
    identity_param,
    rational_param,
)
from .pgd import PGDConfig
from .retime import LimitSpec

SCHEMA_VERSION = 1

__all__ = [
    "SCHEMA_VERSION",
    "ScenarioError",
    "PolytopeSpec",
    "ParametrizationSpec",
    "ObjectiveSpec",
    "LimitsSpec",
    "PGDSpec",
    "PairSpec",
    "RandomPairsSpec",
    "Scenario",
    "load_scenario",
    "save_scenario",
    "validate_scenario",
    "resolve_pairs",
]


class ScenarioError(ValueError):
    """Schema violation, unknown field, or semantically bad scenario."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class PolytopeSpec(_Strict):
    A: list[list[float]]
    b: list[float]
    E: Optional[list[list[float]]] = None
    f: Optional[list[float]] = None

    def build(self) -> Polytope:
        try:
            return Polytope(
                np.array(self.A, dtype=float),
                np.array(self.b, dtype=float),
                np.array(self.E, dtype=float) if self.E is not None else None,
                np.array(self.f, dtype=float) if self.f is not None else None,
            )
        except (GeometryError, ValueError) as exc:
            raise ScenarioError(f"bad polytope: {exc}")


class GeometrySpec(_Strict):
    lead_base: list[float] = Field(min_length=2, max_length=2)
    lead_links: list[float] = Field(min_length=3, max_length=3)
    sub_base: list[float] = Field(min_length=2, max_length=2)
    sub_links: list[float] = Field(min_length=4, max_length=4)


class GraspSpec(_Strict):
    offset: list[float] = Field(min_length=2, max_length=2)
    angle: float


class ParametrizationSpec(_Strict):
    id: Literal["identity", "euler_xyz", "rational", "bimanual_planar"]
    geometry: Optional[GeometrySpec] = None
    grasp: Optional[GraspSpec] = None
    branch: int = 1

    def build(self, dim_q: int) -> Parametrization:
        if self.id == "identity":
            return identity_param(dim_q)
        if self.id == "euler_xyz":
            return euler_param()
        if self.id == "rational":
            return rational_param(dim_q)
        if self.geometry is None or self.grasp is None:
            raise ScenarioError("bimanual_planar needs geometry and grasp")
        try:
            geom = BimanualGeometry(
                lead_base=tuple(self.geometry.lead_base),
                lead_links=tuple(self.geometry.lead_links),
                sub_base=tuple(self.geometry.sub_base),
                sub_links=tuple(self.geometry.sub_links),
            )
        except ParamError as exc:
            raise ScenarioError(f"bad arm geometry: {exc}")
        grasp = GraspTransform(offset=tuple(self.grasp.offset), angle=self.grasp.angle)
        return bimanual_planar_param(geom, grasp, branch=self.branch)


class ObjectiveSpec(_Strict):
    components: list[Literal["undistorted_length", "curvature"]] = Field(min_length=1)
    weights: list[float] = Field(min_length=1)
    beta: float = 10.0

    @model_validator(mode="after")
    def _check(self):
        if len(self.components) != len(self.weights):
            raise ValueError("components and weights must align")
        if any(w < 0 for w in self.weights) or sum(self.weights) <= 0:
            raise ValueError("weights must be nonnegative with a positive sum")
        return self


class LimitsSpec(_Strict):
    vel_max: list[float] = Field(min_length=1)
    acc_max: list[float] = Field(min_length=1)

    def build(self) -> LimitSpec:
        return LimitSpec(vel_max=self.vel_max, acc_max=self.acc_max)


class PGDSpec(_Strict):
    max_iters: Optional[int] = None
    window: Optional[int] = None
    rel_tol: Optional[float] = None
    armijo_c: Optional[float] = None
    backtrack_factor: Optional[float] = None
    initial_step: Optional[float] = None
    max_backtracks: Optional[int] = None
    feas_tol: Optional[float] = None

    def to_config(self, **overrides) -> PGDConfig:
        fields = {k: v for k, v in self.model_dump().items() if v is not None}
        fields.update({k: v for k, v in overrides.items() if v is not None})
        return PGDConfig(**fields)


class PairSpec(_Strict):
    start: list[float] = Field(min_length=1)
    goal: list[float] = Field(min_length=1)


class RandomPairsSpec(_Strict):
    count: int = Field(ge=1)
    seed: int
    min_separation: float = 0.0


class Scenario(_Strict):
    schema_version: int
    name: str
    dim_q: int = Field(ge=1)
    dim_c: int = Field(ge=1)
    parametrization: ParametrizationSpec
    sets: list[PolytopeSpec] = Field(min_length=1)
    degree: int = Field(ge=1)
    continuity: int = Field(ge=0, le=1)
    samples: int = Field(default=10, ge=2)
    segments_per_set: int = Field(default=1, ge=1)
    objective: ObjectiveSpec
    limits: LimitsSpec
    pgd: PGDSpec = PGDSpec()
    controlled_coords: Optional[list[int]] = None
    pairs: Optional[list[PairSpec]] = None
    random_pairs: Optional[RandomPairsSpec] = None

    @model_validator(mode="after")
    def _check(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ValueError(f"unsupported schema_version {self.schema_version}")
        if (self.pairs is None) == (self.random_pairs is None):
            raise ValueError("provide exactly one of pairs / random_pairs")
        return self

    # -- builders -----------------------------------------------------

    def build_sets(self) -> list:
        sets = [s.build() for s in self.sets]
        for i, P in enumerate(sets):
            if P.dim != self.dim_q:
                raise ScenarioError(f"set {i} has dim {P.dim}, expected {self.dim_q}")
        return sets

    def build_param(self) -> Parametrization:
        param = self.parametrization.build(self.dim_q)
        if param.dim_q != self.dim_q or param.dim_c != self.dim_c:
            raise ScenarioError(
                f"parametrization maps R{param.dim_q} -> R{param.dim_c}, "
                f"scenario declares R{self.dim_q} -> R{self.dim_c}"
            )
        return param

    def build_limits(self) -> LimitSpec:
        limits = self.limits.build()
        if len(limits.vel_max) != self.dim_c:
            raise ScenarioError("limit vectors must have dim_c entries")
        return limits


def load_scenario(source) -> Scenario:
    """Parse a scenario from a path or a dict; unknown fields are errors."""
    if isinstance(source, dict):
        raw = source
    else:
        try:
            with open(source) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ScenarioError(f"cannot read scenario: {exc}")
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"malformed JSON: {exc}")
    try:
        return Scenario.model_validate(raw)
    except ValidationError as exc:
        raise ScenarioError(str(exc))


def save_scenario(scn: Scenario, path) -> None:
    with open(path, "w") as fh:
        fh.write(scn.model_dump_json(indent=2, exclude_none=True))
        fh.write("\n")


def validate_scenario(scn: Scenario) -> list:
    """Semantic checks past the schema; returns a list of error strings."""
    errors = []
    sets = None
    try:
        sets = scn.build_sets()
    except ScenarioError as exc:
        errors.append(str(exc))
    try:
        scn.build_param()
    except (ScenarioError, ParamError) as exc:
        errors.append(str(exc))
    try:
        scn.build_limits()
    except (ScenarioError, ValueError) as exc:
        errors.append(str(exc))
    if scn.controlled_coords is not None:
        bad = [i for i in scn.controlled_coords if not 0 <= i < scn.dim_c]
        if bad:
            errors.append(f"controlled_coords out of range: {bad}")
        if len(scn.controlled_coords) in (0, scn.dim_c):
            errors.append("controlled_coords must split the coordinates")
    if sets and scn.pairs is not None:
        for k, pair in enumerate(scn.pairs):
            for label, point in (("start", pair.start), ("goal", pair.goal)):
                p = np.asarray(point, dtype=float)
                if p.shape[0] != scn.dim_q:
                    errors.append(f"pair {k} {label} has dim {p.shape[0]}")
                elif not any(P.contains(p, 1e-7) for P in sets):
                    errors.append(f"pair {k} {label} lies in no set")
    return errors


def _sample_point(rng, sets, boxes):
    for _ in range(10000):
        i = int(rng.integers(len(sets)))
        lo, hi = boxes[i]
        p = rng.uniform(lo, hi)
        if sets[i].contains(p, 1e-9):
            return p
    raise ScenarioError("rejection sampling failed; sets are too thin")


def resolve_pairs(scn: Scenario, sets, param: Parametrization,
                  seed=None, count=None) -> list:
    """Concrete (start, goal) arrays, drawn or taken from the scenario.

    Random pairs sample a uniformly chosen set's bounding box with
    membership rejection; pairs closer than min_separation (and always
    closer than 1e-9) in the mapped metric are redrawn.
    """
    if scn.pairs is not None:
        pairs = [
            (np.asarray(p.start, dtype=float), np.asarray(p.goal, dtype=float))
            for p in scn.pairs
        ]
        return pairs[:count] if count is not None else pairs
    spec = scn.random_pairs
    rng = np.random.default_rng(spec.seed if seed is None else seed)
    n_pairs = spec.count if count is None else count
    boxes = [bounding_box(P) for P in sets]
    min_sep = max(spec.min_separation, 1e-9)
    out = []
    for _ in range(n_pairs):
        for _ in range(10000):
            s = _sample_point(rng, sets, boxes)
            g = _sample_point(rng, sets, boxes)
            if param.metric(param.map(s), param.map(g)) >= min_sep:
                out.append((s, g))
                break
        else:
            raise ScenarioError("could not draw a pair meeting min_separation")
    return out
