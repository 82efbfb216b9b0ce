"""Canonical fixture corpus: scenario files plus expected metrics.

Each fixture pairs a scenario JSON with an expected-metrics JSON whose
values come from independent brute-force oracles (junction grid search,
dense k=1000 sampled lengths, closed-form rest-to-rest retiming) written
by scripts/regen_fixture_oracles.py -- never typed by hand.  Every value
carries a provenance tag and an absolute tolerance.
"""

from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from ..pipeline import run_scenario
from ..scenario import ScenarioError, load_scenario

__all__ = [
    "ExpectedMetric",
    "Fixture",
    "FixtureError",
    "FixtureReport",
    "fixture_dir",
    "list_fixtures",
    "load_fixture",
    "verify_fixture",
    "verify_all",
]


class FixtureError(ValueError):
    pass


@dataclass(frozen=True)
class ExpectedMetric:
    name: str  # report column, e.g. length_after
    pair: int
    value: float
    tol: float
    provenance: str


@dataclass(frozen=True)
class Fixture:
    name: str
    description: str
    scenario_path: Path
    metrics: tuple


@dataclass
class FixtureReport:
    name: str
    checked: int
    failures: list

    @property
    def passed(self) -> bool:
        return not self.failures


def fixture_dir() -> Path:
    return Path(resources.files(__package__))


def list_fixtures() -> list:
    return sorted(p.name[: -len(".expected.json")]
                  for p in fixture_dir().glob("*.expected.json"))


def load_fixture(source) -> Fixture:
    """Load by corpus name or by path to an .expected.json file."""
    path = Path(source)
    if path.suffix != ".json":
        path = fixture_dir() / f"{source}.expected.json"
    if not path.is_file():
        raise FixtureError(f"no fixture at {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise FixtureError(f"{path.name}: malformed JSON: {exc}")
    for key in ("description", "scenario", "metrics"):
        if key not in raw:
            raise FixtureError(f"{path.name}: missing '{key}'")
    metrics = []
    for i, m in enumerate(raw["metrics"]):
        try:
            metric = ExpectedMetric(
                name=str(m["name"]), pair=int(m["pair"]),
                value=float(m["value"]), tol=float(m["tol"]),
                provenance=str(m["provenance"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise FixtureError(f"{path.name}: metric {i}: {exc}")
        if not ("[TRIVIAL" in metric.provenance
                or "[DERIVED" in metric.provenance):
            raise FixtureError(
                f"{path.name}: metric '{metric.name}' lacks a provenance tag")
        if metric.tol <= 0:
            raise FixtureError(
                f"{path.name}: metric '{metric.name}' needs a positive tol")
        metrics.append(metric)
    scenario_path = path.parent / raw["scenario"]
    if not scenario_path.is_file():
        raise FixtureError(f"missing scenario file {scenario_path}")
    name = path.name[: -len(".expected.json")]
    return Fixture(name=name, description=str(raw["description"]),
                   scenario_path=scenario_path, metrics=tuple(metrics))


def verify_fixture(fixture, max_iters=None) -> FixtureReport:
    """Run the fixture's scenario and compare against expected metrics."""
    if not isinstance(fixture, Fixture):
        fixture = load_fixture(fixture)
    try:
        scn = load_scenario(fixture.scenario_path)
    except ScenarioError as exc:
        raise FixtureError(f"{fixture.name}: {exc}")
    report = run_scenario(scn, max_iters=max_iters)
    failures = []
    for m in fixture.metrics:
        label = f"{m.name}[pair {m.pair}]"
        if not 0 <= m.pair < len(report.rows):
            failures.append(f"{label}: no such pair in report")
            continue
        row = report.rows[m.pair]
        if row.status != "ok":
            failures.append(f"{label}: pair failed: {row.error}")
            continue
        got = getattr(row, m.name, None)
        if got is None or (isinstance(got, float) and math.isnan(got)):
            failures.append(f"{label}: report has no value")
            continue
        if abs(float(got) - m.value) > m.tol:
            failures.append(
                f"{label}: got {float(got):.9g}, want {m.value:.9g} "
                f"within {m.tol:g}")
    return FixtureReport(name=fixture.name, checked=len(fixture.metrics),
                         failures=failures)


def verify_all(names=None, max_iters=None, workers: int = 4) -> list:
    """Verify fixtures concurrently; order follows the input names."""
    names = list(names) if names is not None else list_fixtures()
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(
            lambda n: verify_fixture(n, max_iters=max_iters), names))
