"""HTTP facade over the planning pipeline.

The service is stateless: every request carries its full scenario, every
response is a pure function of the request, so deployments scale
horizontally without coordination.  The CLI talks to this app in-process
by default and over the wire with --server.
"""

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..generators import gen_bimanual_scenario, gen_rational_scenario, gen_so3_scenario
from ..pipeline import csv_text, run_scenario, summarize
from ..scenario import ScenarioError, load_scenario, validate_scenario
from ..svgplot import render_plots
from .models import (
    GenerateRequest,
    HealthResponse,
    RunRequest,
    RunResponse,
    ValidateResponse,
)


def create_app() -> FastAPI:
    app = FastAPI(title="corridorplan", version=__version__)

    @app.get("/health", response_model=HealthResponse)
    def health():
        return HealthResponse(status="ok", version=__version__)

    @app.post("/scenarios/validate", response_model=ValidateResponse)
    def validate(body: dict):
        try:
            scn = load_scenario(body)
        except ScenarioError as exc:
            return ValidateResponse(valid=False, error=str(exc))
        warnings = validate_scenario(scn)
        return ValidateResponse(valid=not warnings, warnings=warnings)

    @app.post("/scenarios/generate")
    def generate(body: GenerateRequest) -> dict:
        try:
            if body.kind == "so3":
                kw = {"pairs": body.pairs} if body.pairs is not None else {}
                scn = gen_so3_scenario(seed=body.seed, **kw)
            elif body.kind == "rational":
                kw = {"regime": body.regime} if body.regime is not None else {}
                scn = gen_rational_scenario(seed=body.seed, **kw)
            else:
                scn = gen_bimanual_scenario(seed=body.seed)
        except (ScenarioError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return scn.model_dump(mode="json", exclude_none=True)

    @app.post("/runs", response_model=RunResponse)
    def runs(body: RunRequest):
        try:
            scn = load_scenario(body.scenario)
        except ScenarioError as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            report = run_scenario(scn, seed=body.seed, pairs=body.pairs,
                                  max_iters=body.max_iters,
                                  k_samples=body.k_samples)
        except ScenarioError as exc:
            # pair resolution can fail before any row exists
            raise HTTPException(status_code=422, detail=str(exc))
        plots = render_plots(report, scn) if body.include_plots else None
        return RunResponse(summary=summarize(report), failed=report.failed,
                           csv=csv_text(report), plots=plots)

    return app
