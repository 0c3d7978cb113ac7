"""FastAPI service exposing the laboratory over HTTP.

Domain errors map to structured responses: hypothesis and precondition
violations are 422 (the request was well-formed but the math says no),
config problems are 400.
"""

from __future__ import annotations

import numpy as np
from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .. import __version__
from ..criteria import (
    check_monotone_pressure,
    check_quarter_threshold,
    check_rotation_blowup,
    check_sign_criterion,
    sturm_compare,
)
from ..errors import BlowupLabError, ConfigError
from ..harness import run_config, run_model, sweep_config, sweep_table
from ..indexform import (
    curvature_gap_sum,
    find_conjugate,
    fredholm_diagnostics,
    index_form,
    laplacian_identity_odd,
)
from ..models import central_force_oracle, manufactured_solution
from ..scenario import validate_scenario
from ..solution import VariationField
from . import schemas


def _solution_payload(sol, include_series: bool) -> schemas.RunResponse:
    series = None
    if include_series:
        series = {
            "grid": sol.grid.tolist(),
            "f": sol.f.tolist(),
            "fp": sol.fp.tolist(),
            "g": sol.g.tolist(),
            "gp": sol.gp.tolist(),
            "winding_integral": sol.winding_integral.tolist(),
            "vorticity_integral": sol.vorticity_integral.tolist(),
            "constraint_residual": sol.constraint_residual.tolist(),
        }
    return schemas.RunResponse(summary=sol.summary(), trajectory_csv=sol.to_csv(), series=series)


def create_app() -> FastAPI:
    app = FastAPI(title="blowuplab", version=__version__)

    @app.exception_handler(ConfigError)
    async def _config_error(request: Request, exc: ConfigError):
        return JSONResponse(status_code=400, content={"error": "ConfigError", "message": str(exc)})

    @app.exception_handler(BlowupLabError)
    async def _domain_error(request: Request, exc: BlowupLabError):
        return JSONResponse(
            status_code=422, content={"error": type(exc).__name__, "message": str(exc)}
        )

    @app.exception_handler(ValueError)
    async def _value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=400, content={"error": "ValueError", "message": str(exc)})

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.post("/scenario/validate", response_model=schemas.ValidateResponse)
    def validate(req: schemas.ValidateRequest):
        report = validate_scenario(req.scenario)
        return schemas.ValidateResponse(
            ok=report.ok,
            violations=[
                schemas.ViolationModel(field=v.field, message=v.message) for v in report.violations
            ],
        )

    @app.post("/run", response_model=schemas.RunResponse)
    def run(req: schemas.RunRequest):
        sol = run_model(req.scenario, req.model, req.g_mode)
        return _solution_payload(sol, req.include_series)

    @app.post("/oracle/central-force", response_model=schemas.RunResponse)
    def oracle(req: schemas.OracleRequest):
        sol = central_force_oracle(req.b0, req.profile, req.t_end, xp0=req.xp0)
        return _solution_payload(sol, include_series=False)

    @app.post("/check", response_model=schemas.CheckResponse)
    def check(req: schemas.CheckRequest):
        s = req.scenario
        if req.check == "sign":
            sol = run_model(s, "auto", "auto")
            report = check_sign_criterion(sol, s, branch=req.branch, tol=req.tol)
        elif req.check == "quarter_threshold":
            report = check_quarter_threshold(s, s_window=req.s_window, spacing_tol=req.tol)
        elif req.check == "rotation_blowup":
            report = check_rotation_blowup(s, tol=req.tol)
        else:
            report = check_monotone_pressure(s, tol=req.tol)
        return schemas.CheckResponse(report=report.to_dict())

    @app.post("/compare/sturm", response_model=schemas.SturmResponse)
    def sturm(req: schemas.SturmRequest):
        report = sturm_compare(req.q1, req.q2, (req.y0, req.yp0), req.span)
        return schemas.SturmResponse(report=report.to_dict())

    @app.post("/conjugate/search", response_model=schemas.ConjugateResponse)
    def conjugate(req: schemas.ConjugateRequest):
        s = req.scenario
        if req.synthetic is not None:
            T, n, closest = (
                req.synthetic.blowup_time,
                req.synthetic.grid_points,
                req.synthetic.closest,
            )
            u = np.linspace(0.0, -np.log(closest / T), n)
            grid = T * (1.0 - np.exp(-u))
            f = 1.0 - grid / T
            sol = manufactured_solution(grid, f, np.full(n, -1.0 / T), g=1.0 / f, scenario=s)
        else:
            sol = run_model(s, req.model, req.g_mode)
        report = find_conjugate(sol, s, req.params)
        return schemas.ConjugateResponse(report=report.to_dict())

    @app.post("/index-form", response_model=schemas.IndexFormResponse)
    def index_form_endpoint(req: schemas.IndexFormRequest):
        sol = run_model(req.scenario, req.model, req.g_mode)
        v = req.variation
        field = VariationField(
            grid=np.asarray(v.grid), f=np.asarray(v.f), g=np.asarray(v.g), h=np.asarray(v.h),
            endpoint_zero=v.endpoint_zero,
        )
        result = index_form(field, sol, req.scenario)
        return schemas.IndexFormResponse(result=result.to_dict())

    @app.post("/conjugate/gap-sum", response_model=schemas.GapSumResponse)
    def gap_sum(req: schemas.GapSumRequest):
        return schemas.GapSumResponse(gap_sum=curvature_gap_sum(req.times))

    @app.post("/diagnostics", response_model=schemas.DiagnosticsResponse)
    def diagnostics(req: schemas.DiagnosticsRequest):
        sol = run_model(req.scenario, req.model, req.g_mode)
        if req.kind == "fredholm":
            rep = fredholm_diagnostics(sol, req.scenario)
        else:
            rep = laplacian_identity_odd(sol)
        return schemas.DiagnosticsResponse(summary=rep.to_dict(), csv=rep.to_csv())

    @app.post("/batch/run", response_model=schemas.BatchRunResponse)
    def batch_run(req: schemas.BatchRunRequest):
        batch = run_config(
            req.config, seed_override=req.seed_override, tol_override=req.tol_override,
            jobs=req.jobs,
        )
        return schemas.BatchRunResponse(
            scenarios=[schemas.ScenarioPayload(**r.payload()) for r in batch.scenarios],
            summary_csv=batch.summary_csv,
            all_ok=batch.all_ok,
        )

    @app.post("/batch/sweep", response_model=schemas.SweepResponse)
    def batch_sweep(req: schemas.SweepRequest):
        rows, batches = sweep_config(
            req.config, req.param, req.values,
            seed_override=req.seed_override, tol_override=req.tol_override, jobs=req.jobs,
        )
        reports = [
            {
                "value": value,
                "scenarios": [r.payload(include_trajectory=False) for r in batch.scenarios],
                "all_ok": batch.all_ok,
            }
            for value, batch in zip(req.values, batches)
        ]
        # exit semantics mirror `run`: only declared expectations gate success,
        # criterion statuses are findings (sweeps often straddle a transition)
        all_ok = all(batch.all_ok for batch in batches)
        return schemas.SweepResponse(rows=rows, csv=sweep_table(rows), all_ok=all_ok, reports=reports)

    return app


app = create_app()
