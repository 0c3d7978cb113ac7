"""Request/response models for the HTTP service.

Scenario and config inputs reuse the core pydantic models directly, so the
wire schema and the scenario-file schema are one and the same (unknown fields
rejected everywhere).
"""

from __future__ import annotations

from typing import Literal, Optional

from pydantic import BaseModel

from ..harness import HarnessConfig
from ..indexform import ConjugateSearchParams
from ..scenario import FixedPointScenario, Profile


class HealthResponse(BaseModel):
    status: str
    version: str


class ErrorBody(BaseModel):
    error: str
    message: str


class ValidateRequest(BaseModel):
    scenario: FixedPointScenario


class ViolationModel(BaseModel):
    field: str
    message: str


class ValidateResponse(BaseModel):
    ok: bool
    violations: list[ViolationModel]


class RunRequest(BaseModel):
    scenario: FixedPointScenario
    model: Literal["auto", "axis_even", "boundary_even", "linear_g", "linear_f_odd"] = "auto"
    g_mode: Literal["auto", "trace", "constraint"] = "auto"
    include_series: bool = False


class RunResponse(BaseModel):
    summary: dict
    trajectory_csv: str
    series: Optional[dict] = None


class OracleRequest(BaseModel):
    b0: float
    profile: Profile
    t_end: float
    xp0: float = 0.0


class CheckRequest(BaseModel):
    scenario: FixedPointScenario
    check: Literal["sign", "quarter_threshold", "rotation_blowup", "monotone_pressure"]
    branch: str = "auto"
    s_window: float = 50.0
    tol: float = 1e-6


class CheckResponse(BaseModel):
    report: dict


class SturmRequest(BaseModel):
    q1: Profile
    q2: Profile
    y0: float = 1.0
    yp0: float = 0.0
    span: tuple[float, float] = (0.0, 3.0)


class SturmResponse(BaseModel):
    report: dict


class SyntheticRadialDecay(BaseModel):
    """Manufactured run with f = 1 - t/T on a grid accumulating at T."""

    blowup_time: float
    grid_points: int = 4001
    closest: float = 1e-9


class ConjugateRequest(BaseModel):
    scenario: FixedPointScenario
    params: Optional[ConjugateSearchParams] = None
    model: Literal["auto", "axis_even", "boundary_even", "linear_g", "linear_f_odd"] = "auto"
    g_mode: Literal["auto", "trace", "constraint"] = "auto"
    synthetic: Optional[SyntheticRadialDecay] = None


class ConjugateResponse(BaseModel):
    report: dict


class VariationModel(BaseModel):
    grid: list[float]
    f: list[float]
    g: list[float]
    h: list[float]
    endpoint_zero: bool = True


class IndexFormRequest(BaseModel):
    scenario: FixedPointScenario
    variation: VariationModel
    model: Literal["auto", "axis_even", "boundary_even", "linear_g", "linear_f_odd"] = "auto"
    g_mode: Literal["auto", "trace", "constraint"] = "auto"


class IndexFormResponse(BaseModel):
    result: dict


class GapSumRequest(BaseModel):
    times: list[float]


class GapSumResponse(BaseModel):
    gap_sum: float


class DiagnosticsRequest(BaseModel):
    scenario: FixedPointScenario
    kind: Literal["fredholm", "laplacian"]
    model: Literal["auto", "axis_even", "boundary_even", "linear_g", "linear_f_odd"] = "auto"
    g_mode: Literal["auto", "trace", "constraint"] = "auto"


class DiagnosticsResponse(BaseModel):
    summary: dict
    csv: str


class BatchRunRequest(BaseModel):
    config: HarnessConfig
    seed_override: Optional[int] = None
    tol_override: Optional[float] = None
    jobs: int = 1


class ScenarioPayload(BaseModel):
    name: str
    ok: bool
    summary: dict
    trajectory_csv: str
    reports: dict
    conjugate: Optional[dict] = None
    diagnostics: dict = {}
    diagnostics_csv: dict = {}
    expectations: list[dict] = []


class BatchRunResponse(BaseModel):
    scenarios: list[ScenarioPayload]
    summary_csv: str
    all_ok: bool


class SweepRequest(BaseModel):
    config: HarnessConfig
    param: str
    values: list[float]
    seed_override: Optional[int] = None
    tol_override: Optional[float] = None
    jobs: int = 1


class SweepResponse(BaseModel):
    rows: list[dict]
    csv: str
    all_ok: bool
    reports: list[dict]
