"""Batch experiment runner: config model, scenario execution, expectations,
and parameter sweeps.

The harness is transport-agnostic: it consumes a parsed config and returns
plain payload objects (CSV strings and JSON-ready dicts). The FastAPI service
wraps these functions and the CLI writes their output to disk. All floating
point lands in CSVs with 17 significant digits and every random trial field
comes from a generator seeded in the config, so reruns are byte-identical.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from .criteria import (
    CriterionReport,
    check_monotone_pressure,
    check_quarter_threshold,
    check_rotation_blowup,
    check_sign_criterion,
    hypothesis_report,
)
from .errors import BlowupLabError, ConfigError, HypothesisNotMet
from .indexform import (
    ConjugateSearchParams,
    find_conjugate,
    fredholm_diagnostics,
    index_form,
    laplacian_identity_odd,
)
from .models import run_axis_even, run_boundary_even, run_linear
from .scenario import FixedPointScenario, _Frozen, validate_scenario
from .solution import JacobiSolution, VariationField, fmt17

MODELS = ("auto", "axis_even", "boundary_even", "linear_g", "linear_f_odd")


class ValueTol(_Frozen):
    value: float
    tol: float = 1e-9


class CheckSpec(_Frozen):
    kind: Literal["sign", "quarter_threshold", "rotation_blowup", "monotone_pressure"]
    branch: str = "auto"  # sign criterion only
    s_window: float = 50.0  # quarter threshold only
    tol: float = 1e-6


class ExpectSpec(_Frozen):
    checks: dict[str, str] = {}
    first_zero_f: Optional[ValueTol] = None
    first_zero_g: Optional[ValueTol] = None
    terminated: Optional[str] = None
    max_constraint_residual: Optional[float] = None
    conjugate_status: Optional[str] = None
    conjugate_min_intervals: Optional[int] = None
    odd_positivity_min: Optional[float] = None


class ScenarioEntry(_Frozen):
    name: str
    scenario: FixedPointScenario
    model: Literal["auto", "axis_even", "boundary_even", "linear_g", "linear_f_odd"] = "auto"
    g_mode: Literal["auto", "trace", "constraint"] = "auto"
    checks: list[CheckSpec] = []
    conjugate: Optional[ConjugateSearchParams] = None
    diagnostics: list[Literal["fredholm", "laplacian"]] = []
    odd_positivity_trials: int = 0
    expect: Optional[ExpectSpec] = None


class HarnessConfig(_Frozen):
    seed: int = 0
    scenarios: list[ScenarioEntry]


@dataclass
class ScenarioResult:
    name: str
    summary: dict
    trajectory_csv: str
    reports: dict[str, dict]
    conjugate: Optional[dict]
    diagnostics: dict[str, dict]
    diagnostics_csv: dict[str, str]
    expectations: list[dict]
    ok: bool

    def payload(self, include_trajectory: bool = True) -> dict:
        return {
            "name": self.name,
            "ok": self.ok,
            "summary": self.summary,
            "trajectory_csv": self.trajectory_csv if include_trajectory else "",
            "reports": self.reports,
            "conjugate": self.conjugate,
            "diagnostics": self.diagnostics,
            "diagnostics_csv": self.diagnostics_csv,
            "expectations": self.expectations,
        }


@dataclass
class BatchResult:
    scenarios: list[ScenarioResult]
    summary_csv: str
    all_ok: bool


def default_model(s: FixedPointScenario) -> str:
    if s.parity == "even":
        return "axis_even" if s.location == "axis" else "boundary_even"
    return "linear_f_odd"


def run_model(s: FixedPointScenario, model: str, g_mode: str) -> JacobiSolution:
    if model == "auto":
        model = default_model(s)
    if model == "axis_even":
        return run_axis_even(s, g_mode=g_mode)
    if model == "boundary_even":
        return run_boundary_even(s, g_mode=g_mode)
    if model == "linear_g":
        return run_linear(s, "g_axis" if s.location == "axis" else "g_boundary")
    if model == "linear_f_odd":
        return run_linear(s, "f_odd")
    raise ConfigError(f"unknown model {model!r}")


def run_check(spec: CheckSpec, sol: JacobiSolution, s: FixedPointScenario) -> CriterionReport:
    window = (0.0, float(s.t_end))
    try:
        if spec.kind == "sign":
            return check_sign_criterion(sol, s, branch=spec.branch, tol=spec.tol)
        if spec.kind == "quarter_threshold":
            return check_quarter_threshold(s, s_window=spec.s_window, spacing_tol=spec.tol)
        if spec.kind == "rotation_blowup":
            return check_rotation_blowup(s, tol=spec.tol)
        return check_monotone_pressure(s, tol=spec.tol)
    except HypothesisNotMet as exc:
        return hypothesis_report(exc, window)


def random_endpoint_trials(
    sol: JacobiSolution, s: FixedPointScenario, n_trials: int, seed: int, n_modes: int = 4
) -> dict:
    """Minimum index-form value over seeded random endpoint-vanishing trials."""
    rng = np.random.default_rng(seed)
    t0, t1 = float(sol.grid[0]), float(sol.grid[-1])
    grid = np.linspace(t0, t1, 1025)
    span = t1 - t0
    base = [np.sin(m * np.pi * (grid - t0) / span) for m in range(1, n_modes + 1)]
    dbase = [
        (m * np.pi / span) * np.cos(m * np.pi * (grid - t0) / span) for m in range(1, n_modes + 1)
    ]
    worst = math.inf
    for _ in range(n_trials):
        coeffs = rng.standard_normal((3, n_modes))
        comps, ders = [], []
        for c in coeffs:
            comps.append(sum(ci * bi for ci, bi in zip(c, base)))
            ders.append(sum(ci * bi for ci, bi in zip(c, dbase)))
        v = VariationField(
            grid=grid, f=comps[0], g=comps[1], h=comps[2],
            endpoint_zero=True, fp=ders[0], gp=ders[1], hp=ders[2],
        )
        worst = min(worst, index_form(v, sol, s).value)
    return {"trials": n_trials, "min_value": worst, "seed": seed}


def _check_expectations(
    entry: ScenarioEntry,
    summary: dict,
    reports: dict[str, dict],
    conjugate: Optional[dict],
    positivity: Optional[dict],
) -> list[dict]:
    exp = entry.expect
    rows: list[dict] = []
    if exp is None:
        return rows

    def add(fieldname: str, expected, actual, ok: bool):
        rows.append({"field": fieldname, "expected": expected, "actual": actual, "ok": bool(ok)})

    for kind, want in exp.checks.items():
        got = reports.get(kind, {}).get("status")
        add(f"checks.{kind}", want, got, got == want)
    for fieldname in ("first_zero_f", "first_zero_g"):
        spec = getattr(exp, fieldname)
        if spec is not None:
            got = summary.get(fieldname)
            ok = got is not None and abs(got - spec.value) <= spec.tol
            add(fieldname, spec.value, got, ok)
    if exp.terminated is not None:
        add("terminated", exp.terminated, summary["terminated"], summary["terminated"] == exp.terminated)
    if exp.max_constraint_residual is not None:
        got = summary["max_constraint_residual"]
        add("max_constraint_residual", exp.max_constraint_residual, got,
            got <= exp.max_constraint_residual)
    if exp.conjugate_status is not None:
        got = (conjugate or {}).get("status")
        add("conjugate.status", exp.conjugate_status, got, got == exp.conjugate_status)
    if exp.conjugate_min_intervals is not None:
        got = len((conjugate or {}).get("intervals", []))
        add("conjugate.intervals", exp.conjugate_min_intervals, got,
            got >= exp.conjugate_min_intervals)
    if exp.odd_positivity_min is not None:
        got = (positivity or {}).get("min_value")
        add("odd_positivity.min_value", exp.odd_positivity_min, got,
            got is not None and got >= exp.odd_positivity_min)
    return rows


def run_entry(entry: ScenarioEntry, seed: int) -> ScenarioResult:
    s = entry.scenario
    sol = run_model(s, entry.model, entry.g_mode)
    summary = sol.summary()
    reports = {spec.kind: run_check(spec, sol, s).to_dict() for spec in entry.checks}

    conjugate = None
    if entry.conjugate is not None:
        conjugate = find_conjugate(sol, s, entry.conjugate).to_dict()

    diagnostics: dict[str, dict] = {}
    diagnostics_csv: dict[str, str] = {}
    for kind in entry.diagnostics:
        try:
            if kind == "fredholm":
                rep = fredholm_diagnostics(sol, s)
            else:
                rep = laplacian_identity_odd(sol)
            diagnostics[kind] = rep.to_dict()
            diagnostics_csv[kind] = rep.to_csv()
        except BlowupLabError as exc:
            diagnostics[kind] = {"error": type(exc).__name__, "message": str(exc)}

    positivity = None
    if entry.odd_positivity_trials > 0:
        positivity = random_endpoint_trials(sol, s, entry.odd_positivity_trials, seed)
        reports["odd_positivity"] = positivity

    expectations = _check_expectations(entry, summary, reports, conjugate, positivity)
    ok = all(row["ok"] for row in expectations)
    return ScenarioResult(
        name=entry.name,
        summary=summary,
        trajectory_csv=sol.to_csv(),
        reports=reports,
        conjugate=conjugate,
        diagnostics=diagnostics,
        diagnostics_csv=diagnostics_csv,
        expectations=expectations,
        ok=ok,
    )


def _apply_tol_override(config: HarnessConfig, rel_tol: float) -> HarnessConfig:
    scenarios = []
    for entry in config.scenarios:
        tol = entry.scenario.tolerances.model_copy(update={"rel_tol": rel_tol})
        scenario = entry.scenario.model_copy(update={"tolerances": tol})
        scenarios.append(entry.model_copy(update={"scenario": scenario}))
    return config.model_copy(update={"scenarios": scenarios})


def _validate_config(config: HarnessConfig) -> None:
    names = [e.name for e in config.scenarios]
    if len(set(names)) != len(names):
        raise ConfigError("scenario names must be unique")
    for entry in config.scenarios:
        report = validate_scenario(entry.scenario)
        if not report.ok:
            details = "; ".join(f"{v.field}: {v.message}" for v in report.violations)
            raise ConfigError(f"scenario {entry.name!r} invalid: {details}")


def summary_table(results: list[ScenarioResult]) -> str:
    lines = [
        "name,terminated,first_zero_f,first_zero_g,max_constraint_residual,"
        "checks_passed,checks_total,expectations_ok"
    ]
    for r in results:
        statuses = [rep.get("status") for rep in r.reports.values() if "status" in rep]
        n_pass = sum(1 for st in statuses if st == "PASS")
        fz_f = "" if r.summary["first_zero_f"] is None else fmt17(r.summary["first_zero_f"])
        fz_g = "" if r.summary["first_zero_g"] is None else fmt17(r.summary["first_zero_g"])
        lines.append(
            f"{r.name},{r.summary['terminated']},{fz_f},{fz_g},"
            f"{fmt17(r.summary['max_constraint_residual'])},"
            f"{n_pass},{len(statuses)},{str(r.ok).lower()}"
        )
    return "\n".join(lines) + "\n"


def run_config(
    config: HarnessConfig,
    seed_override: Optional[int] = None,
    tol_override: Optional[float] = None,
    jobs: int = 1,
) -> BatchResult:
    if tol_override is not None:
        config = _apply_tol_override(config, tol_override)
    _validate_config(config)
    seed = config.seed if seed_override is None else seed_override
    if jobs > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(lambda e: run_entry(e, seed), config.scenarios))
    else:
        results = [run_entry(e, seed) for e in config.scenarios]
    all_ok = all(r.ok for r in results)
    return BatchResult(scenarios=results, summary_csv=summary_table(results), all_ok=all_ok)


# ---------------------------------------------------------------------------
# Parameter sweeps
# ---------------------------------------------------------------------------


def _set_path(data: dict, path: list[str], value: float) -> None:
    node = data
    for key in path[:-1]:
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"unknown scenario parameter {'.'.join(path)!r}")
        node = node[key]
    leaf = path[-1]
    if not isinstance(node, dict) or leaf not in node:
        raise ConfigError(f"unknown scenario parameter {'.'.join(path)!r}")
    if not isinstance(node[leaf], (int, float)) or isinstance(node[leaf], bool):
        raise ConfigError(f"scenario parameter {'.'.join(path)!r} is not numeric")
    node[leaf] = value


def _with_param(entry: ScenarioEntry, param: str, value: float) -> ScenarioEntry:
    data = entry.scenario.model_dump(mode="python")
    _set_path(data, param.split("."), value)
    return entry.model_copy(update={"scenario": FixedPointScenario.model_validate(data)})


def sweep_config(
    config: HarnessConfig,
    param: str,
    values: list[float],
    seed_override: Optional[int] = None,
    tol_override: Optional[float] = None,
    jobs: int = 1,
) -> tuple[list[dict], list[BatchResult]]:
    """One batch run per parameter value; rows aggregate (value, scenario,
    check, first_zero, bound, status)."""
    if not values:
        raise ConfigError("sweep needs a nonempty list of values")
    # fail fast on unknown parameters before running anything
    for entry in config.scenarios:
        _with_param(entry, param, values[0])

    rows: list[dict] = []
    batches: list[BatchResult] = []
    for value in values:
        swept = config.model_copy(
            update={"scenarios": [_with_param(e, param, value) for e in config.scenarios]}
        )
        batch = run_config(swept, seed_override=seed_override, tol_override=tol_override, jobs=jobs)
        batches.append(batch)
        for res in batch.scenarios:
            first_zero = res.summary["first_zero_f"]
            if first_zero is None:
                first_zero = res.summary["first_zero_g"]
            if not res.reports:
                rows.append(
                    {"parameter": param, "value": value, "scenario": res.name, "check": "",
                     "first_zero": first_zero, "observed": None, "bound": None, "status": "",
                     "pass": res.ok}
                )
            for kind, rep in res.reports.items():
                if "status" not in rep:
                    continue
                rows.append(
                    {
                        "parameter": param, "value": value, "scenario": res.name, "check": kind,
                        "first_zero": first_zero,
                        "observed": rep.get("observed"),
                        "bound": rep.get("predicted_bound"),
                        "status": rep["status"], "pass": rep["pass"],
                    }
                )
    return rows, batches


def sweep_table(rows: list[dict]) -> str:
    def cell(x):
        if x is None:
            return ""
        if x == math.inf:
            return "inf"
        return fmt17(x)

    lines = ["parameter,value,scenario,check,first_zero,observed,bound,status,pass"]
    for r in rows:
        lines.append(
            f"{r['parameter']},{fmt17(r['value'])},{r['scenario']},{r['check']},"
            f"{cell(r['first_zero'])},{cell(r['observed'])},{cell(r['bound'])},"
            f"{r['status']},{str(r['pass']).lower()}"
        )
    return "\n".join(lines) + "\n"
