"""Scenario inputs: coefficient profiles, swirl constants, solver tolerances.

Everything here is an immutable pydantic model mirroring the JSON scenario
schema (documented in the README). Parsing enforces shape and types only;
semantic invariants are collected by :func:`validate_scenario` into a report,
so that malformed-but-parseable scenarios can be inspected instead of raising.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field


class _Frozen(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")


# ---------------------------------------------------------------------------
# Coefficient profiles
# ---------------------------------------------------------------------------


class ConstantProfile(_Frozen):
    """Time-independent coefficient."""

    kind: Literal["constant"] = "constant"
    value: float
    description: str = ""

    def value_at(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value) if np.ndim(t) else self.value

    def slope_at(self, t):
        return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        return []

    def declared_bounds(self):
        return (self.value, self.value)


class PiecewiseLinearProfile(_Frozen):
    """Linear interpolation through (t, value) knots, held constant outside."""

    kind: Literal["piecewise_linear"] = "piecewise_linear"
    knots: list[tuple[float, float]]
    description: str = ""

    def _arrays(self):
        ts = np.array([k[0] for k in self.knots], dtype=float)
        vs = np.array([k[1] for k in self.knots], dtype=float)
        return ts, vs

    def value_at(self, t):
        ts, vs = self._arrays()
        out = np.interp(np.asarray(t, dtype=float), ts, vs)
        return out if np.ndim(t) else float(out)

    def slope_at(self, t):
        ts, vs = self._arrays()
        ta = np.asarray(t, dtype=float)
        # slope of the segment containing t; 0 outside the knot span
        idx = np.clip(np.searchsorted(ts, ta, side="right") - 1, 0, len(ts) - 2)
        seg = (vs[idx + 1] - vs[idx]) / (ts[idx + 1] - ts[idx])
        out = np.where((ta < ts[0]) | (ta >= ts[-1]), 0.0, seg)
        return out if np.ndim(t) else float(out)

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        return [k[0] for k in self.knots if t0 < k[0] < t1]

    def declared_bounds(self):
        return None


class BandConstantProfile(_Frozen):
    """Constant coefficient carrying a declared band [lower, upper].

    The band is a global certificate used by hypothesis checks that would
    otherwise only be verified on the sampled window.
    """

    kind: Literal["band_constant"] = "band_constant"
    lower: float
    upper: float
    value: float
    description: str = ""

    def value_at(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.value) if np.ndim(t) else self.value

    def slope_at(self, t):
        return np.zeros_like(np.asarray(t, dtype=float)) if np.ndim(t) else 0.0

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        return []

    def declared_bounds(self):
        return (self.lower, self.upper)


class PoleScaledProfile(_Frozen):
    """Coefficient with a second-order pole at t = T.

    Evaluates the nested profile H in the logarithmic time s = -ln(T - t) and
    scales it by 1/(T-t)^2. Evaluation at t >= T is a domain error.
    """

    kind: Literal["pole_scaled"] = "pole_scaled"
    T: float
    H: "Profile"
    description: str = ""

    def log_time(self, t):
        tau = self.T - np.asarray(t, dtype=float)
        if np.any(tau <= 0.0):
            raise ValueError(f"pole_scaled profile evaluated at t >= T (T={self.T})")
        out = -np.log(tau)
        return out if np.ndim(t) else float(out)

    def value_at(self, t):
        tau = self.T - np.asarray(t, dtype=float)
        if np.any(tau <= 0.0):
            raise ValueError(f"pole_scaled profile evaluated at t >= T (T={self.T})")
        out = self.H.value_at(-np.log(tau)) / tau**2
        return out if np.ndim(t) else float(out)

    def slope_at(self, t):
        tau = self.T - np.asarray(t, dtype=float)
        if np.any(tau <= 0.0):
            raise ValueError(f"pole_scaled profile evaluated at t >= T (T={self.T})")
        s = -np.log(tau)
        out = (self.H.slope_at(s) + 2.0 * self.H.value_at(s)) / tau**3
        return out if np.ndim(t) else float(out)

    def breakpoints(self, t0: float, t1: float) -> list[float]:
        if self.T <= 0:
            return []
        s0, s1 = self.log_time(t0), self.log_time(min(t1, self.T * (1 - 1e-15)))
        return [self.T - math.exp(-s) for s in self.H.breakpoints(s0, s1)]

    def declared_bounds(self):
        return None


Profile = Union[ConstantProfile, PiecewiseLinearProfile, BandConstantProfile, PoleScaledProfile]


class DerivedFromTrace(_Frozen):
    """Marker: derive the vertical pressure coefficient from the trace identity."""

    kind: Literal["derived_from_trace"] = "derived_from_trace"


PoleScaledProfile.model_rebuild()

PressureZZ = Union[
    ConstantProfile, PiecewiseLinearProfile, BandConstantProfile, PoleScaledProfile, DerivedFromTrace
]


# ---------------------------------------------------------------------------
# Scenario
# ---------------------------------------------------------------------------


class SwirlConstants(_Frozen):
    """First-order swirl data at the fixed point.

    b0: radial derivative of the angular velocity at the origin (axis, even).
    b1: angular velocity on the boundary circle (boundary, even).
    b2: its radial derivative (boundary, even).
    b3: its vertical derivative (boundary, odd).
    """

    b0: float = 0.0
    b1: float = 0.0
    b2: float = 0.0
    b3: float = 0.0


class SolverTolerances(_Frozen):
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    f_stop: float = 1e-6
    zero_bisect_tol: float = 1e-12
    quad_points_per_unit: int = 200


class FixedPointScenario(_Frozen):
    """One fixed-point experiment: location, swirl parity, initial strain data,
    hypothesized pressure-Hessian profiles, and solver settings.

    Sign conventions: a0 = -f'(0) is the initial inward radial strain and
    c0z = g'(0) is the initial vertical strain rate.
    """

    location: Literal["axis", "boundary"]
    parity: Literal["even", "odd"]
    swirl: SwirlConstants = SwirlConstants()
    a0: float = 0.0
    c0z: float = 0.0
    pressure_rr: Profile = Field(discriminator="kind")
    pressure_zz: PressureZZ = Field(discriminator="kind", default=DerivedFromTrace())
    t_end: float = 5.0
    tolerances: SolverTolerances = SolverTolerances()

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.model_dump(mode="json"), **kwargs)

    @classmethod
    def from_json(cls, text: str) -> "FixedPointScenario":
        return cls.model_validate(json.loads(text))

    @property
    def zz_derived(self) -> bool:
        return isinstance(self.pressure_zz, DerivedFromTrace)


# ---------------------------------------------------------------------------
# Semantic validation
# ---------------------------------------------------------------------------


@dataclass
class Violation:
    field: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def add(self, field_name: str, message: str) -> None:
        self.violations.append(Violation(field_name, message))

    def to_dict(self) -> dict:
        return {
            "ok": self.ok,
            "violations": [{"field": v.field, "message": v.message} for v in self.violations],
        }


_ALLOWED_SWIRL = {
    ("axis", "even"): ("b0",),
    ("axis", "odd"): (),
    ("boundary", "even"): ("b1", "b2"),
    ("boundary", "odd"): ("b3",),
}


def _validate_profile(profile, field_name: str, report: ValidationReport) -> None:
    if isinstance(profile, PiecewiseLinearProfile):
        if len(profile.knots) < 2:
            report.add(field_name, "piecewise_linear needs at least two knots")
        ts = [k[0] for k in profile.knots]
        if any(b <= a for a, b in zip(ts, ts[1:])):
            report.add(field_name, "piecewise_linear knots must be strictly increasing in t")
    elif isinstance(profile, BandConstantProfile):
        if profile.lower > profile.upper:
            report.add(field_name, "band_constant lower exceeds upper")
        elif not (profile.lower <= profile.value <= profile.upper):
            report.add(field_name, "band_constant value outside declared band")
    elif isinstance(profile, PoleScaledProfile):
        if profile.T <= 0:
            report.add(field_name, "pole_scaled requires T > 0")
        _validate_profile(profile.H, field_name + ".H", report)


def validate_scenario(s: FixedPointScenario) -> ValidationReport:
    """Collect every violated invariant; an empty report means runnable."""
    report = ValidationReport()

    allowed = _ALLOWED_SWIRL[(s.location, s.parity)]
    for name in ("b0", "b1", "b2", "b3"):
        if name not in allowed and getattr(s.swirl, name) != 0.0:
            report.add(
                f"swirl.{name}",
                f"{name} must be zero for a {s.location}/{s.parity}-swirl scenario",
            )

    _validate_profile(s.pressure_rr, "pressure_rr", report)
    if not s.zz_derived:
        _validate_profile(s.pressure_zz, "pressure_zz", report)

    if s.t_end <= 0:
        report.add("t_end", "t_end must be positive")
    for prof, name in ((s.pressure_rr, "pressure_rr"), (s.pressure_zz, "pressure_zz")):
        if isinstance(prof, PoleScaledProfile) and prof.T > 0 and s.t_end >= prof.T:
            report.add("t_end", f"t_end must lie before the {name} pole at T={prof.T}")

    if s.zz_derived:
        # constraint f^2 g = 1 (axis) or f g = 1 (boundary) to first order at t=0
        factor = 2.0 if s.location == "axis" else 1.0
        if not math.isclose(s.c0z, factor * s.a0, rel_tol=0.0, abs_tol=1e-9):
            report.add(
                "c0z",
                f"derived-from-trace data needs c0z = {factor:g}*a0 "
                f"(got c0z={s.c0z!r}, a0={s.a0!r})",
            )

    tol = s.tolerances
    for name in ("rel_tol", "abs_tol", "f_stop", "zero_bisect_tol"):
        if getattr(tol, name) <= 0:
            report.add(f"tolerances.{name}", f"{name} must be strictly positive")
    if tol.quad_points_per_unit <= 0:
        report.add("tolerances.quad_points_per_unit", "must be a positive integer")
    if tol.f_stop >= 1:
        report.add("tolerances.f_stop", "f_stop must be below 1 (the initial strain)")

    return report


def sampled_bounds(profile, times) -> tuple[float, float]:
    """Min/max of a profile over sample times, tightened by a declared band."""
    vals = np.asarray(profile.value_at(np.asarray(times, dtype=float)))
    lo, hi = float(np.min(vals)), float(np.max(vals))
    declared = profile.declared_bounds()
    if declared is not None:
        lo, hi = min(lo, declared[0]), max(hi, declared[1])
    return lo, hi
