"""Result containers for fixed-point runs and index-form evaluations."""

from __future__ import annotations

import enum
import io
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import CubicSpline

from .scenario import FixedPointScenario


def fmt17(x: float) -> str:
    """Format a float with 17 significant digits so CSV output round-trips."""
    return f"{float(x):.17g}"


class Terminated(str, enum.Enum):
    COMPLETED = "completed"
    BLOWUP_DETECTED = "blowup_detected"
    STEP_FAILURE = "step_failure"


@dataclass
class JacobiSolution:
    """Time series of the fixed-point strain components and their running
    integrals, plus first-zero bookkeeping.

    ``winding_integral`` is the rotation clock s(t) (integral of the inverse
    squared, or inverse, radial strain depending on location) and
    ``vorticity_integral`` accumulates the pointwise vorticity magnitude.
    For zero-swirl runs both stay identically zero.
    """

    grid: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    g: np.ndarray
    gp: np.ndarray
    winding_integral: np.ndarray
    vorticity_integral: np.ndarray
    constraint_residual: np.ndarray
    first_zero_f: Optional[float]
    first_zero_g: Optional[float]
    terminated: Terminated
    f_zeros: list[float] = field(default_factory=list)
    g_zeros: list[float] = field(default_factory=list)
    primary_component: str = "f"
    scenario: Optional[FixedPointScenario] = None
    # dense accessors; populated from the integrator or from splines
    _dense: dict[str, Callable] = field(default_factory=dict, repr=False)

    def _interp(self, name: str, series: np.ndarray) -> Callable:
        if name not in self._dense:
            if len(self.grid) < 4:
                self._dense[name] = lambda t, s=series: np.interp(t, self.grid, s)
            else:
                self._dense[name] = CubicSpline(self.grid, series)
        return self._dense[name]

    def eval_f(self, t):
        return self._interp("f", self.f)(t)

    def eval_fp(self, t):
        return self._interp("fp", self.fp)(t)

    def eval_g(self, t):
        return self._interp("g", self.g)(t)

    def eval_winding(self, t):
        return self._interp("winding", self.winding_integral)(t)

    def time_at_winding(self, s_value: float) -> float:
        """Invert the (nondecreasing) winding clock; bisection on dense output."""
        s_fn = self._interp("winding", self.winding_integral)
        a, b = float(self.grid[0]), float(self.grid[-1])
        if s_value <= float(s_fn(a)):
            return a
        if s_value >= float(s_fn(b)):
            return b
        for _ in range(200):
            m = 0.5 * (a + b)
            if float(s_fn(m)) < s_value:
                a = m
            else:
                b = m
            if b - a < 1e-14 * max(1.0, abs(b)):
                break
        return 0.5 * (a + b)

    def summary(self) -> dict:
        return {
            "terminated": self.terminated.value,
            "t_final": float(self.grid[-1]),
            "first_zero_f": self.first_zero_f,
            "first_zero_g": self.first_zero_g,
            "winding_total": float(self.winding_integral[-1]),
            "vorticity_total": float(self.vorticity_integral[-1]),
            "max_constraint_residual": float(np.nanmax(np.abs(self.constraint_residual))),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write("t,f,fp,g,gp,winding,vorticity_int,constraint_res,event\n")
        events = {t: "zero_f" for t in self.f_zeros}
        events.update({t: "zero_g" for t in self.g_zeros})
        for i, t in enumerate(self.grid):
            row = [
                self.f[i], self.fp[i], self.g[i], self.gp[i],
                self.winding_integral[i], self.vorticity_integral[i],
                self.constraint_residual[i],
            ]
            buf.write(fmt17(t) + "," + ",".join(fmt17(x) for x in row) + ",\n")
        for t in sorted(events):
            buf.write(fmt17(t) + ",,,,,,,," + events[t] + "\n")
        return buf.getvalue()


@dataclass
class StretchMatrix:
    """Cauchy-Green tensor of the flow derivative at a fixed point."""

    entries: np.ndarray  # 3x3 symmetric
    time: float

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.entries))

    def inverse_diag(self) -> np.ndarray:
        return np.diag(np.linalg.inv(self.entries)).copy()

    def is_spd(self, tol: float = 0.0) -> bool:
        if not np.allclose(self.entries, self.entries.T):
            return False
        return bool(np.all(np.linalg.eigvalsh(self.entries) > tol))


@dataclass
class VariationField:
    """Trial variation along a trajectory, components along (e_r, e_theta, e_z).

    Optional derivative series carry analytic derivatives of trial families;
    when absent, derivatives are reconstructed at quadrature order.
    """

    grid: np.ndarray
    f: np.ndarray
    g: np.ndarray
    h: np.ndarray
    endpoint_zero: bool = True
    fp: Optional[np.ndarray] = None
    gp: Optional[np.ndarray] = None
    hp: Optional[np.ndarray] = None

    def span(self) -> tuple[float, float]:
        return float(self.grid[0]), float(self.grid[-1])


@dataclass
class IndexFormResult:
    value: float
    kinetic_term: float
    rotation_term: float
    decomposition_valid: bool

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "kinetic_term": self.kinetic_term,
            "rotation_term": self.rotation_term,
            "decomposition_valid": self.decomposition_valid,
        }
