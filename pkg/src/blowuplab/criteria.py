"""Executable blowup criteria and the Sturm comparison toolkit.

Each checker turns one sufficient-condition theorem about the fixed-point
strain ODEs into a report: hypotheses are verified by sampling the coefficient
profiles on the finite run window (plus any band a profile declares globally),
the relevant model is integrated, and the observed first vanishing time is
compared against the predicted bound. Hypothesis violations raise
HypothesisNotMet so batch sweeps can record them as outcomes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Optional

import numpy as np

from .engine import EventSpec, SecondOrderIVP, integrate
from .errors import HypothesisNotMet, OrderingViolated
from .models import central_force_oracle, run_boundary_even
from .scenario import (
    BandConstantProfile,
    ConstantProfile,
    FixedPointScenario,
    PoleScaledProfile,
    SolverTolerances,
    sampled_bounds,
)
from .solution import JacobiSolution

LN2 = math.log(2.0)


@dataclass
class CriterionReport:
    criterion: str
    status: str  # PASS | FAIL | INDETERMINATE | HYPOTHESIS_NOT_MET
    hypothesis_window: tuple[float, float]
    predicted_bound: Optional[float]
    observed: Optional[float]
    diagnostics: dict = dc_field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.status == "PASS"

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "hypothesis_window": list(self.hypothesis_window),
            "predicted_bound": self.predicted_bound,
            "observed": self.observed,
            "pass": self.passed,
            "status": self.status,
            "diagnostics": self.diagnostics,
        }


def hypothesis_report(exc: HypothesisNotMet, window: tuple[float, float]) -> CriterionReport:
    return CriterionReport(
        criterion=exc.criterion,
        status="HYPOTHESIS_NOT_MET",
        hypothesis_window=window,
        predicted_bound=None,
        observed=None,
        diagnostics={"reason": exc.reason},
    )


def _sample_times(t0: float, t1: float, grid=None, n: int = 65) -> np.ndarray:
    pts = np.linspace(t0, t1, n)
    if grid is not None and len(grid):
        pts = np.union1d(pts, np.asarray(grid))
    return pts[(pts >= t0) & (pts <= t1)]


# ---------------------------------------------------------------------------
# Sign criterion: nonnegative pressure coefficient + negative initial strain
# ---------------------------------------------------------------------------


def check_sign_criterion(
    sol: JacobiSolution,
    s: FixedPointScenario,
    branch: str = "auto",
    tol: float = 1e-6,
) -> CriterionReport:
    """Concavity comparison: a strain component with y(0)=1, y'(0)<0 and
    y''/y <= 0 (nonnegative pressure coefficient) vanishes by -1/y'(0).

    branch "radial" uses the radial strain (requires the swirl coefficient of
    the f-equation to vanish so it is linear); "vertical" uses the vertical
    strain with an explicit nonnegative P_zz profile; "auto" picks whichever
    branch has its sign conditions satisfied, preferring vertical.
    """
    name = "sign_criterion"
    window = (0.0, float(s.t_end))
    times = _sample_times(*window, grid=sol.grid)

    def vertical_ok():
        if s.zz_derived:
            return "vertical branch needs an explicit pressure_zz profile"
        if not s.c0z < 0:
            return f"vertical branch needs c0z < 0 (got {s.c0z!r})"
        lo, _ = sampled_bounds(s.pressure_zz, times)
        if lo < -1e-12:
            return f"pressure_zz attains {lo:g} < 0 on the window"
        return None

    def radial_ok():
        swirl_coeff = s.swirl.b0 if s.location == "axis" else s.swirl.b1
        if s.parity == "even" and swirl_coeff != 0.0:
            return "radial branch needs a linear radial equation (zero swirl coefficient)"
        if not s.a0 > 0:
            return f"radial branch needs a0 > 0 (got {s.a0!r})"
        lo, _ = sampled_bounds(s.pressure_rr, times)
        if lo < -1e-12:
            return f"pressure_rr attains {lo:g} < 0 on the window"
        return None

    if branch == "auto":
        reasons = {}
        for cand, check in (("vertical", vertical_ok), ("radial", radial_ok)):
            why = check()
            if why is None:
                branch = cand
                break
            reasons[cand] = why
        else:
            raise HypothesisNotMet(name, "; ".join(f"{k}: {v}" for k, v in reasons.items()))
    else:
        why = {"vertical": vertical_ok, "radial": radial_ok}[branch]()
        if why is not None:
            raise HypothesisNotMet(name, why)

    if branch == "vertical":
        slope = s.c0z
        observed = sol.first_zero_g
    else:
        slope = -s.a0
        observed = sol.first_zero_f
        if observed is None and sol.terminated.value == "blowup_detected":
            observed = float(sol.grid[-1])  # guard halt brackets the zero from below
    bound = -1.0 / slope

    if observed is not None:
        status = "PASS" if observed <= bound + tol else "FAIL"
    else:
        status = "FAIL" if sol.grid[-1] >= bound + tol else "INDETERMINATE"
    return CriterionReport(
        criterion=name,
        status=status,
        hypothesis_window=window,
        predicted_bound=bound,
        observed=observed,
        diagnostics={"branch": branch, "initial_slope": slope},
    )


# ---------------------------------------------------------------------------
# Quarter threshold in log time
# ---------------------------------------------------------------------------


def check_quarter_threshold(
    s: FixedPointScenario,
    s_window: float = 50.0,
    cross_check: bool = True,
    spacing_tol: float = 1e-6,
) -> CriterionReport:
    """Oscillation test for pole-scaled radial pressure at a rotating axis point.

    The radial linear equation is transported to logarithmic time where it
    becomes j'' = (1/4 - H) j: a scaled pressure persistently above 1/4 makes
    j oscillate with spacing pi/sqrt(H - 1/4) (unbounded winding), persistently
    below 1/4 leaves finitely many zeros, and sitting at 1/4 is reported as
    indeterminate. The limsup of H is proxied by its maximum over the final
    fifth of the window. Optionally cross-checks the log-time zeros against
    the planar central-force oracle integrated in physical time.
    """
    name = "quarter_threshold"
    window = (0.0, float(s_window))
    prof = s.pressure_rr
    if not isinstance(prof, PoleScaledProfile):
        raise HypothesisNotMet(name, "pressure_rr must be a pole_scaled profile")
    if s.swirl.b0 == 0.0:
        raise HypothesisNotMet(name, "needs nonzero axis swirl coefficient b0")
    T, H = prof.T, prof.H
    if T <= 0:
        raise HypothesisNotMet(name, "pole time T must be positive")
    s0 = -math.log(T)

    def rhs(sig, y, yp):
        return [(0.25 - H.value_at(s0 + sig)) * y[0]]

    j0 = 1.0 / math.sqrt(T)
    jp0 = -math.sqrt(T) * s.a0 + 0.5 * j0
    bps = [b - s0 for b in H.breakpoints(s0, s0 + s_window)]
    traj = integrate(
        SecondOrderIVP(rhs, [j0], [jp0], (0.0, s_window)),
        s.tolerances,
        events=[EventSpec(lambda t, y, yp, ex: y[0], "zero_j", 0)],
        breakpoints=bps,
    )
    sigma_zeros = [rec.time for rec in traj.events]
    spacings = list(np.diff(sigma_zeros)) if len(sigma_zeros) > 1 else []

    tail = _sample_times(0.8 * s_window, s_window, n=257)
    h_tail = np.asarray(H.value_at(s0 + tail))
    limsup_proxy = float(np.max(h_tail))
    liminf_proxy = float(np.min(h_tail))
    h_mean = float(np.mean(h_tail))

    diagnostics: dict = {
        "zero_count": len(sigma_zeros),
        "limsup_proxy": limsup_proxy,
        "liminf_proxy": liminf_proxy,
        "sigma_zeros_head": [float(z) for z in sigma_zeros[:8]],
    }
    predicted = None
    observed = None
    if liminf_proxy > 0.25 + 1e-12:
        classification = "oscillatory"
        predicted = math.pi / math.sqrt(h_mean - 0.25)
        if spacings:
            observed = float(np.mean(spacings))
            max_dev = float(np.max(np.abs(np.asarray(spacings) - predicted)))
            diagnostics["max_spacing_deviation"] = max_dev
            status = "PASS" if max_dev <= spacing_tol else "FAIL"
        else:
            status = "FAIL"
    elif limsup_proxy < 0.25 - 1e-12:
        classification = "non_oscillatory"
        observed = float(len(sigma_zeros))
        status = "PASS" if len(sigma_zeros) <= 1 else "FAIL"
    else:
        classification = "indeterminate"
        status = "INDETERMINATE"
    diagnostics["classification"] = classification

    if cross_check:
        sigma_cross = min(18.0, 0.9 * s_window)
        t_cross = T * (1.0 - math.exp(-sigma_cross))
        oracle = central_force_oracle(
            s.swirl.b0, prof, t_cross, xp0=-s.a0, tolerances=s.tolerances
        )
        t_hi = float(oracle.grid[-1]) * (1.0 - 1e-9)
        mapped = [T * (1.0 - math.exp(-sig)) for sig in sigma_zeros]
        mapped = [t for t in mapped if t <= t_hi]
        x_zeros = [z for z in oracle.g_zeros if z <= t_hi]
        gap = (
            float(np.max(np.abs(np.asarray(mapped) - np.asarray(x_zeros))))
            if len(mapped) == len(x_zeros) and mapped
            else None
        )
        agree = len(mapped) == len(x_zeros) and (gap is None or gap <= 1e-7 * max(1.0, T))
        diagnostics["cross_check"] = {
            "window_end": t_hi,
            "mapped_zero_count": len(mapped),
            "oracle_zero_count": len(x_zeros),
            "max_zero_gap": gap,
            "agree": agree,
        }
        if not agree and status == "PASS":
            status = "FAIL"

    return CriterionReport(
        criterion=name,
        status=status,
        hypothesis_window=window,
        predicted_bound=predicted,
        observed=observed,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Rotation-driven boundary blowup
# ---------------------------------------------------------------------------


def rotation_rate_constant(a0: float, c2: float) -> float:
    """Positive root k of k(k + a0) = c^2 ln 2, in closed form."""
    return 0.5 * (-a0 + math.sqrt(a0 * a0 + 4.0 * c2 * LN2))


def asymptotic_ratio_bound(initial_radial_strain: float, c2: float, k: float) -> float:
    """Late-time upper bound for f1/y1: (k^2 - a k - c^2 ln2)/k^2.

    ``initial_radial_strain`` is the signed slope f'(0) (negative in a blowup
    scenario); with k from the defining equation the bound sits exactly at the
    threshold value 0.
    """
    return (k * k - initial_radial_strain * k - c2 * LN2) / (k * k)


def check_rotation_blowup(s: FixedPointScenario, tol: float = 1e-6) -> CriterionReport:
    """Boundary even-swirl blowup from dominant rotation.

    Requires 2 b1 (b1 + b2) = -c^2 < 0 and a0 = -f'(0) > 0. Branch 2
    (shifted pressure coefficient >= 0) gives the quadratic-envelope bound;
    branch 1 (coefficient in [-k^2, 0]) guarantees an eventual crossing with
    no time bound, which is reported as observed only.
    """
    name = "rotation_blowup"
    window = (0.0, float(s.t_end))
    if (s.location, s.parity) != ("boundary", "even"):
        raise HypothesisNotMet(name, "needs a boundary/even scenario")
    b1, b2 = s.swirl.b1, s.swirl.b2
    c2 = -2.0 * b1 * (b1 + b2)
    if not c2 > 0:
        raise HypothesisNotMet(name, f"needs 2*b1*(b1+b2) < 0 (got c^2 = {c2:g})")
    a = s.a0
    if not a > 0:
        raise HypothesisNotMet(name, f"needs a0 = -f'(0) > 0 (got {a!r})")
    k = rotation_rate_constant(a, c2)

    times = _sample_times(*window)
    lo, hi = sampled_bounds(s.pressure_rr, times)
    f_lo, f_hi = lo + 3.0 * b1 * b1, hi + 3.0 * b1 * b1
    if f_lo >= -1e-12:
        branch = 2
    elif f_hi <= 1e-12 and f_lo >= -k * k - 1e-9:
        branch = 1
    else:
        raise HypothesisNotMet(
            name,
            f"shifted coefficient range [{f_lo:g}, {f_hi:g}] fits neither "
            f"[-k^2, 0] with k={k:g} nor [0, inf)",
        )

    sol = run_boundary_even(s)
    crossed = sol.terminated.value == "blowup_detected"
    observed = sol.first_zero_f if sol.first_zero_f is not None else (
        float(sol.grid[-1]) if crossed else None
    )

    diagnostics: dict = {
        "branch": branch,
        "k": k,
        "c2": c2,
        "coefficient_range": [f_lo, f_hi],
        "ratio_bound_threshold": asymptotic_ratio_bound(-a, c2, k),
        "ratio_bound_strict": -2.0 * a / k,
    }

    if isinstance(s.pressure_rr, (ConstantProfile, BandConstantProfile)):
        # companion y1'' = -F y1 with unit data, for the late-time ratio bound
        F_const = s.pressure_rr.value_at(0.0) + 3.0 * b1 * b1
        t_ref = observed if observed is not None else float(sol.grid[-1])
        comp = integrate(
            SecondOrderIVP(lambda t, y, yp: [-F_const * y[0]], [1.0], [0.0], (0.0, max(t_ref, 1e-9))),
            s.tolerances,
        )
        y1_end = float(comp.y[0, -1])
        f_end = float(sol.f[-1])
        diagnostics["observed_end_ratio"] = f_end / y1_end
        diagnostics["ratio_bound_satisfied"] = f_end / y1_end <= diagnostics["ratio_bound_threshold"] + tol

    if branch == 2:
        t_star = (-a + math.sqrt(a * a + 2.0 * c2)) / c2
        status = "PASS" if (observed is not None and observed <= t_star + tol) else (
            "FAIL" if sol.grid[-1] >= t_star + tol else "INDETERMINATE"
        )
        predicted = t_star
    else:
        predicted = None
        status = "PASS" if crossed else "INDETERMINATE"
        if not crossed:
            diagnostics["note"] = "no crossing within window; branch 1 carries no time bound"
    return CriterionReport(
        criterion=name,
        status=status,
        hypothesis_window=window,
        predicted_bound=predicted,
        observed=observed,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# Monotone pressure derivative
# ---------------------------------------------------------------------------


def check_monotone_pressure(s: FixedPointScenario, tol: float = 1e-6) -> CriterionReport:
    """Vertical-strain blowup from a nondecreasing pressure coefficient.

    With Q(0) < 0, g'(0) = -a < 0, nu^2 = a^2 + Q(0) >= 0 and Q nondecreasing,
    the vertical strain satisfies g(t) <= 1 - nu t and vanishes by 1/nu. The
    proof's energy identity g'^2 + Q g^2 - int Q' g^2 = nu^2 is carried as an
    extra integrator state and its drift is reported. The marginal case
    nu = 0 keeps the envelope g <= 1 with a vacuous time bound.
    """
    name = "monotone_pressure"
    window = (0.0, float(s.t_end))
    if s.zz_derived:
        raise HypothesisNotMet(name, "needs an explicit pressure_zz profile")
    q = s.pressure_zz
    a = -s.c0z
    if not a > 0:
        raise HypothesisNotMet(name, f"needs c0z < 0 (got {s.c0z!r})")
    q0 = float(q.value_at(0.0))
    if not q0 < 0:
        raise HypothesisNotMet(name, f"needs Q(0) < 0 (got {q0:g})")
    nu2 = a * a + q0
    if nu2 < 0:
        raise HypothesisNotMet(name, f"needs nu^2 = a^2 + Q(0) >= 0 (got {nu2:g})")
    times = _sample_times(*window, n=257)
    vals = np.asarray(q.value_at(times))
    slopes = np.asarray(q.slope_at(times))
    if np.any(np.diff(vals) < -1e-12) or np.any(slopes < -1e-12):
        raise HypothesisNotMet(name, "Q must be nondecreasing on the window")

    traj = integrate(
        SecondOrderIVP(lambda t, y, yp: [-q.value_at(t) * y[0]], [1.0], [-a], (0.0, s.t_end)),
        s.tolerances,
        events=[EventSpec(lambda t, y, yp, ex: y[0], "zero_g", 0)],
        integrands=[lambda t, y, yp: q.slope_at(t) * y[0] ** 2],
        breakpoints=q.breakpoints(0.0, s.t_end),
    )
    zeros = [rec.time for rec in traj.events]
    observed = zeros[0] if zeros else None

    g, gp, acc = traj.y[0], traj.yp[0], traj.extras[0]
    energy = gp**2 + np.asarray(q.value_at(traj.t)) * g**2 - acc
    drift = float(np.max(np.abs(energy - nu2)) / max(nu2, a * a))

    nu = math.sqrt(nu2)
    bound = (1.0 / nu) if nu > 0 else math.inf
    upto = observed if observed is not None else float(traj.t[-1])
    mask = traj.t <= upto
    envelope_excess = float(np.max(g[mask] - (1.0 - nu * traj.t[mask])))
    envelope_ok = envelope_excess <= tol

    if nu == 0.0:
        status = "PASS" if envelope_ok else "FAIL"
    elif observed is not None:
        status = "PASS" if (observed <= bound + tol and envelope_ok) else "FAIL"
    else:
        status = "FAIL" if traj.t[-1] >= bound + tol else "INDETERMINATE"
    return CriterionReport(
        criterion=name,
        status=status,
        hypothesis_window=window,
        predicted_bound=bound,
        observed=observed,
        diagnostics={
            "nu": nu,
            "nu_squared": nu2,
            "energy_drift_rel": drift,
            "envelope_excess": envelope_excess,
        },
    )


# ---------------------------------------------------------------------------
# Sturm comparison toolkit
# ---------------------------------------------------------------------------


@dataclass
class ComparisonReport:
    ordering_ok: bool
    zeros_fast: list[float]  # zeros of the Q1 (larger-coefficient) solution
    zeros_slow: list[float]  # zeros of the Q2 solution
    separation_ok: bool
    gap_counts: list[int]
    envelope: Optional[dict]
    companion: Optional[dict]

    def to_dict(self) -> dict:
        return {
            "ordering_ok": self.ordering_ok,
            "zeros_q1": self.zeros_fast,
            "zeros_q2": self.zeros_slow,
            "separation_ok": self.separation_ok,
            "gap_counts": self.gap_counts,
            "envelope": self.envelope,
            "companion": self.companion,
        }


def sturm_compare(
    q1,
    q2,
    data: tuple[float, float] = (1.0, 0.0),
    span: tuple[float, float] = (0.0, 3.0),
    tolerances: SolverTolerances = SolverTolerances(),
    envelope_tol: float = 1e-8,
) -> ComparisonReport:
    """Compare y'' = -Q1 y against y'' = -Q2 y for Q1 >= Q2 on the span.

    Verifies zero separation (each gap between consecutive zeros of the slow
    solution contains a zero of the fast one), checks the cosh envelope
    1 <= y1 <= cosh(k t) when Q1 is nonpositive with unit initial data, and
    validates the reduction-of-order companion y2 = y1 * int ds/y1^2 of the
    Q2 equation against a directly integrated companion solution.
    """
    t0, t1 = span
    times = _sample_times(t0, t1, n=257)
    v1 = np.asarray(q1.value_at(times), dtype=float)
    v2 = np.asarray(q2.value_at(times), dtype=float)
    if np.any(v1 < v2 - 1e-12):
        raise OrderingViolated(
            f"Q1 < Q2 at t={times[int(np.argmin(v1 - v2))]:g} on the sampled span"
        )

    def run(q, y0, yp0, integrands=()):
        return integrate(
            SecondOrderIVP(lambda t, y, yp: [-q.value_at(t) * y[0]], [y0], [yp0], (t0, t1)),
            tolerances,
            events=[EventSpec(lambda t, y, yp, ex: y[0], "zero", 0)],
            integrands=integrands,
            breakpoints=q.breakpoints(t0, t1),
        )

    traj1 = run(q1, *data)
    traj2 = run(q2, *data)
    zeros1 = [rec.time for rec in traj1.events]
    zeros2 = [rec.time for rec in traj2.events]

    gap_counts = []
    for a, b in zip(zeros2, zeros2[1:]):
        gap_counts.append(sum(1 for z in zeros1 if a < z < b))
    separation_ok = all(c >= 1 for c in gap_counts)

    envelope = None
    if data == (1.0, 0.0) and float(np.max(v1)) <= 1e-12:
        k_env = math.sqrt(max(0.0, -float(np.min(v1))))
        y1 = traj1.y[0]
        upper = np.cosh(k_env * traj1.t)
        excess = float(np.max((y1 - upper) / upper))  # relative: cosh grows fast
        envelope = {
            "k": k_env,
            "min_y1": float(np.min(y1)),
            "max_excess_over_cosh": excess,
            "ok": bool(np.min(y1) >= 1.0 - envelope_tol and excess <= envelope_tol),
        }

    # reduction-of-order companion for the Q2 equation
    companion = None
    principal = run(q2, 1.0, 0.0)
    p_zeros = [rec.time for rec in principal.events]
    comp_end = t1 if not p_zeros else t0 + 0.9 * (p_zeros[0] - t0)
    if comp_end > t0:
        base = integrate(
            SecondOrderIVP(
                lambda t, y, yp: [-q2.value_at(t) * y[0]], [1.0], [0.0], (t0, comp_end)
            ),
            tolerances,
            integrands=[lambda t, y, yp: 1.0 / y[0] ** 2],
            breakpoints=q2.breakpoints(t0, comp_end),
        )
        direct = integrate(
            SecondOrderIVP(
                lambda t, y, yp: [-q2.value_at(t) * y[0]], [0.0], [1.0], (t0, comp_end)
            ),
            tolerances,
            breakpoints=q2.breakpoints(t0, comp_end),
        )
        grid = np.linspace(t0, comp_end, 201)
        y1_vals = base.state_at(grid)[0]
        red = y1_vals * base.state_at(grid)[2]
        dir_vals = direct.state_at(grid)[0]
        companion = {
            "window_end": comp_end,
            "max_deviation": float(np.max(np.abs(red - dir_vals))),
            "values_head": [float(v) for v in red[:3]],
        }

    return ComparisonReport(
        ordering_ok=True,
        zeros_fast=zeros1,
        zeros_slow=zeros2,
        separation_ok=separation_ok,
        gap_counts=gap_counts,
        envelope=envelope,
        companion=companion,
    )
