"""Stretch matrices, the localized index form, conjugate-point search, and
the stretching-alignment diagnostics.

The index form along a trajectory is

    I(v, v) = integral of <Lambda(t) v', v'> + <w x v, v'> dt

with Lambda the Cauchy-Green tensor of the flow derivative and w the
effective point rotation (b0 e_z on the axis with even swirl, (b1+b2) e_z on
the boundary, -b3 e_r in the odd boundary case). Negative values on an
endpoint-vanishing variation certify a conjugate pair inside the interval.
Stretch matrices always derive the vertical strain from incompressibility, so
det Lambda = 1 holds to roundoff regardless of how the run tracked g.

Quadrature is composite Simpson on the variation's own grid; trial builders
place nodes uniformly in the natural oscillation variable (rescaled winding
time on the axis, log time near the pole for boundary trials) so the Simpson
error stays controlled however close the window sits to the blowup time.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Literal, Optional

import numpy as np
from scipy.integrate import cumulative_simpson, simpson

from .errors import EndpointNonzero, NonMonotoneTimes, NonpositiveF, ZeroVorticity
from .scenario import FixedPointScenario
from .scenario import _Frozen
from .solution import IndexFormResult, JacobiSolution, StretchMatrix, VariationField, fmt17


def rotation_vector(s: FixedPointScenario) -> tuple[float, str]:
    """Effective rotation coefficient entering the index form and its axis."""
    if s.location == "axis":
        return (s.swirl.b0, "z") if s.parity == "even" else (0.0, "z")
    if s.parity == "even":
        return (s.swirl.b1 + s.swirl.b2, "z")
    return (-s.swirl.b3, "r")


# ---------------------------------------------------------------------------
# Stretch matrices
# ---------------------------------------------------------------------------


def _primary_series(sol: JacobiSolution, s: FixedPointScenario, t):
    """Radial strain f at times t, derived from whichever component the run
    integrated; vertical partner from the incompressibility constraint."""
    t = np.asarray(t, dtype=float)
    if getattr(sol, "primary_component", "f") == "g":
        g = np.asarray(sol.eval_g(t))
        f = g ** (-0.5) if s.location == "axis" else 1.0 / g
    else:
        f = np.asarray(sol.eval_f(t))
        g = f ** (-2.0) if s.location == "axis" else 1.0 / f
    return f, g


def stretch_entries(sol: JacobiSolution, s: FixedPointScenario, t) -> dict[str, np.ndarray]:
    """Entries of Lambda(t) (symmetric 3x3) at times t, vectorized."""
    t = np.asarray(t, dtype=float)
    f, g = _primary_series(sol, s, t)
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise NonpositiveF("stretch matrix needs positive radial strain on the window")
    zero = np.zeros_like(f)
    if s.location == "axis":
        return {"11": f**2, "12": zero, "13": zero, "22": f**2, "23": zero, "33": g**2}
    if s.parity == "even":
        b2 = s.swirl.b2
        return {
            "11": f**2 + (b2 * t) ** 2, "12": b2 * t, "13": zero,
            "22": np.ones_like(f), "23": zero, "33": g**2,
        }
    b3 = s.swirl.b3
    return {
        "11": f**2, "12": zero, "13": zero,
        "22": np.ones_like(f), "23": b3 * t, "33": (b3 * t) ** 2 + g**2,
    }


def deformation_rows(sol: JacobiSolution, s: FixedPointScenario, t):
    """Rows of the flow derivative D(eta) at times t (vectorized).

    Lets the index-form kinetic term be computed as |D(eta) v'|^2, a sum of
    squares: assembling <Lambda v', v'> from Lambda entries instead cancels
    catastrophically for log-oscillator trials close to the pole.
    """
    t = np.asarray(t, dtype=float)
    f, g = _primary_series(sol, s, t)
    zero = np.zeros_like(f)
    one = np.ones_like(f)
    if s.location == "axis":
        return [(f, zero, zero), (zero, f, zero), (zero, zero, g)]
    if s.parity == "even":
        return [(f, zero, zero), (s.swirl.b2 * t, one, zero), (zero, zero, g)]
    return [(f, zero, zero), (zero, one, s.swirl.b3 * t), (zero, zero, g)]


def build_stretch(sol: JacobiSolution, s: FixedPointScenario, t: float) -> StretchMatrix:
    e = stretch_entries(sol, s, np.asarray([t]))
    m = np.array(
        [
            [e["11"][0], e["12"][0], e["13"][0]],
            [e["12"][0], e["22"][0], e["23"][0]],
            [e["13"][0], e["23"][0], e["33"][0]],
        ]
    )
    return StretchMatrix(entries=m, time=float(t))


# ---------------------------------------------------------------------------
# Index form quadrature
# ---------------------------------------------------------------------------


def _quadratic_derivative(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Derivative at the nodes of the local parabola through node triples."""
    d = np.empty_like(y)
    x0, x1, x2 = x[:-2], x[1:-1], x[2:]
    y0, y1, y2 = y[:-2], y[1:-1], y[2:]
    d[1:-1] = (
        y0 * (x1 - x2) / ((x0 - x1) * (x0 - x2))
        + y1 * (2 * x1 - x0 - x2) / ((x1 - x0) * (x1 - x2))
        + y2 * (x1 - x0) / ((x2 - x0) * (x2 - x1))
    )
    for i, (a, b, c) in ((0, (x[0], x[1], x[2])), (-1, (x[-1], x[-3], x[-2]))):
        ya, yb, yc = (y[0], y[1], y[2]) if i == 0 else (y[-1], y[-3], y[-2])
        d[i] = (
            ya * (2 * a - b - c) / ((a - b) * (a - c))
            + yb * (a - c) / ((b - a) * (b - c))
            + yc * (a - b) / ((c - a) * (c - b))
        )
    return d


def index_form(
    v: VariationField,
    sol: JacobiSolution,
    s: FixedPointScenario,
    interval: Optional[tuple[float, float]] = None,
) -> IndexFormResult:
    """Quadrature of the localized index form for one trial variation.

    The variation's own grid supplies the Simpson nodes; derivatives use the
    stored analytic series when present and the quadratic interpolant through
    node triples otherwise. Raises EndpointNonzero when a field declared
    endpoint-vanishing fails to vanish.
    """
    grid = np.asarray(v.grid, dtype=float)
    comps = [np.asarray(c, dtype=float) for c in (v.f, v.g, v.h)]
    if interval is not None:
        lo, hi = interval
        mask = (grid >= lo - 1e-12) & (grid <= hi + 1e-12)
        if mask.sum() < 3:
            raise ValueError("interval leaves fewer than three variation nodes")
        grid = grid[mask]
        comps = [c[mask] for c in comps]
    scale = max(float(np.max(np.abs(c))) for c in comps) or 1.0
    if v.endpoint_zero:
        for c in comps:
            if abs(c[0]) > 1e-8 * scale or abs(c[-1]) > 1e-8 * scale:
                raise EndpointNonzero(
                    "variation declared endpoint-vanishing has nonzero endpoint values"
                )

    ders = []
    for series, comp in zip((v.fp, v.gp, v.hp), comps):
        if series is not None and interval is None:
            ders.append(np.asarray(series, dtype=float))
        else:
            ders.append(_quadratic_derivative(grid, comp))
    fd, gd, hd = ders
    fv, gv, hv = comps

    rows = deformation_rows(sol, s, grid)
    kinetic_integrand = sum(
        (r[0] * fd + r[1] * gd + r[2] * hd) ** 2 for r in rows
    )
    w, axis = rotation_vector(s)
    if axis == "z":
        rotation_integrand = w * (fv * gd - gv * fd)
    else:
        rotation_integrand = w * (gv * hd - hv * gd)

    kinetic = float(simpson(kinetic_integrand, x=grid))
    rotation = float(simpson(rotation_integrand, x=grid))
    joint = float(simpson(kinetic_integrand + rotation_integrand, x=grid))
    value = kinetic + rotation
    ok = abs(value - joint) <= 1e-9 * max(1.0, abs(value))
    return IndexFormResult(
        value=value, kinetic_term=kinetic, rotation_term=rotation, decomposition_valid=ok
    )


# ---------------------------------------------------------------------------
# Trial variation families
# ---------------------------------------------------------------------------


def _odd_points(n: int) -> int:
    return n if n % 2 == 1 else n + 1


def axis_rotation_trial(
    sol: JacobiSolution,
    s: FixedPointScenario,
    t1: float,
    t2: float,
    mode: int = 1,
    mean_zero: bool = True,
    points: Optional[int] = None,
) -> VariationField:
    """Sine-in-rescaled-time rotational trial on [t1, t2] (axis, even swirl).

    f is a sine of the winding clock s(t); the angular component integrates
    g' = k - b0 f / f_sol^2 with k zeroing the mean of g' (mean_zero=True,
    keeps the endpoints of g at zero) or k = 0 (pure completed-square
    cancellation; g then ends nonzero for odd modes and the index form equals
    the reduced rescaled-time integral exactly).
    """
    w = s.swirl.b0
    n = _odd_points(points or max(513, int(s.tolerances.quad_points_per_unit * (t2 - t1))))
    s1 = float(sol.eval_winding(t1))
    s2 = float(sol.eval_winding(t2))
    L = s2 - s1
    if L <= 0:
        raise ValueError("winding clock does not advance on the interval")

    # nodes approximately uniform in the winding variable
    t_fine = np.linspace(t1, t2, 4 * n)
    s_fine = np.asarray(sol.eval_winding(t_fine))
    sigma_targets = np.linspace(0.0, L, n)
    grid = np.interp(s1 + sigma_targets, s_fine, t_fine)
    grid[0], grid[-1] = t1, t2
    sigma = np.asarray(sol.eval_winding(grid)) - s1

    m = mode
    fsol = np.asarray(sol.eval_f(grid))
    f = np.sin(m * np.pi * sigma / L)
    f[0] = f[-1] = 0.0
    fp = (m * np.pi / L) * np.cos(m * np.pi * sigma / L) / fsol**2

    k = w * (1.0 - math.cos(m * math.pi)) * L / (m * math.pi) / (t2 - t1) if mean_zero else 0.0
    g = k * (grid - t1) - w * (L / (m * math.pi)) * (1.0 - np.cos(m * np.pi * sigma / L))
    gp = k - w * f / fsol**2
    g_end_zero = abs(g[-1]) <= 1e-9 * max(1.0, float(np.max(np.abs(g))))
    h = np.zeros_like(grid)
    return VariationField(
        grid=grid, f=f, g=g, h=h,
        endpoint_zero=bool(g_end_zero), fp=fp, gp=gp, hp=np.zeros_like(grid),
    )


def log_oscillator_zeros(
    blowup_time: float, psi: float, phi: float, t_lo: float, t_hi: float
) -> list[float]:
    """Zeros of cos(psi/2 * ln(T - t) + phi) in (t_lo, t_hi), increasing."""
    u_hi = math.log(blowup_time - t_lo)  # earliest time -> largest u
    u_lo = math.log(blowup_time - t_hi)
    n_min = math.ceil((psi / 2.0 * u_lo + phi - math.pi / 2.0) / math.pi)
    zeros = []
    n = n_min
    while True:
        u = (math.pi / 2.0 + n * math.pi - phi) * 2.0 / psi
        if u > u_hi:
            break
        zeros.append(blowup_time - math.exp(u))
        n += 1
    return sorted(zeros)


def boundary_rotation_trial(
    sol: JacobiSolution,
    s: FixedPointScenario,
    window: tuple[float, float, float],
    psi: float,
    phi: float,
    blowup_time: float,
    points: Optional[int] = None,
) -> list[VariationField]:
    """Log-oscillator rotational trial on paired half-periods (boundary, even).

    The radial component follows (T-t)^(-1/2) cos(psi/2 ln(T-t) + phi) between
    three consecutive zeros, with the second half rescaled so the time mean of
    f vanishes exactly; the angular component is then
    g = -b1 * int(f) - b2 * t * f, vanishing at both window ends. Nodes are
    placed uniformly in ln(T-t) per half so the quadrature resolves the
    oscillation however close the window sits to T. The rescaling kinks the
    derivative at the middle zero, so the trial is returned as its two smooth
    half-period pieces (each with one-sided derivative values); the index form
    of the assembled variation is the sum over the pieces.
    """
    b1, b2 = s.swirl.b1, s.swirl.b2
    za, zm, zb = window
    T = blowup_time
    half_n = _odd_points((points or 801) // 2 + 1)

    def half_nodes(a, b):
        ua, ub = math.log(T - a), math.log(T - b)
        u = np.linspace(ua, ub, half_n)
        t = T - np.exp(u)
        t[0], t[-1] = a, b
        return t

    def oscillator(t):
        tau = T - t
        arg = 0.5 * psi * np.log(tau) + phi
        f0 = np.cos(arg) / np.sqrt(tau)
        fp0 = (0.5 * np.cos(arg) + 0.5 * psi * np.sin(arg)) * tau**-1.5
        return f0, fp0

    def antiderivative(t):
        # exact primitive of the oscillator: int f0 dt = -2 e^{u/2}(cos + psi sin)/(1+psi^2)
        u = np.log(T - t)
        arg = 0.5 * psi * u + phi
        return -2.0 * np.exp(0.5 * u) * (np.cos(arg) + psi * np.sin(arg)) / (1.0 + psi * psi)

    prim_za, prim_zm, prim_zb = (float(antiderivative(np.asarray([z]))[0]) for z in (za, zm, zb))
    int_a = prim_zm - prim_za
    int_b = prim_zb - prim_zm
    lam = -int_a / int_b if int_b != 0 else 1.0
    # closed-form normalization: int f^2 dt is pi/psi per half-period, so the
    # certificate magnitude is the same however close the window sits to T
    scale = 1.0 / math.sqrt((math.pi / psi) * (1.0 + lam * lam))

    pieces = []
    for (a, b), factor, cum0 in (((za, zm), 1.0, 0.0), ((zm, zb), lam, int_a)):
        t = half_nodes(a, b)
        f0, fp0 = oscillator(t)
        f0[0] = f0[-1] = 0.0
        f = scale * factor * f0
        fp = scale * factor * fp0
        cum = scale * (cum0 + factor * (antiderivative(t) - float(antiderivative(np.asarray([a]))[0])))
        g = -b1 * cum - b2 * t * f
        gp = -b1 * f - b2 * (f + t * fp)
        pieces.append(
            VariationField(
                grid=t, f=f, g=g, h=np.zeros_like(t),
                endpoint_zero=False, fp=fp, gp=gp, hp=np.zeros_like(t),
            )
        )
    return pieces


def sine_window_trial(
    t1: float, t2: float, modes: tuple[int, int, int], points: int = 513
) -> VariationField:
    """Plain sine trial in physical time with all components endpoint-vanishing."""
    grid = np.linspace(t1, t2, _odd_points(points))
    L = t2 - t1
    comps, ders = [], []
    for m in modes:
        if m == 0:
            comps.append(np.zeros_like(grid))
            ders.append(np.zeros_like(grid))
        else:
            comps.append(np.sin(m * np.pi * (grid - t1) / L))
            ders.append((m * np.pi / L) * np.cos(m * np.pi * (grid - t1) / L))
            comps[-1][0] = comps[-1][-1] = 0.0
    return VariationField(
        grid=grid, f=comps[0], g=comps[1], h=comps[2],
        endpoint_zero=True, fp=ders[0], gp=ders[1], hp=ders[2],
    )


# ---------------------------------------------------------------------------
# Conjugate search
# ---------------------------------------------------------------------------


class LogOscillatorParams(_Frozen):
    zeta: Optional[float] = None
    q: Optional[float] = None
    psi: Optional[float] = None
    phi: float = 0.0


class ConjugateSearchParams(_Frozen):
    mode_counts: list[int] = [1, 2, 3]
    family: Literal["auto", "sine_rescaled", "log_oscillator"] = "auto"
    log_params: Optional[LogOscillatorParams] = None
    mean_zero: bool = True
    tol_negative: float = 1e-10

    def validated(self) -> "ConjugateSearchParams":
        lp = self.log_params
        if lp and lp.zeta is not None and lp.q is not None and lp.psi is not None:
            if lp.zeta**2 > lp.q**2:
                expected = math.sqrt(lp.zeta**2 / lp.q**2 - 1.0)
                if abs(lp.psi - expected) > 1e-9 * max(1.0, expected):
                    raise ValueError(
                        f"inconsistent log-oscillator parameters: psi={lp.psi:g}, "
                        f"zeta/q imply {expected:g}"
                    )
        return self


@dataclass
class ConjugateReport:
    status: str  # found | none_found
    family: str
    intervals: list[dict]  # {t1, t2, value, trial}
    times: list[float]
    gap_sum: float
    diagnostics: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "status": self.status,
            "family": self.family,
            "intervals": [
                {k: (v if not isinstance(v, float) else v) for k, v in iv.items()}
                for iv in self.intervals
            ],
            "times": self.times,
            "gap_sum": self.gap_sum,
            "diagnostics": self.diagnostics,
        }


def curvature_gap_sum(conjugate_times: list[float]) -> float:
    """Lower bound sum(2 / gap) on the integrated curvature implied by a chain
    of consecutive conjugate pairs."""
    times = list(conjugate_times)
    if any(b <= a for a, b in zip(times, times[1:])):
        raise NonMonotoneTimes("conjugate times must be strictly increasing")
    if len(times) < 2:
        return 0.0
    return float(sum(2.0 / (b - a) for a, b in zip(times, times[1:])))


def evaluate_trial(trial, sol, s) -> IndexFormResult:
    """Index form of a trial given as one field or a list of smooth pieces."""
    pieces = trial if isinstance(trial, list) else [trial]
    kin = rot = 0.0
    ok = True
    for p in pieces:
        r = index_form(p, sol, s)
        kin += r.kinetic_term
        rot += r.rotation_term
        ok = ok and r.decomposition_valid
    return IndexFormResult(value=kin + rot, kinetic_term=kin, rotation_term=rot,
                           decomposition_valid=ok)


def _stable_negative(
    build, sol, s, tol_negative: float, base_points: int
) -> Optional[IndexFormResult]:
    """Accept a negative certificate only if doubling the quadrature moves the
    value by less than 1e-7."""
    r1 = evaluate_trial(build(base_points), sol, s)
    r2 = evaluate_trial(build(2 * base_points), sol, s)
    if abs(r2.value - r1.value) < 1e-7 and r2.value < -tol_negative:
        return r2
    return None


def find_conjugate(
    sol: JacobiSolution,
    s: FixedPointScenario,
    params: Optional[ConjugateSearchParams] = None,
) -> ConjugateReport:
    """Scan trial variations for negative index-form intervals along a run.

    Axis, even swirl: sine trials in the rescaled winding time, marching
    contiguous windows toward the end of the run and growing a window when no
    mode certifies. Boundary, even swirl: paired log-oscillator half-period
    windows accumulating geometrically at the (estimated or prescribed)
    blowup time. Odd-swirl runs are scanned with plain sine trials and report
    none_found, matching the positivity of the odd index form.
    """
    params = (params or ConjugateSearchParams()).validated()
    diagnostics: dict = {}

    if s.parity == "odd":
        intervals: list[dict] = []
        t0, t1 = float(sol.grid[0]), float(sol.grid[-1])
        worst = math.inf
        for a, b in ((t0, 0.5 * (t0 + t1)), (0.5 * (t0 + t1), t1), (t0, t1)):
            for modes in ((1, 0, 0), (0, 1, 0), (0, 0, 1), (1, 2, 0), (0, 1, 1), (2, 1, 3)):
                res = index_form(sine_window_trial(a, b, modes), sol, s)
                worst = min(worst, res.value)
                if res.value < -params.tol_negative:
                    intervals.append({"t1": a, "t2": b, "value": res.value, "trial": str(modes)})
        diagnostics["min_index_value"] = worst
        status = "found" if intervals else "none_found"
        return ConjugateReport(status, "sine_windows", intervals, [], 0.0, diagnostics)

    family = params.family
    if family == "auto":
        family = "sine_rescaled" if s.location == "axis" else "log_oscillator"

    if family == "sine_rescaled":
        w = s.swirl.b0 if s.location == "axis" else s.swirl.b1 + s.swirl.b2
        if w == 0.0:
            return ConjugateReport(
                "none_found", family, [], [], 0.0, {"reason": "no rotation at the fixed point"}
            )
        s_total = float(sol.winding_integral[-1])
        base_len = 2.0 * math.pi / abs(w) * 1.15
        diagnostics.update({"winding_total": s_total, "base_window_s": base_len})
        intervals = []
        t_a = float(sol.grid[0])
        while True:
            s_a = float(sol.eval_winding(t_a))
            hit = None
            for j in range(4):
                L = base_len * (1.25**j)
                if s_a + L > s_total:
                    break
                t_b = sol.time_at_winding(s_a + L)
                for m in dict.fromkeys(params.mode_counts + [2]):
                    res = _stable_negative(
                        lambda n, m=m, t_b=t_b: axis_rotation_trial(
                            sol, s, t_a, t_b, mode=m, mean_zero=params.mean_zero, points=n
                        ),
                        sol, s, params.tol_negative, 513,
                    )
                    if res is not None:
                        hit = {"t1": t_a, "t2": t_b, "value": res.value, "trial": f"sine m={m}"}
                        break
                if hit:
                    break
            if hit is None:
                break
            intervals.append(hit)
            t_a = hit["t2"]
        times = [intervals[0]["t1"]] + [iv["t2"] for iv in intervals] if intervals else []
        gap = curvature_gap_sum(times) if len(times) > 1 else 0.0
        status = "found" if intervals else "none_found"
        return ConjugateReport(status, family, intervals, times, gap, diagnostics)

    # log-oscillator family on the boundary
    b1, b2 = s.swirl.b1, s.swirl.b2
    lp = params.log_params or LogOscillatorParams()
    zeta_sq = lp.zeta**2 if lp.zeta is not None else 4.0 * b1 * (b1 + b2)
    if zeta_sq <= 0:
        return ConjugateReport(
            "none_found", family, [], [], 0.0,
            {"reason": f"rotation condition fails: 4*b1*(b1+b2) = {zeta_sq:g} <= 0"},
        )
    t_last = float(sol.grid[-1])
    f_last = float(sol.f[-1])
    fp_last = float(sol.fp[-1])
    if sol.first_zero_f is not None:
        T, t_source = float(sol.first_zero_f), "first_zero_f"
    elif fp_last < 0:
        T, t_source = t_last + f_last / abs(fp_last), "linear_extrapolation"
    else:
        return ConjugateReport(
            "none_found", family, [], [], 0.0,
            {"reason": "radial strain is not decaying; no blowup time to anchor the family"},
        )
    if lp.q is not None:
        q, q_source = lp.q, "params"
    else:
        q, q_source = abs(fp_last), "estimate_fp_last"
    diagnostics.update(
        {"blowup_time": T, "blowup_time_source": t_source, "q": q, "q_source": q_source,
         "zeta_squared": zeta_sq}
    )
    if zeta_sq <= q * q:
        return ConjugateReport(
            "none_found", family, [], [], 0.0,
            dict(diagnostics, reason=f"needs zeta^2 > q^2 (zeta^2={zeta_sq:g}, q^2={q*q:g})"),
        )

    if lp.psi is not None:
        psi_trials = [lp.psi]
    else:
        psi_trials = [
            math.sqrt(zeta_sq / (q * fac) ** 2 - 1.0)
            for fac in (1.1, 1.3, 1.6, 2.0)
            if (q * fac) ** 2 < zeta_sq
        ]
    if not psi_trials:
        return ConjugateReport(
            "none_found", family, [], [], 0.0,
            dict(diagnostics, reason="zeta^2 barely exceeds q^2; no room for an oscillating trial"),
        )

    t_lo, t_hi = float(sol.grid[0]), min(t_last, T * (1 - 1e-15))
    for psi in psi_trials:
        zeros = log_oscillator_zeros(T, psi, lp.phi, t_lo, t_hi)
        intervals = []
        i = 0
        while i < len(zeros) - 2:
            za, zm, zb = zeros[i], zeros[i + 1], zeros[i + 2]
            res = _stable_negative(
                lambda n: boundary_rotation_trial(sol, s, (za, zm, zb), psi, lp.phi, T, points=n),
                sol, s, params.tol_negative, 801,
            )
            if res is not None:
                intervals.append(
                    {"t1": za, "t2": zb, "value": res.value, "trial": f"log_osc psi={psi:.6g}"}
                )
            i += 2
        if intervals:
            times = [intervals[0]["t1"]] + [iv["t2"] for iv in intervals]
            contiguous = all(
                abs(intervals[k + 1]["t1"] - intervals[k]["t2"]) < 1e-12
                for k in range(len(intervals) - 1)
            )
            gap = curvature_gap_sum(times) if (contiguous and len(times) > 1) else 0.0
            diagnostics["psi"] = psi
            return ConjugateReport("found", family, intervals, times, gap, diagnostics)
    diagnostics["psi_trials"] = psi_trials
    return ConjugateReport("none_found", family, [], [], 0.0, diagnostics)


# ---------------------------------------------------------------------------
# Odd-swirl diagnostics
# ---------------------------------------------------------------------------


@dataclass
class DiagnosticSeries:
    grid: np.ndarray
    delta_p: np.ndarray
    delta_p_integral: np.ndarray
    xi: np.ndarray
    f_integral: np.ndarray
    poincare_constant: float
    sup_xi_squared: float
    bound_holds: bool
    divergence_trend: bool

    def to_csv(self) -> str:
        lines = ["t,delta_p,delta_p_integral,xi,f_integral"]
        for i, t in enumerate(self.grid):
            lines.append(
                ",".join(
                    fmt17(x)
                    for x in (t, self.delta_p[i], self.delta_p_integral[i], self.xi[i], self.f_integral[i])
                )
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "poincare_constant": self.poincare_constant,
            "sup_xi_squared": self.sup_xi_squared,
            "delta_p_integral_final": float(self.delta_p_integral[-1]),
            "f_integral_final": float(self.f_integral[-1]),
            "bound_holds": self.bound_holds,
            "divergence_trend": self.divergence_trend,
        }


def laplacian_identity_odd(
    sol: JacobiSolution, poincare_constant: Optional[float] = None
) -> DiagnosticSeries:
    """Pressure-Laplacian identity along an odd boundary run.

    Along such runs the pressure Laplacian at the fixed circle equals
    -2 (f'/f)^2, so its time integral is -2 ||xi'||^2 for xi = ln f. The
    reported bound compares that integral against -C sup xi^2 with
    C = 2 (pi / 2T)^2 (the sharp constant of the one-sided L2 Poincare
    inequality); it is a trend diagnostic, not a theorem, and can fail for
    slowly varying strains. The divergence flag fires when the strain
    integral grows while the Laplacian integral keeps decreasing.
    """
    f = sol.f
    if np.any(~np.isfinite(f)) or np.any(f <= 0):
        raise NonpositiveF("laplacian identity needs f > 0 on the window")
    t = sol.grid
    delta_p = -2.0 * (sol.fp / f) ** 2
    dp_int = cumulative_simpson(delta_p, x=t, initial=0.0)
    f_int = cumulative_simpson(f, x=t, initial=0.0)
    xi = np.log(f)
    T = float(t[-1])
    C = poincare_constant if poincare_constant is not None else 2.0 * (math.pi / (2.0 * T)) ** 2
    sup_xi_sq = float(np.max(xi**2))
    bound_holds = float(dp_int[-1]) <= -C * sup_xi_sq + 1e-12
    n5 = max(2, len(t) // 5)
    trend = bool(f_int[-1] > f_int[-n5] + 1e-15 and dp_int[-1] < dp_int[-n5] - 1e-15)
    return DiagnosticSeries(
        grid=t, delta_p=delta_p, delta_p_integral=dp_int, xi=xi, f_integral=f_int,
        poincare_constant=C, sup_xi_squared=sup_xi_sq,
        bound_holds=bound_holds, divergence_trend=trend,
    )


@dataclass
class DiagnosticReport:
    grid: np.ndarray
    integrand: np.ndarray
    integral: np.ndarray
    ratio: np.ndarray
    diagnostics: dict

    def to_dict(self) -> dict:
        return dict(
            self.diagnostics,
            integral_final=float(self.integral[-1]),
            ratio_final=float(self.ratio[-1]),
        )

    def to_csv(self) -> str:
        lines = ["t,integrand,integral,inverse_ratio"]
        for i, t in enumerate(self.grid):
            lines.append(
                ",".join(fmt17(x) for x in (t, self.integrand[i], self.integral[i], self.ratio[i]))
            )
        return "\n".join(lines) + "\n"


def fredholm_diagnostics(sol: JacobiSolution, s: FixedPointScenario) -> DiagnosticReport:
    """Stretching-alignment quantities for the no-conjugate-points alternative.

    Computes the running integral of Lambda_33 / (Lambda^11 + Lambda^22)
    (raised indices are inverse-matrix components, in the cylindrical frame
    with the 3-direction vertical) and the ratio of the integrals of
    Lambda^11 and Lambda^22. Finiteness of the first and decay of the second
    characterize blowup without conjugate points; the trends are meant to be
    read jointly with a conjugate search. Raises ZeroVorticity when the
    initial point vorticity vanishes.
    """
    w, _ = rotation_vector(s)
    if s.location == "axis" and s.parity == "even":
        w = 2.0 * s.swirl.b0  # physical vorticity magnitude, not the index-form coefficient
    if w == 0.0:
        raise ZeroVorticity("point vorticity is zero; alignment diagnostics undefined")
    t = sol.grid
    e = stretch_entries(sol, s, t)
    mats = np.zeros((len(t), 3, 3))
    for (i, j), key in (((0, 0), "11"), ((0, 1), "12"), ((0, 2), "13"),
                        ((1, 1), "22"), ((1, 2), "23"), ((2, 2), "33")):
        mats[:, i, j] = e[key]
        mats[:, j, i] = e[key]
    inv = np.linalg.inv(mats)
    up11, up22 = inv[:, 0, 0], inv[:, 1, 1]
    integrand = e["33"] / (up11 + up22)
    integral = cumulative_simpson(integrand, x=t, initial=0.0)
    i11 = cumulative_simpson(up11, x=t, initial=0.0)
    i22 = cumulative_simpson(up22, x=t, initial=0.0)
    ratio = np.ones_like(t)
    ratio[1:] = i11[1:] / i22[1:]
    ratio[0] = up11[0] / up22[0]
    n5 = max(2, len(t) // 5)
    diagnostics = {
        "integrand_final": float(integrand[-1]),
        "integral_trend_increasing": bool(integral[-1] > integral[-n5]),
        "ratio_trend": float(ratio[-1] - ratio[-n5]),
        "vorticity_magnitude": abs(w),
    }
    return DiagnosticReport(grid=t, integrand=integrand, integral=integral, ratio=ratio,
                            diagnostics=diagnostics)
