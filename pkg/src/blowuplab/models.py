"""The four fixed-point strain ODE systems and the planar central-force oracle.

Axis, even swirl: the radial strain f obeys an Ermakov-Pinney equation
f'' - b0^2/f^3 = -P_rr(t) f, with the vertical strain g either derived from
incompressibility (g = 1/f^2, "constraint" mode) or integrated independently
from g'' = -P_zz g ("trace" mode) so the product f^2 g = 1 becomes a
verification invariant. On the boundary the analogous pair uses
f'' = 2 b1 (b1 + b2) - (P_rr + 3 b1^2) f and the constraint f g = 1.

Runs halt at the first vanishing of the radial strain: a transversal zero for
linear (zero-swirl) cases, or a singularity guard at f_stop when the 1/f^3
term or the 1/f winding integrands forbid continuing. Extrapolating f to zero
is never done; the guard time is reported as the last bracketing time.
"""

from __future__ import annotations

from typing import Optional

import numpy as np

from .engine import EventSpec, SecondOrderIVP, Trajectory, integrate
from .scenario import FixedPointScenario, SolverTolerances
from .solution import JacobiSolution, Terminated

_STATUS_MAP = {
    "completed": Terminated.COMPLETED,
    "event": Terminated.BLOWUP_DETECTED,
    "singularity_guard": Terminated.BLOWUP_DETECTED,
    "step_failure": Terminated.STEP_FAILURE,
}


def _wire_dense(sol: JacobiSolution, traj: Trajectory, layout: dict[str, int]) -> None:
    for name, idx in layout.items():
        if idx is None:
            sol._dense[name] = lambda t: np.zeros_like(np.asarray(t, dtype=float))
        else:
            sol._dense[name] = lambda t, i=idx: traj.state_at(np.asarray(t))[i]


def _zero_events(traj: Trajectory, name: str) -> list[float]:
    return [rec.time for rec in traj.events if rec.name == name]


def _resolve_g_mode(s: FixedPointScenario, g_mode: str) -> str:
    """auto -> trace when the scenario prescribes P_zz, constraint otherwise."""
    if g_mode == "auto":
        return "constraint" if s.zz_derived else "trace"
    if g_mode not in ("trace", "constraint"):
        raise ValueError(f"unknown g_mode {g_mode!r}")
    return g_mode


def run_axis_even(s: FixedPointScenario, g_mode: str = "auto") -> JacobiSolution:
    """Integrate the axis even-swirl system.

    g_mode="trace": g integrated from g'' = -P_zz g, with P_zz read from the
    scenario profile or, for derived-from-trace scenarios, from the running
    trace identity (which is singular at f = 0, so such runs carry the f_stop
    guard). g_mode="constraint": g = 1/f^2 analytically. "auto" picks trace
    when an explicit P_zz profile is given, constraint otherwise.
    """
    if (s.location, s.parity) != ("axis", "even"):
        raise ValueError("run_axis_even needs an axis/even scenario")
    b0 = s.swirl.b0
    prr = s.pressure_rr
    tol = s.tolerances
    trace = _resolve_g_mode(s, g_mode) == "trace"

    def pzz_at(t, f, fp):
        if not s.zz_derived:
            return s.pressure_zz.value_at(t)
        return -2.0 * prr.value_at(t) - 6.0 * (fp / f) ** 2 + 2.0 * b0 * b0 / f**4

    if trace:
        def rhs(t, y, yp):
            f, g = y
            fpp = -prr.value_at(t) * f
            if b0 != 0.0:
                fpp += b0 * b0 / f**3
            return [fpp, -pzz_at(t, f, yp[0]) * g]

        y0, yp0 = [1.0, 1.0], [-s.a0, s.c0z]
    else:
        def rhs(t, y, yp):
            f = y[0]
            fpp = -prr.value_at(t) * f
            if b0 != 0.0:
                fpp += b0 * b0 / f**3
            return [fpp]

        y0, yp0 = [1.0], [-s.a0]

    events = []
    guarded = b0 != 0.0 or (trace and s.zz_derived)
    if guarded:
        events.append(
            EventSpec(lambda t, y, yp, ex: y[0] - tol.f_stop, "guard_f", -1, terminal=True, guard=True)
        )
    else:
        events.append(EventSpec(lambda t, y, yp, ex: y[0], "zero_f", 0, terminal=True))
    if b0 != 0.0:
        integrands = [lambda t, y, yp: 1.0 / y[0] ** 2, lambda t, y, yp: 2.0 * abs(b0) / y[0] ** 2]
    else:
        integrands = []
    if trace:
        events.append(EventSpec(lambda t, y, yp, ex: y[1], "zero_g", 0))

    bps = list(prr.breakpoints(0.0, s.t_end))
    if not s.zz_derived:
        bps += s.pressure_zz.breakpoints(0.0, s.t_end)
    traj = integrate(SecondOrderIVP(rhs, y0, yp0, (0.0, s.t_end)), tol, events, integrands, bps)

    f, fp = traj.y[0], traj.yp[0]
    if trace:
        g, gp = traj.y[1], traj.yp[1]
    else:
        g, gp = 1.0 / f**2, -2.0 * fp / f**3
    if b0 != 0.0:
        winding, vort = traj.extras[0], traj.extras[1]
    else:
        winding = vort = np.zeros_like(traj.t)
    residual = f**2 * g - 1.0 if trace else np.zeros_like(traj.t)

    f_zeros = _zero_events(traj, "zero_f")
    g_zeros = _zero_events(traj, "zero_g")
    dim = 2 if trace else 1
    sol = JacobiSolution(
        grid=traj.t, f=f, fp=fp, g=g, gp=gp,
        winding_integral=winding, vorticity_integral=vort, constraint_residual=residual,
        first_zero_f=f_zeros[0] if f_zeros else None,
        first_zero_g=g_zeros[0] if g_zeros else None,
        terminated=_STATUS_MAP[traj.status],
        f_zeros=f_zeros, g_zeros=g_zeros, scenario=s,
    )
    layout = {"f": 0, "fp": dim}
    if trace:
        layout.update({"g": 1, "gp": dim + 1})
    layout["winding"] = 2 * dim if b0 != 0.0 else None
    _wire_dense(sol, traj, layout)
    if not trace:
        sol._dense["g"] = lambda t: 1.0 / sol.eval_f(t) ** 2
    return sol


def run_boundary_even(s: FixedPointScenario, g_mode: str = "auto") -> JacobiSolution:
    """Integrate the boundary even-swirl system (constraint f g = 1)."""
    if (s.location, s.parity) != ("boundary", "even"):
        raise ValueError("run_boundary_even needs a boundary/even scenario")
    b1, b2 = s.swirl.b1, s.swirl.b2
    prr = s.pressure_rr
    tol = s.tolerances
    trace = _resolve_g_mode(s, g_mode) == "trace"
    rotational = b1 != 0.0 or b2 != 0.0
    drive = 2.0 * b1 * (b1 + b2)

    def pzz_at(t, f, fp):
        if not s.zz_derived:
            return s.pressure_zz.value_at(t)
        return -prr.value_at(t) - 3.0 * b1 * b1 + drive / f - 2.0 * (fp / f) ** 2

    if trace:
        def rhs(t, y, yp):
            f, g = y
            return [drive - (prr.value_at(t) + 3.0 * b1 * b1) * f, -pzz_at(t, f, yp[0]) * g]

        y0, yp0 = [1.0, 1.0], [-s.a0, s.c0z]
    else:
        def rhs(t, y, yp):
            return [drive - (prr.value_at(t) + 3.0 * b1 * b1) * y[0]]

        y0, yp0 = [1.0], [-s.a0]

    events = []
    guarded = rotational or (trace and s.zz_derived)
    if guarded:
        events.append(
            EventSpec(lambda t, y, yp, ex: y[0] - tol.f_stop, "guard_f", -1, terminal=True, guard=True)
        )
    else:
        events.append(EventSpec(lambda t, y, yp, ex: y[0], "zero_f", 0, terminal=True))
    if rotational:
        integrands = [lambda t, y, yp: 1.0 / y[0], lambda t, y, yp: abs(b1 + b2) / y[0]]
    else:
        integrands = []
    if trace:
        events.append(EventSpec(lambda t, y, yp, ex: y[1], "zero_g", 0))

    bps = list(prr.breakpoints(0.0, s.t_end))
    if not s.zz_derived:
        bps += s.pressure_zz.breakpoints(0.0, s.t_end)
    traj = integrate(SecondOrderIVP(rhs, y0, yp0, (0.0, s.t_end)), tol, events, integrands, bps)

    f, fp = traj.y[0], traj.yp[0]
    if trace:
        g, gp = traj.y[1], traj.yp[1]
    else:
        g, gp = 1.0 / f, -fp / f**2
    if rotational:
        winding, vort = traj.extras[0], traj.extras[1]
    else:
        winding = vort = np.zeros_like(traj.t)
    residual = f * g - 1.0 if trace else np.zeros_like(traj.t)

    f_zeros = _zero_events(traj, "zero_f")
    g_zeros = _zero_events(traj, "zero_g")
    dim = 2 if trace else 1
    sol = JacobiSolution(
        grid=traj.t, f=f, fp=fp, g=g, gp=gp,
        winding_integral=winding, vorticity_integral=vort, constraint_residual=residual,
        first_zero_f=f_zeros[0] if f_zeros else None,
        first_zero_g=g_zeros[0] if g_zeros else None,
        terminated=_STATUS_MAP[traj.status],
        f_zeros=f_zeros, g_zeros=g_zeros, scenario=s,
    )
    layout = {"f": 0, "fp": dim}
    if trace:
        layout.update({"g": 1, "gp": dim + 1})
    layout["winding"] = 2 * dim if rotational else None
    _wire_dense(sol, traj, layout)
    if not trace:
        sol._dense["g"] = lambda t: 1.0 / sol.eval_f(t)
    return sol


def run_linear(s: FixedPointScenario, which: str) -> JacobiSolution:
    """Integrate one linear strain equation y'' = -Q(t) y and record its zeros.

    which: "g_axis" / "g_boundary" (vertical strain, Q = P_zz) or "f_odd"
    (odd-swirl radial strain, Q = P_rr). The companion component is derived
    from the incompressibility constraint where the solved component is
    positive and NaN beyond its first zero; the run itself continues to t_end.
    """
    if which not in ("g_axis", "g_boundary", "f_odd"):
        raise ValueError(f"unknown linear model {which!r}")
    vertical = which.startswith("g")
    if vertical:
        if s.zz_derived:
            raise ValueError("linear vertical run needs an explicit pressure_zz profile")
        q = s.pressure_zz
        yp0 = s.c0z
    else:
        q = s.pressure_rr
        yp0 = -s.a0
    tol = s.tolerances
    boundary_odd = s.location == "boundary" and s.parity == "odd" and not vertical

    def rhs(t, y, yp):
        return [-q.value_at(t) * y[0]]

    events = [EventSpec(lambda t, y, yp, ex: y[0], "zero", 0)]
    integrands = []
    if boundary_odd and s.swirl.b3 != 0.0:
        integrands.append(lambda t, y, yp: abs(s.swirl.b3) * abs(y[0]))
    traj = integrate(
        SecondOrderIVP(rhs, [1.0], [yp0], (0.0, s.t_end)),
        tol, events, integrands, q.breakpoints(0.0, s.t_end),
    )

    y, yp = traj.y[0], traj.yp[0]
    zeros = _zero_events(traj, "zero")
    with np.errstate(divide="ignore", invalid="ignore"):
        pos = np.where(y > 0.0, y, np.nan)
        if s.location == "axis":
            partner = pos ** (-2.0 if not vertical else -0.5)
            partner_p = (-2.0 * yp / pos**3) if not vertical else (-0.5 * yp * pos**-1.5)
        else:
            partner = 1.0 / pos
            partner_p = -yp / pos**2
    if zeros:
        dead = traj.t > zeros[0]
        partner[dead] = np.nan
        partner_p[dead] = np.nan
    if s.location == "axis":
        residual = (y**2 * partner - 1.0) if not vertical else (partner**2 * y - 1.0)
    else:
        residual = y * partner - 1.0

    winding = np.zeros_like(traj.t)
    vort = traj.extras[0] if integrands else np.zeros_like(traj.t)
    f, fp, g, gp = (y, yp, partner, partner_p) if not vertical else (partner, partner_p, y, yp)
    sol = JacobiSolution(
        grid=traj.t, f=f, fp=fp, g=g, gp=gp,
        winding_integral=winding, vorticity_integral=vort, constraint_residual=residual,
        first_zero_f=zeros[0] if (zeros and not vertical) else None,
        first_zero_g=zeros[0] if (zeros and vertical) else None,
        terminated=_STATUS_MAP[traj.status],
        f_zeros=zeros if not vertical else [], g_zeros=zeros if vertical else [],
        primary_component="g" if vertical else "f",
        scenario=s,
    )
    key = "f" if not vertical else "g"
    _wire_dense(sol, traj, {key: 0, key + "p": 1, "winding": None})
    return sol


def central_force_oracle(
    b0: float,
    profile,
    t_end: float,
    xp0: float = 0.0,
    tolerances: SolverTolerances = SolverTolerances(),
) -> JacobiSolution:
    """Planar central-force system x'' = -F(t) x, y'' = -F(t) y with angular
    momentum b0, used as an independent oracle for the axis even-swirl run.

    Returns a JacobiSolution with f = sqrt(x^2 + y^2) (the orbit radius), the
    planar component x in the g slot (its zeros drive Sturm cross-checks),
    the rotation clock in winding_integral, and the angular-momentum drift
    x y' - x' y - b0 in constraint_residual. The winding angle is
    b0 * winding_integral.
    """

    def rhs(t, y, yp):
        F = profile.value_at(t)
        return [-F * y[0], -F * y[1]]

    def rho2(y):
        return y[0] ** 2 + y[1] ** 2

    events = [
        EventSpec(lambda t, y, yp, ex: np.sqrt(rho2(y)) - tolerances.f_stop, "guard_f", -1,
                  terminal=True, guard=True),
        EventSpec(lambda t, y, yp, ex: y[0], "zero_x", 0),
    ]
    integrands = [
        lambda t, y, yp: 1.0 / rho2(y),
        lambda t, y, yp: 2.0 * abs(b0) / rho2(y),
    ]
    traj = integrate(
        SecondOrderIVP(rhs, [1.0, 0.0], [xp0, b0], (0.0, t_end)),
        tolerances, events, integrands, profile.breakpoints(0.0, t_end),
    )

    x, yv = traj.y[0], traj.y[1]
    xd, yd = traj.yp[0], traj.yp[1]
    rho = np.sqrt(x**2 + yv**2)
    rhod = (x * xd + yv * yd) / rho
    angmom = x * yd - xd * yv - b0
    x_zeros = _zero_events(traj, "zero_x")

    sol = JacobiSolution(
        grid=traj.t, f=rho, fp=rhod, g=x, gp=xd,
        winding_integral=traj.extras[0], vorticity_integral=traj.extras[1],
        constraint_residual=angmom,
        first_zero_f=None,
        first_zero_g=x_zeros[0] if x_zeros else None,
        terminated=_STATUS_MAP[traj.status],
        g_zeros=x_zeros,
    )
    sol._dense["f"] = lambda t: np.sqrt(
        traj.state_at(np.asarray(t))[0] ** 2 + traj.state_at(np.asarray(t))[1] ** 2
    )
    sol._dense["g"] = lambda t: traj.state_at(np.asarray(t))[0]
    sol._dense["winding"] = lambda t: traj.state_at(np.asarray(t))[4]
    return sol


def derived_pressure_zz(sol: JacobiSolution, s: FixedPointScenario) -> np.ndarray:
    """Vertical pressure coefficient implied by the trace identity along a run."""
    f, fp, t = sol.f, sol.fp, sol.grid
    prr = s.pressure_rr.value_at(t)
    if s.location == "axis":
        return -2.0 * prr - 6.0 * (fp / f) ** 2 + 2.0 * s.swirl.b0**2 / f**4
    b1, b2 = s.swirl.b1, s.swirl.b2
    return -prr - 3.0 * b1 * b1 + 2.0 * b1 * (b1 + b2) / f - 2.0 * (fp / f) ** 2


def manufactured_solution(
    grid: np.ndarray,
    f: np.ndarray,
    fp: np.ndarray,
    g: Optional[np.ndarray] = None,
    gp: Optional[np.ndarray] = None,
    winding: Optional[np.ndarray] = None,
    scenario: Optional[FixedPointScenario] = None,
) -> JacobiSolution:
    """Wrap closed-form series as a JacobiSolution (spline-backed dense access).

    Used for synthetic deformation histories in conjugate-point studies and
    tests; no integration is performed.
    """
    grid = np.asarray(grid, dtype=float)
    n = grid.size
    if g is None:
        g = np.ones(n)
    if gp is None:
        gp = np.zeros(n)
    if winding is None:
        winding = np.zeros(n)
    return JacobiSolution(
        grid=grid, f=np.asarray(f, float), fp=np.asarray(fp, float),
        g=np.asarray(g, float), gp=np.asarray(gp, float),
        winding_integral=np.asarray(winding, float),
        vorticity_integral=np.zeros(n), constraint_residual=np.zeros(n),
        first_zero_f=None, first_zero_g=None,
        terminated=Terminated.COMPLETED, scenario=scenario,
    )
