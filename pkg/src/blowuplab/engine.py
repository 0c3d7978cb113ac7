"""Second-order IVP integration with dense output, sign-change events, and
running integrals.

Thin wrapper around scipy's embedded adaptive Runge-Kutta (RK45) pairs: the
second-order system is packed as first-order state ``[y, y', extras]`` where
each extra state accumulates a requested running integral at integrator
accuracy. Known nonsmooth times of the coefficients (profile knots) are passed
as breakpoints and the integration is chained across them so the error
estimate never straddles a kink.

Terminal conditions are reported as trajectory statuses rather than raised,
because the partial trajectory is the useful artifact: ``singularity_guard``
(a guarded quantity dropped below its floor) and ``step_failure`` (step size
underflow) correspond to the BlowupDetected / StepFailure outcomes upstream.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.integrate import solve_ivp

from .scenario import SolverTolerances
from .solution import fmt17


@dataclass
class SecondOrderIVP:
    """y'' = rhs(t, y, y') with vector y of dimension <= 4."""

    rhs: Callable
    y0: np.ndarray
    yp0: np.ndarray
    t_span: tuple[float, float]

    def __post_init__(self):
        self.y0 = np.atleast_1d(np.asarray(self.y0, dtype=float))
        self.yp0 = np.atleast_1d(np.asarray(self.yp0, dtype=float))
        if self.y0.shape != self.yp0.shape:
            raise ValueError("y0 and yp0 must have matching shapes")
        if self.y0.size > 4:
            raise ValueError("second-order dimension must be <= 4")


@dataclass
class EventSpec:
    """Sign change of fn(t, y, yp, extras); located on dense output."""

    fn: Callable
    name: str
    direction: int = 0
    terminal: bool = False
    guard: bool = False


@dataclass
class EventRecord:
    name: str
    time: float
    state: np.ndarray


@dataclass
class Trajectory:
    t: np.ndarray
    y: np.ndarray        # (dim, n) second-order components
    yp: np.ndarray       # (dim, n)
    extras: np.ndarray   # (n_int, n) running integrals
    dim: int
    status: str          # completed | event | singularity_guard | step_failure
    message: str
    events: list[EventRecord]
    _segments: list = field(default_factory=list, repr=False)

    def state_at(self, t):
        """Dense full-state evaluation; t scalar or array within coverage."""
        ta = np.atleast_1d(np.asarray(t, dtype=float))
        ends = np.array([seg.t_max for seg in self._segments])
        idx = np.minimum(np.searchsorted(ends, ta, side="left"), len(ends) - 1)
        out = np.empty((self._segments[0].n_states, ta.size))
        for k in np.unique(idx):
            mask = idx == k
            out[:, mask] = self._segments[k](ta[mask])
        return out[:, 0] if np.ndim(t) == 0 else out

    def component(self, t, index: int):
        """Dense evaluation of one second-order component."""
        state = self.state_at(t)
        return state[index] if np.ndim(t) == 0 else state[index]

    def to_csv(self) -> str:
        buf = io.StringIO()
        cols = (
            [f"y{i}" for i in range(self.dim)]
            + [f"yp{i}" for i in range(self.dim)]
            + [f"int{i}" for i in range(self.extras.shape[0])]
        )
        buf.write("t," + ",".join(cols) + ",event\n")
        for j, t in enumerate(self.t):
            vals = list(self.y[:, j]) + list(self.yp[:, j]) + list(self.extras[:, j])
            buf.write(fmt17(t) + "," + ",".join(fmt17(v) for v in vals) + ",\n")
        blank = "," * len(cols)
        for rec in sorted(self.events, key=lambda r: r.time):
            buf.write(fmt17(rec.time) + blank + "," + rec.name + "\n")
        return buf.getvalue()


class _SegmentSol:
    """Adapter giving a scipy OdeSolution a uniform (t_max, n_states) face."""

    def __init__(self, sol, t_max: float, n_states: int):
        self._sol = sol
        self.t_max = t_max
        self.n_states = n_states

    def __call__(self, t):
        return self._sol(t)


def _wrap_event(spec: EventSpec, dim: int):
    def ev(t, u):
        return spec.fn(t, u[:dim], u[dim : 2 * dim], u[2 * dim :])

    ev.terminal = spec.terminal
    ev.direction = float(spec.direction)
    return ev


def integrate(
    ivp: SecondOrderIVP,
    tol: SolverTolerances = SolverTolerances(),
    events: Sequence[EventSpec] = (),
    integrands: Sequence[Callable] = (),
    breakpoints: Sequence[float] = (),
    extras0: Optional[Sequence[float]] = None,
) -> Trajectory:
    """Adaptive integration of a second-order IVP.

    integrands: callables (t, y, yp) -> d/dt of a running integral, appended
    to the state so they share the integrator's error control.
    breakpoints: interior times where the rhs may be nonsmooth.
    """
    t0, t1 = ivp.t_span
    if not t1 > t0:
        raise ValueError("t_span must be increasing")
    dim = ivp.y0.size
    n_int = len(integrands)

    def odes(t, u):
        y, yp = u[:dim], u[dim : 2 * dim]
        du = np.empty_like(u)
        du[:dim] = yp
        du[dim : 2 * dim] = np.atleast_1d(np.asarray(ivp.rhs(t, y, yp), dtype=float))
        for i, g in enumerate(integrands):
            du[2 * dim + i] = g(t, y, yp)
        return du

    wrapped = [_wrap_event(e, dim) for e in events]
    cuts = [t0] + sorted(b for b in set(breakpoints) if t0 < b < t1) + [t1]

    u = np.concatenate(
        [ivp.y0, ivp.yp0, np.asarray(extras0 if extras0 is not None else [0.0] * n_int, dtype=float)]
    )
    ts: list[np.ndarray] = []
    us: list[np.ndarray] = []
    segments: list[_SegmentSol] = []
    records: list[EventRecord] = []
    status, message = "completed", "reached end of span"

    for a, b in zip(cuts, cuts[1:]):
        sol = solve_ivp(
            odes,
            (a, b),
            u,
            method="RK45",
            rtol=tol.rel_tol,
            atol=tol.abs_tol,
            dense_output=True,
            events=wrapped or None,
        )
        ts.append(sol.t if not ts else sol.t[1:])
        us.append(sol.y if not us else sol.y[:, 1:])
        if sol.sol is not None:
            segments.append(_SegmentSol(sol.sol, float(sol.t[-1]), u.size))
        if wrapped:
            for spec, t_ev, y_ev in zip(events, sol.t_events, sol.y_events):
                for te, ye in zip(t_ev, y_ev):
                    records.append(EventRecord(spec.name, float(te), np.asarray(ye)))
        if sol.status == -1:
            status, message = "step_failure", sol.message
            break
        if sol.status == 1:
            fired = [spec for spec, t_ev in zip(events, sol.t_events) if spec.terminal and len(t_ev)]
            guard = any(spec.guard for spec in fired)
            status = "singularity_guard" if guard else "event"
            message = "terminal event: " + ",".join(spec.name for spec in fired)
            break
        u = sol.y[:, -1]

    t_all = np.concatenate(ts)
    u_all = np.concatenate(us, axis=1)
    records.sort(key=lambda r: r.time)
    return Trajectory(
        t=t_all,
        y=u_all[:dim],
        yp=u_all[dim : 2 * dim],
        extras=u_all[2 * dim :],
        dim=dim,
        status=status,
        message=message,
        events=records,
        _segments=segments,
    )


def _bisect(fn: Callable[[float], float], a: float, b: float, tol: float) -> float:
    fa = fn(a)
    if fa == 0.0:
        return a
    for _ in range(200):
        m = 0.5 * (a + b)
        fm = fn(m)
        if fm == 0.0:
            return m
        if (fa > 0) != (fm > 0):
            b = m
        else:
            a, fa = m, fm
        if b - a <= tol:
            break
    return 0.5 * (a + b)


def zeros_of(
    traj: Trajectory,
    component: int,
    interval: Optional[tuple[float, float]] = None,
    zero_bisect_tol: float = 1e-12,
    subsamples: int = 8,
) -> list[float]:
    """Transversal zeros of a trajectory component, refined by bisection.

    Only sign changes count; tangential touches are skipped by convention
    (matching the oscillation-theoretic use of zero counting). Zeros at the
    interval endpoints are not counted.
    """
    lo = traj.t[0] if interval is None else interval[0]
    hi = traj.t[-1] if interval is None else interval[1]
    if hi <= lo:
        return []
    # sample nodes: accepted steps subdivided, clipped to the interval
    nodes = [lo]
    for a, b in zip(traj.t, traj.t[1:]):
        if b <= lo or a >= hi:
            continue
        a, b = max(a, lo), min(b, hi)
        nodes.extend(np.linspace(a, b, subsamples + 1)[1:])
    if nodes[-1] < hi:
        nodes.append(hi)
    nodes = np.array(nodes)
    vals = traj.state_at(nodes)[component]

    fn = lambda t: float(traj.state_at(t)[component])
    zeros: list[float] = []
    n = len(nodes)
    i = 0
    while i < n - 1:
        v0 = vals[i]
        if v0 == 0.0:
            # exact sample zero: crossing iff neighbors change sign
            left = vals[i - 1] if i > 0 else 0.0
            j = i + 1
            while j < n and vals[j] == 0.0:
                j += 1
            right = vals[j] if j < n else 0.0
            if i > 0 and left * right < 0:
                zeros.append(float(nodes[i]))
            i = j
            continue
        v1 = vals[i + 1]
        if v0 * v1 < 0:
            zeros.append(_bisect(fn, float(nodes[i]), float(nodes[i + 1]), zero_bisect_tol))
        i += 1
    return [z for z in zeros if lo < z < hi]


def count_zeros(
    traj: Trajectory,
    component: int,
    interval: Optional[tuple[float, float]] = None,
    zero_bisect_tol: float = 1e-12,
) -> int:
    return len(zeros_of(traj, component, interval, zero_bisect_tol))
