"""Integrator, event location, running integrals, and zero counting."""

import math

import numpy as np
import pytest

from blowuplab.engine import EventSpec, SecondOrderIVP, Trajectory, count_zeros, integrate, zeros_of
from blowuplab.scenario import SolverTolerances

from helpers import ARTANH_HALF, pw

TOL = SolverTolerances()


def _zero_event(terminal=False):
    return EventSpec(lambda t, y, yp, ex: y[0], "zero", 0, terminal=terminal)


class TestIntegrate:
    def test_linear_decay_zero(self):
        # y = 1 - t vanishes at exactly 1
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [0.0], [1.0], [-1.0], (0.0, 2.0)),
            TOL, events=[_zero_event(terminal=True)],
        )
        assert traj.status == "event"
        assert traj.events[0].time == pytest.approx(1.0, abs=1e-10)

    def test_sine_interior_zeros(self):
        # y = sin t on [0, 3*pi + 0.1]: interior zeros at pi, 2pi, 3pi
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [-y[0]], [0.0], [1.0], (0.0, 3 * math.pi + 0.1)), TOL
        )
        zs = zeros_of(traj, 0)
        assert len(zs) == 3
        np.testing.assert_allclose(zs, [math.pi, 2 * math.pi, 3 * math.pi], atol=1e-9)
        assert count_zeros(traj, 0) == 3

    def test_hyperbolic_first_zero(self):
        # y = cosh t - 2 sinh t vanishes at atanh(1/2)
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [y[0]], [1.0], [-2.0], (0.0, 2.0)),
            TOL, events=[_zero_event(terminal=True)],
        )
        assert traj.events[0].time == pytest.approx(ARTANH_HALF, abs=1e-8)

    def test_constant_solution_has_no_zeros(self):
        traj = integrate(SecondOrderIVP(lambda t, y, yp: [0.0], [1.0], [0.0], (0.0, 5.0)), TOL)
        assert count_zeros(traj, 0) == 0

    def test_log_time_oscillator_zero_spacing(self):
        # j'' = (1/4 - H) j with H = 0.5: j = 2 sin(s/2), zeros every 2*pi
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [(0.25 - 0.5) * y[0]], [0.0], [1.0], (0.0, 41.0)),
            TOL, events=[_zero_event()],
        )
        zs = [rec.time for rec in traj.events if rec.time > 1e-9]
        assert len(zs) == math.floor(41.0 / (2 * math.pi)) == 6
        np.testing.assert_allclose(np.diff([0.0] + zs), 2 * math.pi, atol=1e-6)

    def test_running_integrals_share_integrator_accuracy(self):
        # int_0^2 t^2 dt = 8/3 alongside a sine solve
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [-y[0]], [0.0], [1.0], (0.0, 2.0)),
            TOL, integrands=[lambda t, y, yp: t * t],
        )
        assert traj.extras[0, -1] == pytest.approx(8.0 / 3.0, abs=1e-9)

    def test_breakpoints_handle_coefficient_kinks(self):
        prof = pw((0.0, -1.0), (1.0, 1.0), (2.0, 1.0))
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [-prof.value_at(t) * y[0]], [1.0], [0.0], (0.0, 2.0)),
            TOL, breakpoints=prof.breakpoints(0.0, 2.0),
        )
        assert traj.status == "completed"
        assert np.all(np.isfinite(traj.y))

    def test_singularity_guard_halts(self):
        ev = EventSpec(lambda t, y, yp, ex: y[0] - 0.5, "guard", -1, terminal=True, guard=True)
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [0.0], [1.0], [-1.0], (0.0, 2.0)), TOL, events=[ev]
        )
        assert traj.status == "singularity_guard"
        assert traj.t[-1] == pytest.approx(0.5, abs=1e-9)

    def test_bad_span_rejected(self):
        with pytest.raises(ValueError):
            integrate(SecondOrderIVP(lambda t, y, yp: [0.0], [1.0], [0.0], (1.0, 0.0)), TOL)

    def test_dimension_capped(self):
        with pytest.raises(ValueError):
            SecondOrderIVP(lambda t, y, yp: y, np.zeros(5), np.zeros(5), (0.0, 1.0))

    def test_csv_layout(self):
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [-y[0]], [0.0], [1.0], (0.0, 4.0)),
            TOL, events=[_zero_event()], integrands=[lambda t, y, yp: 1.0],
        )
        lines = traj.to_csv().splitlines()
        assert lines[0] == "t,y0,yp0,int0,event"
        assert any(line.endswith(",zero") for line in lines[1:])
        # data rows parse back to floats exactly
        cells = lines[1].split(",")
        assert float(cells[0]) == traj.t[0]


class TestProperties:
    def test_wronskian_conservation(self):
        # two solutions with (1,0) and (0,1) data: y1 y2' - y1' y2 = 1
        rng = np.random.default_rng(7)
        for _ in range(10):
            if rng.random() < 0.5:
                q = float(rng.uniform(-2, 2))
                prof_val = lambda t, q=q: q
                bps = []
            else:
                ts = np.sort(rng.uniform(0.0, 3.0, 3))
                ts[0] = 0.0
                knots = [(float(a), float(rng.uniform(-2, 2))) for a in np.unique(ts)]
                prof = pw(*knots) if len(knots) >= 2 else None
                if prof is None:
                    continue
                prof_val = prof.value_at
                bps = prof.breakpoints(0.0, 3.0)
            traj = integrate(
                SecondOrderIVP(
                    lambda t, y, yp: [-prof_val(t) * y[0], -prof_val(t) * y[1]],
                    [1.0, 0.0], [0.0, 1.0], (0.0, 3.0),
                ),
                TOL, breakpoints=bps,
            )
            w = traj.y[0] * traj.yp[1] - traj.yp[0] * traj.y[1]
            assert np.max(np.abs(w - 1.0)) <= 100 * TOL.rel_tol

    def test_tolerance_scaling_order_check(self):
        # an 8x tolerance cut must improve the terminal error at least 4x
        # (adaptive error scales roughly linearly in the tolerance)
        exact = math.cosh(3.0) - 2.0 * math.sinh(3.0)

        def terminal_error(rel):
            tol = SolverTolerances(rel_tol=rel, abs_tol=rel * 1e-3)
            traj = integrate(
                SecondOrderIVP(lambda t, y, yp: [y[0]], [1.0], [-2.0], (0.0, 3.0)), tol
            )
            return abs(traj.y[0, -1] - exact)

        coarse, fine = terminal_error(1e-5), terminal_error(1e-5 / 8)
        assert fine <= coarse / 4.0

    def test_event_times_independent_of_scan_density(self):
        traj = integrate(
            SecondOrderIVP(lambda t, y, yp: [-y[0]], [0.0], [1.0], (0.0, 10.0)), TOL
        )
        sparse = zeros_of(traj, 0, subsamples=4)
        dense = zeros_of(traj, 0, subsamples=32)
        assert len(sparse) == len(dense)
        np.testing.assert_allclose(sparse, dense, atol=TOL.zero_bisect_tol * 10)

    def test_tangential_zero_not_counted(self):
        # y = (t-1)^2 grazes zero at t = 1: no sign change
        grid = np.linspace(0.0, 2.0, 41)
        vals = (grid - 1.0) ** 2

        class FakeSeg:
            t_max = 2.0
            n_states = 1

            def __call__(self, t):
                return np.atleast_2d(np.interp(t, grid, vals))

        traj = Trajectory(
            t=grid, y=vals[None, :], yp=np.zeros((1, len(grid))),
            extras=np.zeros((0, len(grid))), dim=1, status="completed", message="",
            events=[], _segments=[FakeSeg()],
        )
        assert count_zeros(traj, 0) == 0
