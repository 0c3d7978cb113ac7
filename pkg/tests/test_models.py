"""Fixed-point strain models against closed forms and the central-force oracle."""

import math

import numpy as np
import pytest

from blowuplab.models import (
    central_force_oracle,
    derived_pressure_zz,
    run_axis_even,
    run_boundary_even,
    run_linear,
)
from blowuplab.solution import Terminated

from helpers import ARTANH_HALF, axis_even, boundary_even, const, odd_scenario, pw


class TestAxisEven:
    def test_steady_rotation_balance(self):
        # b0 = 1, P_rr = 1: the centrifugal term balances the pressure exactly
        s = axis_even(b0=1.0, prr=const(1.0))
        sol = run_axis_even(s, g_mode="trace")
        assert np.max(np.abs(sol.f - 1.0)) < 1e-12
        assert np.max(np.abs(sol.g - 1.0)) < 1e-12
        assert np.max(np.abs(derived_pressure_zz(sol, s))) < 1e-12
        assert sol.terminated is Terminated.COMPLETED

    def test_closed_form_ellipse(self):
        # b0 = 1, P_rr = 4: f = sqrt(cos^2 2t + sin^2 2t / 4), f(pi/4) = 1/2
        s = axis_even(b0=1.0, prr=const(4.0), t_end=math.pi / 4)
        sol = run_axis_even(s)
        assert abs(sol.f[-1] - 0.5) < 1e-8
        tt = np.linspace(0.0, math.pi / 4, 200)
        expected = np.sqrt(np.cos(2 * tt) ** 2 + 0.25 * np.sin(2 * tt) ** 2)
        np.testing.assert_allclose(sol.eval_f(tt), expected, atol=1e-8)

    def test_zero_swirl_reduces_to_linear_decay(self):
        s = axis_even(a0=1.0, prr=const(0.0))
        sol = run_axis_even(s)
        assert sol.terminated is Terminated.BLOWUP_DETECTED
        assert sol.first_zero_f == pytest.approx(1.0, abs=1e-9)
        assert np.all(sol.winding_integral == 0.0)
        assert np.all(sol.vorticity_integral == 0.0)

    def test_trace_mode_guard_on_derived_coefficient(self):
        # the derived vertical coefficient is singular at f = 0, so the trace
        # run halts at the guard instead of crossing
        s = axis_even(a0=1.0, prr=const(0.0))
        sol = run_axis_even(s, g_mode="trace")
        assert sol.terminated is Terminated.BLOWUP_DETECTED
        assert sol.first_zero_f is None
        assert sol.grid[-1] == pytest.approx(1.0, abs=2e-6)

    def test_winding_and_vorticity_totals(self):
        # f = 1: s(t) = t and |vorticity| integral = 2 |b0| t
        s = axis_even(b0=2.0, prr=const(4.0))
        sol = run_axis_even(s)
        assert sol.winding_integral[-1] == pytest.approx(3.0, rel=1e-9)
        assert sol.vorticity_integral[-1] == pytest.approx(12.0, rel=1e-9)


class TestBoundaryEven:
    def test_equilibrium_algebra(self):
        # f = 1 requires P_rr = 2 b1 b2 - b1^2 = 1 for b1 = b2 = 1
        s = boundary_even(b1=1.0, b2=1.0, prr=const(1.0))
        sol = run_boundary_even(s, g_mode="trace")
        assert np.max(np.abs(sol.f - 1.0)) < 1e-12
        assert np.max(np.abs(derived_pressure_zz(sol, s))) < 1e-12

    def test_zero_swirl_linear_decay(self):
        s = boundary_even(a0=1.0, prr=const(0.0))
        sol = run_boundary_even(s)
        assert sol.terminated is Terminated.BLOWUP_DETECTED
        assert sol.first_zero_f == pytest.approx(1.0, abs=1e-9)

    def test_quadratic_envelope_branch(self):
        # 2 b1 (b1+b2) = -c^2 = -1 and P_rr + 3 b1^2 = 0: f = 1 - a t - t^2/2,
        # vanishing no later than sqrt(3) - 1 for a = 1
        s = boundary_even(b1=0.5, b2=-1.5, a0=1.0, prr=const(-0.75), t_end=3.0)
        sol = run_boundary_even(s)
        assert sol.terminated is Terminated.BLOWUP_DETECTED
        t_star = math.sqrt(3.0) - 1.0
        halt = sol.grid[-1]
        assert halt <= t_star + 1e-6
        assert halt == pytest.approx(t_star, abs=1e-5)
        tt = np.linspace(0.0, halt, 100)
        np.testing.assert_allclose(sol.eval_f(tt), 1 - tt - tt**2 / 2, atol=1e-8)


class TestRunLinear:
    def test_zero_coefficient_exact_zero(self):
        s = odd_scenario(pzz=const(0.0), c0z=-0.5, t_end=4.0)
        sol = run_linear(s, "g_boundary")
        assert sol.first_zero_g == pytest.approx(2.0, abs=1e-9)
        assert sol.terminated is Terminated.COMPLETED

    def test_hyperbolic_zero(self):
        s = odd_scenario(location="axis", pzz=const(-1.0), c0z=-2.0)
        sol = run_linear(s, "g_axis")
        assert sol.first_zero_g == pytest.approx(ARTANH_HALF, abs=1e-8)

    def test_trigonometric_zero(self):
        # g = cos t - 0.5 sin t first vanishes at arctan(2)
        s = odd_scenario(location="axis", pzz=const(1.0), c0z=-0.5)
        sol = run_linear(s, "g_axis")
        assert sol.first_zero_g == pytest.approx(math.atan(2.0), abs=1e-9)

    def test_partner_component_masked_after_zero(self):
        s = odd_scenario(pzz=const(0.0), c0z=-0.5, t_end=4.0)
        sol = run_linear(s, "g_boundary")
        before = sol.grid < sol.first_zero_g
        assert np.all(np.isfinite(sol.f[before]))
        assert np.all(np.isnan(sol.f[~before][1:]))
        assert sol.constraint_residual[0] == 0.0

    def test_boundary_odd_vorticity_accumulates(self):
        s = odd_scenario(b3=2.0, prr=const(0.0), a0=-1.0, t_end=1.0)
        sol = run_linear(s, "f_odd")  # f = 1 + t
        assert sol.vorticity_integral[-1] == pytest.approx(2.0 * 1.5, rel=1e-9)
        assert np.all(np.diff(sol.vorticity_integral) >= -1e-15)

    def test_derived_pressure_zz_rejected(self):
        s = axis_even(prr=const(1.0))
        with pytest.raises(ValueError):
            run_linear(s, "g_axis")


class TestOracle:
    def test_circular_orbit(self):
        sol = central_force_oracle(2.0, const(4.0), 3.0)
        assert np.max(np.abs(sol.f - 1.0)) < 1e-9
        # theta = b0 * s = 2t
        assert 2.0 * sol.winding_integral[-1] == pytest.approx(6.0, rel=1e-9)

    def test_matches_axis_model(self):
        s = axis_even(b0=1.0, prr=const(4.0), t_end=math.pi / 4)
        sol = run_axis_even(s)
        orc = central_force_oracle(1.0, const(4.0), math.pi / 4)
        assert abs(orc.f[-1] - 0.5) < 1e-8
        tt = np.linspace(0.0, math.pi / 4, 257)
        assert np.max(np.abs(sol.eval_f(tt) - orc.eval_f(tt))) < 1e-8

    def test_free_motion_radius(self):
        sol = central_force_oracle(1.0, const(0.0), 2.0)
        np.testing.assert_allclose(sol.f, np.sqrt(1.0 + sol.grid**2), atol=1e-9)

    def test_angular_momentum_conserved(self):
        sol = central_force_oracle(1.5, pw((0.0, 0.5), (2.0, 3.0)), 2.0, xp0=-0.2)
        assert np.max(np.abs(sol.constraint_residual)) <= 1e-9

    def test_winding_zero_correspondence(self):
        # each pi increment of theta brackets exactly one zero of x
        b0 = 1.0
        sol = central_force_oracle(b0, const(4.0), 3.0)
        theta_end = b0 * sol.winding_integral[-1]
        expected = math.floor((theta_end - math.pi / 2) / math.pi) + 1
        assert len(sol.g_zeros) == expected
        for k, z in enumerate(sol.g_zeros):
            theta_z = b0 * sol.eval_winding(z)
            assert theta_z == pytest.approx(math.pi / 2 + k * math.pi, abs=1e-7)


class TestConstraintConsistency:
    @pytest.mark.parametrize("case", ["axis", "boundary"])
    def test_trace_mode_keeps_constraint(self, case):
        if case == "axis":
            s = axis_even(b0=1.0, prr=pw((0.0, 1.0), (2.0, 4.0)), a0=0.1, t_end=3.0)
            sol = run_axis_even(s, g_mode="trace")
        else:
            s = boundary_even(b1=1.0, b2=1.0, prr=pw((0.0, 1.0), (2.0, 2.0)), a0=0.1, t_end=3.0)
            sol = run_boundary_even(s, g_mode="trace")
        assert np.nanmax(np.abs(sol.constraint_residual)) <= 1e-6

    def test_residual_zero_at_start(self):
        s = axis_even(b0=1.0, prr=const(2.0), a0=0.2, t_end=2.0)
        sol = run_axis_even(s, g_mode="trace")
        assert abs(sol.constraint_residual[0]) <= 1e-12

    def test_integrals_nondecreasing(self):
        s = axis_even(b0=1.0, prr=const(4.0), a0=0.1, t_end=4.0)
        sol = run_axis_even(s)
        assert np.all(np.diff(sol.winding_integral) >= 0.0)
        assert np.all(np.diff(sol.vorticity_integral) >= 0.0)
