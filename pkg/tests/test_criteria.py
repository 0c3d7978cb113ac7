"""Criterion checkers and the Sturm comparison toolkit."""

import math

import numpy as np
import pytest

from blowuplab.criteria import (
    asymptotic_ratio_bound,
    check_monotone_pressure,
    check_quarter_threshold,
    check_rotation_blowup,
    check_sign_criterion,
    rotation_rate_constant,
    sturm_compare,
)
from blowuplab.errors import HypothesisNotMet, OrderingViolated
from blowuplab.models import run_linear
from blowuplab.scenario import PoleScaledProfile

from helpers import (
    ARTANH_HALF,
    axis_even,
    boundary_even,
    const,
    odd_scenario,
    pw,
    random_nondecreasing_profile,
    random_nonneg_profile,
)


class TestSignCriterion:
    def test_flat_coefficient_saturates_bound(self):
        s = odd_scenario(location="axis", pzz=const(0.0), c0z=-1.0, t_end=2.0)
        sol = run_linear(s, "g_axis")
        rep = check_sign_criterion(sol, s)
        assert rep.status == "PASS"
        assert rep.predicted_bound == pytest.approx(1.0)
        assert rep.observed == pytest.approx(1.0, abs=1e-9)

    def test_positive_coefficient_beats_bound(self):
        # g = cos t - sin t vanishes at pi/4 < 1
        s = odd_scenario(location="axis", pzz=const(1.0), c0z=-1.0, t_end=2.0)
        sol = run_linear(s, "g_axis")
        rep = check_sign_criterion(sol, s)
        assert rep.status == "PASS"
        assert rep.observed == pytest.approx(math.pi / 4, abs=1e-9)
        assert rep.observed < rep.predicted_bound

    def test_negative_excursion_rejected(self):
        s = odd_scenario(
            location="axis", pzz=pw((0.0, 1.0), (1.0, -1.0), (2.0, 1.0)), c0z=-1.0, t_end=2.0
        )
        sol = run_linear(s, "g_axis")
        with pytest.raises(HypothesisNotMet):
            check_sign_criterion(sol, s)

    def test_radial_branch_requires_zero_swirl_coefficient(self):
        s = axis_even(b0=1.0, prr=const(1.0), a0=1.0, c0z=2.0, t_end=2.0)
        sol = run_linear(odd_scenario(location="axis", prr=const(1.0), a0=1.0, t_end=2.0), "f_odd")
        with pytest.raises(HypothesisNotMet):
            check_sign_criterion(sol, s, branch="radial")

    def test_radial_branch_boundary_ignores_b2(self):
        # b1 = 0 makes the radial equation linear regardless of b2
        s = odd_scenario(prr=const(0.5), a0=1.0, t_end=3.0)
        sol = run_linear(s, "f_odd")
        rep = check_sign_criterion(sol, s, branch="radial")
        assert rep.status == "PASS"
        assert rep.predicted_bound == pytest.approx(1.0)

    def test_bound_holds_for_random_nonneg_profiles(self):
        rng = np.random.default_rng(2024)
        for _ in range(25):
            slope = -float(rng.uniform(0.4, 2.0))
            t_end = -1.0 / slope * 1.2 + 0.3
            s = odd_scenario(
                location="axis", pzz=random_nonneg_profile(rng, t_end), c0z=slope, t_end=t_end
            )
            sol = run_linear(s, "g_axis")
            rep = check_sign_criterion(sol, s)
            assert rep.status == "PASS"
            assert rep.observed <= rep.predicted_bound + 1e-6


class TestQuarterThreshold:
    def _scenario(self, h_value, t_end=0.5):
        return axis_even(
            b0=1.0, prr=PoleScaledProfile(T=1.0, H=const(h_value)), t_end=t_end
        )

    def test_subcritical_has_at_most_one_zero(self):
        rep = check_quarter_threshold(self._scenario(0.2), s_window=50.0)
        assert rep.status == "PASS"
        assert rep.diagnostics["classification"] == "non_oscillatory"
        assert rep.diagnostics["zero_count"] <= 1

    def test_marginal_is_indeterminate(self):
        rep = check_quarter_threshold(self._scenario(0.25), s_window=50.0)
        assert rep.status == "INDETERMINATE"

    def test_supercritical_spacing(self):
        rep = check_quarter_threshold(self._scenario(0.5), s_window=50.0)
        assert rep.status == "PASS"
        assert rep.predicted_bound == pytest.approx(2 * math.pi)
        assert rep.diagnostics["max_spacing_deviation"] <= 1e-6

    def test_cross_check_agreement(self):
        rep = check_quarter_threshold(self._scenario(0.5), s_window=50.0)
        cc = rep.diagnostics["cross_check"]
        assert cc["agree"]
        assert cc["mapped_zero_count"] == cc["oracle_zero_count"] > 0

    def test_requires_pole_profile(self):
        with pytest.raises(HypothesisNotMet):
            check_quarter_threshold(axis_even(b0=1.0, prr=const(1.0)))

    def test_requires_rotation(self):
        s = axis_even(prr=PoleScaledProfile(T=1.0, H=const(0.5)), t_end=0.5)
        with pytest.raises(HypothesisNotMet):
            check_quarter_threshold(s)


class TestRotationBlowup:
    def test_rate_constant_closed_form(self):
        # k (k + 1) = 2 has positive root k = 1
        assert rotation_rate_constant(1.0, 2.0 / math.log(2.0)) == pytest.approx(1.0)

    def test_ratio_bound_is_zero_at_threshold(self):
        a, c2 = 1.0, 2.0 / math.log(2.0)
        k = rotation_rate_constant(a, c2)
        assert asymptotic_ratio_bound(-a, c2, k) == pytest.approx(0.0, abs=1e-15)

    def test_branch_two_envelope(self):
        s = boundary_even(b1=0.5, b2=-1.5, a0=1.0, prr=const(-0.75), t_end=3.0)
        rep = check_rotation_blowup(s)
        assert rep.status == "PASS"
        assert rep.diagnostics["branch"] == 2
        assert rep.predicted_bound == pytest.approx(math.sqrt(3.0) - 1.0)
        assert rep.observed <= rep.predicted_bound + 1e-6

    def test_branch_one_band_edge(self):
        # a = 1, c^2 = 2/ln 2 gives k = 1; constant profile at the band edge -k^2
        c2 = 2.0 / math.log(2.0)
        b2 = -1.0 / math.log(2.0) - 1.0  # makes 2 b1 (b1+b2) = -c^2 with b1 = 1
        s = boundary_even(b1=1.0, b2=b2, a0=1.0, prr=const(-1.0 - 3.0), t_end=8.0)
        rep = check_rotation_blowup(s)
        assert rep.diagnostics["branch"] == 1
        assert rep.diagnostics["k"] == pytest.approx(1.0)
        assert rep.status == "PASS"  # crossing observed
        assert rep.predicted_bound is None
        assert rep.diagnostics["ratio_bound_threshold"] == pytest.approx(0.0, abs=1e-15)
        assert rep.diagnostics["observed_end_ratio"] <= 1e-5

    def test_band_violation_rejected(self):
        c2 = 2.0 / math.log(2.0)
        b2 = -1.0 / math.log(2.0) - 1.0
        s = boundary_even(b1=1.0, b2=b2, a0=1.0, prr=const(-10.0), t_end=4.0)
        with pytest.raises(HypothesisNotMet):
            check_rotation_blowup(s)

    def test_wrong_rotation_sign_rejected(self):
        s = boundary_even(b1=1.0, b2=1.0, a0=1.0, prr=const(0.0), t_end=2.0)
        with pytest.raises(HypothesisNotMet):
            check_rotation_blowup(s)


class TestMonotonePressure:
    def test_constant_coefficient_closed_form(self):
        s = odd_scenario(pzz=const(-1.0), c0z=-2.0, t_end=2.0)
        rep = check_monotone_pressure(s)
        assert rep.status == "PASS"
        assert rep.predicted_bound == pytest.approx(1.0 / math.sqrt(3.0))
        assert rep.observed == pytest.approx(ARTANH_HALF, abs=1e-8)

    def test_increasing_coefficient(self):
        s = odd_scenario(pzz=pw((0.0, -1.0), (2.0, 1.0)), c0z=-2.0, t_end=2.0)
        rep = check_monotone_pressure(s)
        assert rep.status == "PASS"
        assert rep.observed <= 1.0 / math.sqrt(3.0) + 1e-6
        assert rep.diagnostics["energy_drift_rel"] <= 1e-8

    def test_negative_nu_squared_rejected(self):
        s = odd_scenario(pzz=const(-4.0), c0z=-1.0, t_end=2.0)
        with pytest.raises(HypothesisNotMet):
            check_monotone_pressure(s)

    def test_decreasing_coefficient_rejected(self):
        s = odd_scenario(pzz=pw((0.0, -0.5), (2.0, -1.5)), c0z=-2.0, t_end=2.0)
        with pytest.raises(HypothesisNotMet):
            check_monotone_pressure(s)

    def test_marginal_nu_gives_vacuous_bound(self):
        # a = 1, Q(0) = -1: g = e^{-t} never vanishes and the envelope g <= 1 holds
        s = odd_scenario(pzz=const(-1.0), c0z=-1.0, t_end=4.0)
        rep = check_monotone_pressure(s)
        assert rep.status == "PASS"
        assert rep.predicted_bound == math.inf
        assert rep.observed is None

    def test_random_nondecreasing_profiles(self):
        rng = np.random.default_rng(11)
        for _ in range(25):
            q0 = -float(rng.uniform(0.2, 2.0))
            a = math.sqrt(-q0) * float(rng.uniform(1.05, 2.0))
            nu = math.sqrt(a * a + q0)
            t_end = 1.0 / nu * 1.3 + 0.2
            s = odd_scenario(
                pzz=random_nondecreasing_profile(rng, q0, t_end), c0z=-a, t_end=t_end
            )
            rep = check_monotone_pressure(s)
            assert rep.status == "PASS"
            assert rep.observed <= rep.predicted_bound + 1e-6
            assert rep.diagnostics["energy_drift_rel"] <= 1e-7


class TestSturmCompare:
    def test_constant_pair_with_companion(self):
        rep = sturm_compare(const(1.0), const(0.0), (1.0, 0.0), (0.0, 3.0))
        assert rep.ordering_ok and rep.separation_ok
        # companion of the zero-coefficient equation from unit data is t
        assert rep.companion["max_deviation"] <= 1e-6
        grid_head = rep.companion["values_head"]
        assert grid_head[0] == pytest.approx(0.0, abs=1e-12)

    def test_cosh_envelope_saturation(self):
        rep = sturm_compare(const(-4.0), const(-4.0), (1.0, 0.0), (0.0, 3.0))
        env = rep.envelope
        assert env is not None and env["k"] == 2.0
        assert env["ok"]
        assert abs(env["max_excess_over_cosh"]) <= 1e-8

    def test_zero_interlacing(self):
        rep = sturm_compare(const(4.0), const(1.0), (1.0, 0.0), (0.0, 7.0))
        # slow zeros every pi starting at pi/2; fast zeros every pi/2
        assert len(rep.zeros_slow) == 2
        assert all(c >= 1 for c in rep.gap_counts)
        assert rep.separation_ok

    def test_ordering_violation(self):
        with pytest.raises(OrderingViolated):
            sturm_compare(const(0.0), const(1.0), (1.0, 0.0), (0.0, 2.0))

    def test_companion_solves_equation_for_random_band_profiles(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            k2 = float(rng.uniform(0.2, 4.0))
            ts = np.unique(np.concatenate(([0.0], np.sort(rng.uniform(0.0, 3.0, 3)))))
            vals = -k2 * rng.uniform(0.0, 1.0, len(ts))
            prof = pw(*[(float(a), float(b)) for a, b in zip(ts, vals)])
            rep = sturm_compare(prof, prof, (1.0, 0.0), (0.0, 3.0))
            assert rep.companion["max_deviation"] <= 1e-6
