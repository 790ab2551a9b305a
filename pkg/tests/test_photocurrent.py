"""Difference-photocurrent tests: recurrence kernel vs dense evolution vs
closed forms, plus the threshold solver."""
import cmath
import math

import numpy as np
import pytest
from scipy.optimize import brentq
from scipy.special import i0e

from binterf import Cutoff, Displacement, Squeeze, Target, TwoModePhase
from binterf.errors import ConvergenceError, NoSolutionError, OutOfEnvelopeError
from binterf.photocurrent import (PhotocurrentResult, closed_form_p_zero,
                                  min_detectable_photocurrent, p_zero_dense,
                                  p_zero_difference)


def twinbeam_energy(x):
    return 2 * x**2 / (1 - x**2)


class TestResultType:
    def test_probability_window(self):
        with pytest.raises(ValueError):
            PhotocurrentResult(1.2, 8, 0.0)

    def test_unperturbed_arm_never_false_alarms(self):
        res = PhotocurrentResult(0.75, 64, 1e-12)
        assert res.q0 == 0.0
        assert res.q_det == pytest.approx(0.25)


class TestKernelAgainstDense:
    @pytest.mark.parametrize("pert", [
        Displacement(0.9),
        Displacement(0.6 * cmath.exp(0.8j)),
        Displacement(0.7, target=Target.MODE_B),
        Squeeze(0.35),
        Squeeze(0.3 * cmath.exp(-1.9j)),
        TwoModePhase(0.25),
    ])
    def test_recurrences_match_the_evolved_state(self, pert):
        x = 0.5
        kernel = p_zero_difference(x, pert).p_zero
        dense = p_zero_dense(x, pert, 96)
        assert kernel == pytest.approx(dense, abs=1e-9)

    def test_arm_symmetry(self):
        a = p_zero_difference(0.4, Displacement(0.7)).p_zero
        b = p_zero_difference(0.4, Displacement(0.7, target=Target.MODE_B)).p_zero
        assert a == pytest.approx(b, rel=1e-14)

    def test_rejects_undirected_single_mode_perturbations(self):
        with pytest.raises(ValueError):
            p_zero_difference(0.4, Displacement(0.5, target=Target.BOTH))

    def test_rejects_critical_twin_beam(self):
        with pytest.raises(ValueError):
            p_zero_difference(1.0, Displacement(0.5))


class TestLimits:
    def test_identity_perturbation_keeps_zero_difference(self):
        assert p_zero_difference(0.5, Displacement(0.0)).p_zero == pytest.approx(1.0)
        assert p_zero_difference(0.5, TwoModePhase(0.0)).p_zero == pytest.approx(1.0)

    def test_vacuum_probe_reduces_to_single_mode_survivals(self):
        y = 0.8
        res = p_zero_difference(0.0, Displacement(math.sqrt(y)))
        assert res.p_zero == pytest.approx(math.exp(-y), rel=1e-12)
        r = 0.4
        assert p_zero_difference(0.0, Squeeze(r)).p_zero == pytest.approx(
            1 / math.cosh(r), rel=1e-12)

    def test_vacuum_probe_is_blind_to_the_two_mode_phase(self):
        res = p_zero_difference(0.0, TwoModePhase(0.3))
        assert res.q_det == pytest.approx(0.0, abs=1e-14)

    def test_phase_survival_depends_only_on_the_squeeze_modulus(self):
        a = p_zero_difference(0.5, Squeeze(0.3)).p_zero
        b = p_zero_difference(0.5, Squeeze(0.3 * cmath.exp(2.4j))).p_zero
        assert a == pytest.approx(b, rel=1e-14)


class TestClosedForms:
    @pytest.mark.parametrize("x", [0.3, 0.5, 0.7])
    @pytest.mark.parametrize("alpha_sq", [0.09, 0.49, 1.0])
    def test_displacement_form_is_exact(self, x, alpha_sq):
        res = p_zero_difference(x, Displacement(math.sqrt(alpha_sq)))
        ref = closed_form_p_zero(Displacement, twinbeam_energy(x), alpha_sq)
        assert res.p_zero == pytest.approx(ref, abs=1e-12)

    def test_displacement_form_handles_large_arguments(self):
        # At N = 50, y = 50 the bare factors exp(-2550) and I0(50 sqrt(2600))
        # underflow and overflow separately; the scaled evaluation keeps the
        # product on scale.
        assert math.exp(-2550.0) == 0.0
        with np.errstate(over="ignore"):
            assert np.isinf(float(i0e(2549.0) * np.exp(2549.0)))
        val = closed_form_p_zero(Displacement, 50.0, 50.0)
        assert val == pytest.approx(0.004839417668705062, rel=1e-12)

    def test_quadratic_squeeze_display_at_the_reference_point(self):
        assert closed_form_p_zero(Squeeze, 2.0, 0.05) == pytest.approx(0.995)

    def test_measured_squeeze_coefficient(self):
        # The exact small-r expansion is 1 - (N^2 + 2N + 2) r^2 / 4, which
        # disagrees with the served quadratic display 1 - N r^2 (25% low at
        # N = 2).  Pin the measured value so the discrepancy stays visible.
        n_mean, r = 2.0, 1e-4
        x = math.sqrt(n_mean / (n_mean + 2))
        p = p_zero_difference(x, Squeeze(r)).p_zero
        measured = (1 - p) / r**2
        exact_coeff = (n_mean**2 + 2 * n_mean + 2) / 4
        assert measured == pytest.approx(exact_coeff, rel=1e-5)
        printed_coeff = n_mean
        assert abs(measured - printed_coeff) / measured > 0.15

    def test_measured_phase_coefficient(self):
        # Exact small-phi expansion: 1 - N(N+2) phi^2, against the served
        # display 1 - (N phi)^2 / 2.
        n_mean, phi = 2.0, 1e-4
        x = math.sqrt(n_mean / (n_mean + 2))
        p = p_zero_difference(x, TwoModePhase(phi)).p_zero
        measured = (1 - p) / phi**2
        assert measured == pytest.approx(n_mean * (n_mean + 2), rel=1e-5)
        printed_coeff = n_mean**2 / 2
        assert abs(measured - printed_coeff) / measured > 0.5

    def test_quadratic_envelopes_are_enforced(self):
        with pytest.raises(OutOfEnvelopeError):
            closed_form_p_zero(Squeeze, 10.0, 0.5)
        with pytest.raises(OutOfEnvelopeError):
            closed_form_p_zero(TwoModePhase, 10.0, 0.2)

    def test_argument_validation(self):
        with pytest.raises(ValueError):
            closed_form_p_zero(Displacement, -1.0, 0.1)
        with pytest.raises(ValueError):
            closed_form_p_zero(Displacement, 1.0, -0.1)
        with pytest.raises(ValueError):
            closed_form_p_zero(int, 1.0, 0.1)

    def test_detection_grows_with_the_displacement(self):
        n_mean = 2.0
        grid = [closed_form_p_zero(Displacement, n_mean, y)
                for y in np.linspace(0.0, 5.0, 40)]
        assert all(a >= b - 1e-14 for a, b in zip(grid, grid[1:]))


class TestConvergenceControl:
    def test_explicit_cutoff_sets_the_term_count(self):
        res = p_zero_difference(0.3, Displacement(0.5), c=Cutoff(32))
        assert res.n_terms == 64
        assert res.convergence_delta <= 1e-9

    def test_undersized_cutoff_raises_with_both_values(self):
        with pytest.raises(ConvergenceError) as err:
            p_zero_difference(0.9, Displacement(1.0), c=Cutoff(8))
        assert err.value.dim == 8
        assert err.value.delta > 1e-9
        assert err.value.value_lo != err.value.value_hi


class TestMinDetectable:
    def test_round_trip_to_the_target(self):
        for kind, n_mean, q_target in [(Displacement, 10.0, 0.2),
                                       (Squeeze, 10.0, 0.1),
                                       (TwoModePhase, 10.0, 0.1)]:
            m = min_detectable_photocurrent(kind, n_mean, q_target)
            x = math.sqrt(n_mean / (n_mean + 2))
            if kind is Displacement:
                pert = Displacement(math.sqrt(m))
            elif kind is Squeeze:
                pert = Squeeze(m)
            else:
                pert = TwoModePhase(m)
            q = p_zero_difference(x, pert).q_det
            assert q == pytest.approx(q_target, rel=1e-8)

    def test_reference_values(self):
        assert min_detectable_photocurrent(Displacement, 10.0, 0.2) == pytest.approx(
            0.021547673832074815, rel=1e-9)
        assert min_detectable_photocurrent(Squeeze, 10.0, 0.1) == pytest.approx(
            0.0644009747606071, rel=1e-9)
        assert min_detectable_photocurrent(TwoModePhase, 10.0, 0.1) == pytest.approx(
            0.03256068795875536, rel=1e-9)

    def test_displacement_agrees_with_direct_closed_form_inversion(self):
        n_mean, q_target = 10.0, 0.2
        solved = min_detectable_photocurrent(Displacement, n_mean, q_target)
        z_of = lambda y: y * math.sqrt(n_mean * (n_mean + 2))
        f = lambda y: math.exp(z_of(y) - y * (1 + n_mean)) * i0e(z_of(y)) - (1 - q_target)
        direct = brentq(f, 1e-12, 10.0, xtol=1e-14)
        assert solved == pytest.approx(direct, rel=1e-6)

    def test_weak_targets_need_tiny_magnitudes(self):
        m = min_detectable_photocurrent(Displacement, 10.0, 1e-6)
        assert 0 < m < 1e-6

    def test_unreachable_target_raises(self):
        # A vacuum probe's squeeze survival never drops below sech(cap).
        with pytest.raises(NoSolutionError) as err:
            min_detectable_photocurrent(Squeeze, 0.0, 0.999)
        assert err.value.envelope == 2.0

    def test_target_validation(self):
        with pytest.raises(ValueError):
            min_detectable_photocurrent(Displacement, 1.0, 0.0)
        with pytest.raises(ValueError):
            min_detectable_photocurrent(Displacement, 1.0, 1.0)
        with pytest.raises(ValueError):
            min_detectable_photocurrent(int, 1.0, 0.5)
