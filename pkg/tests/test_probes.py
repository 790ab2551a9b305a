"""Probe synthesis tests: amplitudes against closed forms, energy round trips."""
import cmath
import math

import numpy as np
import pytest

from binterf import (Coherent, CustomSingle, CustomTwoMode, Cutoff, SqueezedVacuum,
                     TwinBeam, TwoModePhase, Vacuum, apply_perturbation,
                     energy_consistency_gap, inner_product, is_two_mode,
                     mean_photon_number, mean_total_photons,
                     number_difference_variance, optimal_phase_probe,
                     param_for_energy, synthesize)
from binterf.errors import ConvergenceError


class TestMeanPhotonNumber:
    @pytest.mark.parametrize("probe,expected", [
        (Vacuum(), 0.0),
        (Coherent(1.3 * cmath.exp(0.4j)), 1.69),
        (SqueezedVacuum(0.9), math.sinh(0.9) ** 2),
        (TwinBeam(0.5), 2 * 0.25 / 0.75),
        (CustomSingle((0.0, 1.0)), 1.0),
    ])
    def test_analytic_values(self, probe, expected):
        assert mean_photon_number(probe) == pytest.approx(expected, rel=1e-12)

    def test_custom_two_mode_counts_both_modes(self):
        c = np.zeros((4, 4))
        c[1, 2] = 1.0
        assert mean_photon_number(CustomTwoMode(c)) == pytest.approx(3.0)

    @pytest.mark.parametrize("kind", [Coherent, SqueezedVacuum, TwinBeam])
    @pytest.mark.parametrize("n_mean", [0.0, 0.3, 2.0, 50.0])
    def test_param_for_energy_round_trip(self, kind, n_mean):
        probe = param_for_energy(kind, n_mean)
        assert mean_photon_number(probe) == pytest.approx(n_mean, rel=1e-12, abs=1e-12)

    def test_vacuum_cannot_carry_energy(self):
        assert isinstance(param_for_energy(Vacuum, 0.0), Vacuum)
        with pytest.raises(ValueError):
            param_for_energy(Vacuum, 0.5)

    def test_custom_probes_have_no_energy_parametrization(self):
        with pytest.raises(ValueError):
            param_for_energy(CustomSingle, 1.0)


class TestSynthesis:
    def test_coherent_amps_match_poisson_closed_form(self):
        alpha = 0.8 * cmath.exp(0.3j)
        st = synthesize(Coherent(alpha), Cutoff(48))
        n = np.arange(48)
        ref = np.array([cmath.exp(-abs(alpha) ** 2 / 2) * alpha ** k
                        / math.sqrt(math.factorial(k)) for k in n])
        assert np.allclose(st.amps, ref, atol=1e-12)

    def test_squeezed_vacuum_amps_match_closed_form(self):
        zeta = 0.9 * cmath.exp(1.2j)
        r, psi = abs(zeta), cmath.phase(zeta)
        st = synthesize(SqueezedVacuum(zeta), Cutoff(96))
        assert np.allclose(st.amps[1::2], 0.0)
        for m in (0, 1, 2, 7, 20):
            ref = (math.sqrt(1 / math.cosh(r))
                   * (cmath.exp(1j * psi) * math.tanh(r)) ** m
                   * math.sqrt(math.factorial(2 * m)) / (2 ** m * math.factorial(m)))
            assert st.amps[2 * m] == pytest.approx(ref, abs=1e-12)

    def test_twin_beam_is_geometric_and_correlated(self):
        st = synthesize(TwinBeam(0.5), Cutoff(32))
        off_diag = st.amps - np.diag(np.diag(st.amps))
        assert np.all(off_diag == 0)
        ratio = st.amps[5, 5] / st.amps[4, 4]
        assert ratio == pytest.approx(0.5, rel=1e-12)
        assert number_difference_variance(st) == pytest.approx(0.0, abs=1e-14)

    def test_custom_amplitudes_are_normalized_and_padded(self):
        st = synthesize(CustomSingle((1.0, 1.0j)), Cutoff(8))
        assert st.dim == 8
        assert st.norm() == pytest.approx(1.0)
        assert st.amps[1] == pytest.approx(1j / math.sqrt(2))

    def test_custom_amplitudes_must_fit_the_cutoff(self):
        with pytest.raises(ValueError):
            synthesize(CustomSingle((1.0,) * 9), Cutoff(8))

    def test_all_zero_custom_amplitudes_rejected(self):
        with pytest.raises(ValueError):
            CustomSingle((0.0, 0.0))
        with pytest.raises(ValueError):
            CustomTwoMode(np.zeros((2, 2)))

    def test_tail_budget_enforced(self):
        with pytest.raises(ConvergenceError) as err:
            synthesize(Coherent(3.0), Cutoff(12), tail_tol=1e-10)
        assert err.value.dim == 12
        synthesize(Coherent(3.0), Cutoff(96), tail_tol=1e-10)

    @pytest.mark.parametrize("probe", [
        Vacuum(), Coherent(1.4), SqueezedVacuum(0.8 * cmath.exp(0.6j)), TwinBeam(0.6),
    ])
    def test_energy_consistency(self, probe):
        assert energy_consistency_gap(probe, Cutoff(96)) < 1e-9

    def test_is_two_mode(self):
        assert is_two_mode(TwinBeam(0.1))
        assert is_two_mode(CustomTwoMode(np.eye(2)))
        assert not is_two_mode(Coherent(1.0))


class TestOptimalPhaseProbe:
    def test_single_component_is_a_phase_eigenstate(self):
        c = Cutoff(16)
        phi = 0.3
        for d in (0, 1, 3, -2):
            psi = optimal_phase_probe([d], [1.0], c)
            evolved = apply_perturbation(psi, TwoModePhase(phi))
            assert inner_product(psi, evolved) == pytest.approx(
                cmath.exp(1j * d * phi), abs=1e-12)

    def test_two_component_overlap_is_set_by_the_eigenphase_gap(self):
        c = Cutoff(16)
        phi = 0.3
        psi = optimal_phase_probe([1, 3], [1.0, 1.0], c)
        evolved = apply_perturbation(psi, TwoModePhase(phi))
        expected = math.cos((3 - 1) * phi / 2) ** 2
        assert abs(inner_product(psi, evolved)) ** 2 == pytest.approx(expected, abs=1e-12)

    def test_weights_shape_probe_energy(self):
        c = Cutoff(16)
        psi = optimal_phase_probe([0, 4], [1.0, 1.0], c)
        assert mean_total_photons(psi) == pytest.approx(2.0, abs=1e-12)

    def test_argument_validation(self):
        c = Cutoff(8)
        with pytest.raises(ValueError):
            optimal_phase_probe([1, 2], [1.0], c)
        with pytest.raises(ValueError):
            optimal_phase_probe([], [], c)
        with pytest.raises(ValueError):
            optimal_phase_probe([1], [0.0], c)
        with pytest.raises(ValueError):
            optimal_phase_probe([8], [1.0], c)
