"""Entanglement-assisted binary interferometry numerics.

Truncated Fock-space simulation of weak-perturbation detection: probe
synthesis, brute-force and closed-form input-output overlaps, optimal
Neyman-Pearson decisions, difference-photocurrent statistics, and a batch
sweep front end.
"""

from .errors import (BinterfError, ConfigError, ConvergenceError,
                     NoSolutionError, OutOfEnvelopeError, PrecisionLossError)
from .fock import (Cutoff, Displacement, FockVec, OperatorMatrix, Squeeze,
                   Target, TwoModeFock, TwoModePhase, apply_mixer,
                   apply_perturbation, build_unitary, inner_product,
                   mean_total_photons, mixer_unitary,
                   number_difference_variance, tail_mass)
from .probes import (Coherent, CustomSingle, CustomTwoMode, SqueezedVacuum,
                     TwinBeam, Vacuum, energy_consistency_gap, is_two_mode,
                     mean_photon_number, optimal_phase_probe, param_for_energy,
                     synthesize)
from .oracle import OracleOverlap, auto_cutoff, brute_force_overlap, oracle_overlap
from .overlaps import (DisputedOverlap, OverlapResult, coherent_squeeze,
                       sqvac_displacement, sqvac_squeeze, sqvac_squeeze_min_r,
                       twinbeam_displacement, twinbeam_displacement_min,
                       twinbeam_phase, twinbeam_phase_min,
                       twinbeam_phase_min_reference, twinbeam_squeeze,
                       twinbeam_squeeze_min, twinbeam_squeeze_min_scaling)
from .decision import (EigenPhasePolygon, HelstromResult, ROCPoint,
                       SensitivityResult, SensitivitySpec, deficit_threshold,
                       default_mu_grid, detection_probability, helstrom_np,
                       min_detectable, optimal_probe_superposition,
                       polygon_min_overlap, pure_density, roc_curve)
from .photocurrent import (PhotocurrentResult, closed_form_p_zero,
                           min_detectable_photocurrent, p_zero_dense,
                           p_zero_difference)
from .config import ExperimentConfig, load_config
from .sweeps import (FitResult, Table, fit_scaling, run_overlap,
                     run_photocurrent, run_roc, run_sensitivity)

__version__ = "0.1.0"
