"""Sweep-layer tests: grid orchestration, row isolation, fits, serialization."""
import io
import json
import math

import pytest

from binterf import Cutoff, Displacement, TwinBeam
from binterf.config import (CutoffPolicy, DecisionConfig, ExperimentConfig,
                            OutputConfig, PerturbationConfig, ProbeConfig)
from binterf.errors import ConfigError
from binterf.oracle import oracle_overlap
from binterf.overlaps import (twinbeam_displacement, twinbeam_displacement_min,
                              twinbeam_phase_min, twinbeam_phase_min_reference)
from binterf.photocurrent import min_detectable_photocurrent, p_zero_difference
from binterf.sweeps import (OVERLAP_COLUMNS, fit_scaling, read_rows, run_overlap,
                            run_photocurrent, run_roc, run_sensitivity, write_csv,
                            write_jsonl)


def make_config(probe_family="twinbeam", energies=(0.5, 2.0), probe_phase=0.0,
                pert_family="displacement", magnitudes=(0.0, 0.5), pert_phase=0.0,
                target="mode_a", decision=None, cutoff=None):
    return ExperimentConfig(
        ProbeConfig(probe_family, tuple(energies), probe_phase),
        PerturbationConfig(pert_family, tuple(magnitudes), pert_phase, target),
        decision or DecisionConfig(),
        cutoff or CutoffPolicy(),
        OutputConfig(),
    )


class TestRunOverlap:
    def test_rows_match_direct_evaluation(self):
        cfg = make_config(energies=(2.0,), magnitudes=(0.0, 0.5))
        table = run_overlap(cfg)
        assert table.columns == tuple(OVERLAP_COLUMNS)
        assert [r["index"] for r in table.rows] == [0, 1]
        first, second = table.rows
        assert first["closed_form_sq"] == pytest.approx(1.0)
        assert first["error"] is None
        expected = twinbeam_displacement(2.0, 0.25).overlap_sq
        assert second["closed_form_sq"] == pytest.approx(expected, rel=1e-14)
        ora = oracle_overlap(TwinBeam(math.sqrt(0.5)), Displacement(0.5))
        assert second["oracle_sq"] == pytest.approx(ora.overlap_sq, rel=1e-12)
        assert second["discrepancy"] < 1e-9
        assert second["flagged"] is False

    def test_disputed_pair_emits_both_values_and_the_flag(self):
        cfg = make_config(probe_family="sqvac", energies=(1.0,),
                          probe_phase=math.pi / 2,
                          magnitudes=(math.sqrt(0.1),))
        row = run_overlap(cfg).rows[0]
        assert row["closed_form_sq"] == pytest.approx(0.8533558500369686, rel=1e-12)
        assert row["oracle_sq"] == pytest.approx(0.5583089966254351, abs=1e-6)
        assert row["flagged"] is True
        assert row["discrepancy"] > 0.29

    def test_unsupported_pair_is_a_config_error(self):
        cfg = make_config(probe_family="coherent", pert_family="displacement")
        with pytest.raises(ConfigError, match="no closed form"):
            run_overlap(cfg)

    def test_row_failures_are_isolated(self):
        cfg = make_config(energies=(0.5,), pert_family="squeeze",
                          magnitudes=(0.1, 1.5), cutoff=CutoffPolicy("fixed", 24))
        table = run_overlap(cfg)
        good, bad = table.rows
        assert good["error"] is None
        assert bad["error"].startswith("ConvergenceError")
        assert bad["oracle_sq"] is None
        assert set(bad) == set(OVERLAP_COLUMNS)

    def test_thread_count_does_not_change_the_bytes(self):
        cfg = make_config(energies=(0.5, 2.0, 5.0), magnitudes=(0.0, 0.3, 0.9))
        serial, threaded = io.StringIO(), io.StringIO()
        write_csv(run_overlap(cfg, threads=1), serial)
        write_csv(run_overlap(cfg, threads=4), threaded)
        assert serial.getvalue() == threaded.getvalue()


class TestRunSensitivity:
    NP = DecisionConfig(kind="np", q0=0.01, acceptance_ratio=2.0)

    def test_displacement_solution_matches_the_closed_inversion(self):
        cfg = make_config(energies=(5.0, 20.0), magnitudes=(0.1,), decision=self.NP)
        table = run_sensitivity(cfg)
        for row, n_mean in zip(table.rows, (5.0, 20.0)):
            assert row["magnitude_kind"] == "alpha_sq"
            closed = twinbeam_displacement_min(n_mean, row["deficit"])
            assert row["closed_form_min"] == pytest.approx(closed, rel=1e-14)
            assert row["magnitude_min"] == pytest.approx(closed, rel=1e-7)
            assert row["converged"] is True
            assert row["error"] is None

    def test_phase_rows_carry_the_printed_form_flag(self):
        cfg = make_config(pert_family="phase", energies=(10.0,), magnitudes=(0.1,),
                          decision=self.NP)
        row = run_sensitivity(cfg).rows[0]
        deficit = row["deficit"]
        assert row["printed_form_min"] == pytest.approx(
            twinbeam_phase_min_reference(10.0, deficit), rel=1e-12)
        assert row["magnitude_min"] == pytest.approx(
            twinbeam_phase_min(10.0, deficit), rel=1e-7)
        assert row["flagged"] is True

    def test_oracle_backed_pair_reports_its_cutoff(self):
        cfg = make_config(probe_family="sqvac", energies=(1.0,),
                          probe_phase=math.pi / 2, magnitudes=(0.1,),
                          decision=DecisionConfig(kind="np", q0=0.05,
                                                  acceptance_ratio=2.0))
        row = run_sensitivity(cfg).rows[0]
        assert row["error"] is None
        assert row["closed_form_min"] is None
        assert row["cutoff_dim"] >= 16
        assert row["magnitude_min"] > 0

    def test_photocurrent_kind(self):
        dec = DecisionConfig(kind="photocurrent", q_target=0.1)
        cfg = make_config(pert_family="phase", energies=(10.0,), magnitudes=(0.1,),
                          decision=dec)
        row = run_sensitivity(cfg).rows[0]
        assert row["decision_kind"] == "photocurrent"
        assert row["magnitude_min"] == pytest.approx(0.03256068795875536, rel=1e-9)

    def test_np_kind_requires_an_operating_point(self):
        cfg = make_config(decision=DecisionConfig(kind="np"))
        with pytest.raises(ConfigError, match="q0 and acceptance_ratio"):
            run_sensitivity(cfg)

    def test_photocurrent_kind_requires_a_twin_beam(self):
        dec = DecisionConfig(kind="photocurrent", q_target=0.1)
        cfg = make_config(probe_family="coherent", pert_family="squeeze",
                          decision=dec)
        with pytest.raises(ConfigError, match="reads a twin beam"):
            run_sensitivity(cfg)

    def test_photocurrent_kind_requires_a_target(self):
        cfg = make_config(decision=DecisionConfig(kind="photocurrent"))
        with pytest.raises(ConfigError, match="q_target"):
            run_sensitivity(cfg)

    def test_undetectable_rows_carry_the_failure(self):
        cfg = make_config(probe_family="vacuum", energies=(0.0,),
                          pert_family="phase", decision=self.NP)
        row = run_sensitivity(cfg).rows[0]
        assert row["magnitude_min"] is None
        assert "NoSolutionError" in row["error"]


class TestRunRoc:
    def test_pure_pair_stays_on_the_analytic_boundary(self):
        dec = DecisionConfig(mu_points=25)
        cfg = make_config(probe_family="vacuum", energies=(0.0,),
                          magnitudes=(0.5,), decision=dec,
                          cutoff=CutoffPolicy("fixed", 24))
        table = run_roc(cfg)
        assert len(table.rows) == 25
        for row in table.rows:
            assert row["error"] is None
            assert row["kappa_sq"] == pytest.approx(math.exp(-0.25), abs=1e-10)
            assert row["deviation"] < 1e-8

    def test_multiplier_grid_comes_from_the_decision_config(self):
        dec = DecisionConfig(mu_min=0.1, mu_max=10.0, mu_points=3)
        cfg = make_config(probe_family="vacuum", energies=(0.0,),
                          magnitudes=(0.5,), decision=dec,
                          cutoff=CutoffPolicy("fixed", 16))
        mus = [row["mu"] for row in run_roc(cfg).rows]
        assert mus == pytest.approx([0.1, 1.0, 10.0])

    def test_oversized_states_are_rejected_up_front(self):
        cfg = make_config(energies=(20.0,), magnitudes=(0.5,))
        with pytest.raises(ConfigError, match="state dimension"):
            run_roc(cfg)


class TestRunPhotocurrent:
    def test_rows_match_the_kernel_and_closed_form(self):
        cfg = make_config(pert_family="squeeze", energies=(2.0,),
                          magnitudes=(0.05, 0.5))
        table = run_photocurrent(cfg)
        inside, outside = table.rows
        x = math.sqrt(2.0 / 4.0)
        assert inside["p_zero"] == pytest.approx(
            p_zero_difference(x, __import__("binterf").Squeeze(0.05)).p_zero, rel=1e-12)
        assert inside["closed_form_p_zero"] == pytest.approx(0.995)
        assert outside["closed_form_p_zero"] is None  # outside the quadratic envelope
        assert outside["p_zero"] is not None
        assert outside["error"] is None

    def test_displacement_magnitude_convention_is_squared_for_the_closed_form(self):
        cfg = make_config(energies=(2.0,), magnitudes=(0.5,))
        row = run_photocurrent(cfg).rows[0]
        from binterf.photocurrent import closed_form_p_zero
        assert row["closed_form_p_zero"] == pytest.approx(
            closed_form_p_zero(Displacement, 2.0, 0.25), rel=1e-12)
        assert row["p_zero"] == pytest.approx(row["closed_form_p_zero"], abs=1e-10)

    def test_requires_a_twin_beam_probe(self):
        cfg = make_config(probe_family="sqvac")
        with pytest.raises(ConfigError, match="reads a twin beam"):
            run_photocurrent(cfg)


class TestFitScaling:
    def test_exact_power_law(self):
        rows = [{"x": x, "y": 3.0 * x**-2} for x in (1.0, 2.0, 4.0, 8.0, 16.0)]
        fit = fit_scaling(rows, "x", "y")
        assert fit.slope == pytest.approx(-2.0, rel=1e-12)
        assert fit.intercept == pytest.approx(math.log(3.0), rel=1e-12)
        assert fit.stderr == pytest.approx(0.0, abs=1e-12)

    def test_sensitivity_scaling_regression(self):
        dec = DecisionConfig(kind="np", q0=0.005, acceptance_ratio=3.0)
        cfg = make_config(energies=(5.0, 10.0, 20.0, 40.0, 80.0),
                          magnitudes=(0.1,), decision=dec)
        rows = run_sensitivity(cfg).rows
        fit = fit_scaling(rows, "n_mean", "magnitude_min")
        assert fit.slope == pytest.approx(-0.94078953903077267, abs=1e-6)

    def test_needs_enough_rows(self):
        rows = [{"x": x, "y": 1.0 / x} for x in (1.0, 2.0, 3.0)]
        with pytest.raises(ValueError, match="at least 4 rows"):
            fit_scaling(rows, "x", "y")

    def test_rejects_nonpositive_values(self):
        rows = [{"x": x, "y": 1.0 - x} for x in (0.25, 0.5, 0.75, 1.0)]
        with pytest.raises(ValueError, match="positive values"):
            fit_scaling(rows, "x", "y")

    def test_rejects_missing_columns(self):
        rows = [{"x": 1.0}] * 5
        with pytest.raises(ValueError, match="cannot read numeric columns"):
            fit_scaling(rows, "x", "y")


class TestSerialization:
    def table(self):
        cfg = make_config(energies=(2.0,), magnitudes=(0.0, 0.5))
        return run_overlap(cfg)

    def test_csv_cells_round_trip_floats_exactly(self, tmp_path):
        table = self.table()
        path = tmp_path / "t.csv"
        with open(path, "w") as fh:
            write_csv(table, fh)
        rows = read_rows(str(path))
        assert len(rows) == 2
        assert float(rows[1]["oracle_sq"]) == table.rows[1]["oracle_sq"]
        assert rows[1]["flagged"] == "false"
        assert rows[0]["error"] == ""

    def test_jsonl_round_trip_preserves_types(self, tmp_path):
        table = self.table()
        path = tmp_path / "t.jsonl"
        with open(path, "w") as fh:
            write_jsonl(table, fh)
        lines = path.read_text().splitlines()
        assert len(lines) == 2
        parsed = json.loads(lines[1])
        assert parsed["oracle_sq"] == table.rows[1]["oracle_sq"]
        assert parsed["flagged"] is False
        assert parsed["error"] is None
        assert read_rows(str(path))[1]["oracle_sq"] == table.rows[1]["oracle_sq"]
