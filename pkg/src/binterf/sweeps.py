"""Sweep orchestration: parameter grids evaluated into flat tables.

Each run_* function takes a validated ExperimentConfig and returns a Table
whose rows are keyed by grid index, so output is byte-identical no matter
how many worker threads evaluate the grid.  Failures are isolated per row:
the row is emitted with its error column set and every dependent cell left
empty.  fit_scaling extracts power-law exponents from emitted tables.
"""
from __future__ import annotations

import cmath
import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import overlaps
from .config import ExperimentConfig, PerturbationConfig, ProbeConfig
from .decision import (SensitivitySpec, deficit_threshold, detection_probability,
                       helstrom_np, min_detectable, pure_density)
from .errors import BinterfError, ConfigError, OutOfEnvelopeError
from .fock import (Cutoff, Displacement, Squeeze, Target, TwoModePhase,
                   apply_perturbation, inner_product)
from .oracle import auto_cutoff, oracle_overlap
from .photocurrent import (closed_form_p_zero, min_detectable_photocurrent,
                           p_zero_difference)
from .probes import Coherent, SqueezedVacuum, TwinBeam, Vacuum, synthesize

# (probe family, perturbation family) pairs with a catalog closed form.
SUPPORTED_PAIRS = {
    ("twinbeam", "displacement"), ("twinbeam", "squeeze"), ("twinbeam", "phase"),
    ("vacuum", "displacement"), ("vacuum", "squeeze"), ("vacuum", "phase"),
    ("sqvac", "displacement"), ("sqvac", "squeeze"),
    ("coherent", "squeeze"),
}

# Printed phase-inversion form counts as flagged beyond this relative gap.
PRINTED_FORM_FLAG_RTOL = 0.1

# Helstrom eigenproblems get dense matrices; keep the flattened state small.
ROC_MAX_FLAT_DIM = 256

OVERLAP_COLUMNS = [
    "index", "probe_family", "perturbation_family", "n_mean", "magnitude",
    "closed_form_sq", "oracle_sq", "discrepancy", "flagged", "cutoff_dim",
    "convergence_delta", "error",
]
SENSITIVITY_COLUMNS = [
    "index", "probe_family", "perturbation_family", "decision_kind", "n_mean",
    "q0", "acceptance_ratio", "q_target", "deficit", "magnitude_kind",
    "magnitude_min", "closed_form_min", "printed_form_min", "flagged",
    "bracket_lo", "bracket_hi", "iterations", "converged", "cutoff_dim", "error",
]
ROC_COLUMNS = [
    "index", "probe_family", "perturbation_family", "n_mean", "magnitude",
    "mu", "q0", "q_det", "q_det_analytic", "deviation", "kappa_sq",
    "projector_rank", "cutoff_dim", "error",
]
PHOTOCURRENT_COLUMNS = [
    "index", "probe_family", "perturbation_family", "n_mean", "magnitude",
    "p_zero", "q_det", "closed_form_p_zero", "n_terms", "convergence_delta",
    "cutoff_dim", "error",
]


@dataclass(frozen=True)
class Table:
    columns: tuple
    rows: tuple


@dataclass(frozen=True)
class FitResult:
    slope: float
    intercept: float
    stderr: float


def _run_rows(n_rows: int, job: Callable[[int], dict], threads: int) -> list:
    if threads <= 1:
        return [job(i) for i in range(n_rows)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(job, range(n_rows)))


def _guarded(base: dict, compute: Callable[[], dict]) -> dict:
    row = dict(base)
    row["error"] = None
    try:
        row.update(compute())
    except (BinterfError, ValueError, ArithmeticError) as exc:
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def _finish(columns: Sequence[str], rows) -> Table:
    full = tuple({c: r.get(c) for c in columns} for r in rows)
    return Table(tuple(columns), full)


def _require_pair(probe: ProbeConfig, pert: PerturbationConfig):
    if (probe.family, pert.family) not in SUPPORTED_PAIRS:
        raise ConfigError(
            f"no closed form for probe {probe.family!r} under {pert.family!r}; "
            "supported pairs: " + ", ".join(sorted(f"{a}+{b}" for a, b in SUPPORTED_PAIRS)))


def _twinbeam_x(n_mean: float) -> float:
    return math.sqrt(n_mean / (n_mean + 2)) if n_mean > 0 else 0.0


def _probe_spec(probe: ProbeConfig, pert_family: str, n_mean: float):
    """Concrete probe with its configured orientation angle applied."""
    if pert_family == "phase" or probe.family == "twinbeam":
        return TwinBeam(_twinbeam_x(n_mean))
    if probe.family == "vacuum":
        return Vacuum()
    if probe.family == "coherent":
        return Coherent(math.sqrt(n_mean) * cmath.exp(1j * probe.phase))
    # sqvac orientation: phase is the catalog delta toward a displacement
    # (arg zeta = 2 delta) and the arg zeta itself toward a squeeze.
    arg = 2 * probe.phase if pert_family == "displacement" else probe.phase
    return SqueezedVacuum(math.asinh(math.sqrt(n_mean)) * cmath.exp(1j * arg))


def _perturbation(pert: PerturbationConfig, magnitude: float):
    target = Target.MODE_B if pert.target == "mode_b" else Target.MODE_A
    if pert.family == "displacement":
        return Displacement(magnitude * cmath.exp(1j * pert.phase), target)
    if pert.family == "squeeze":
        return Squeeze(magnitude * cmath.exp(1j * pert.phase), target)
    return TwoModePhase(magnitude)


def _relative_angle(probe: ProbeConfig, pert: PerturbationConfig) -> float:
    """Orientation of the probe in the frame where the perturbation is real."""
    if probe.family == "coherent" and pert.family == "squeeze":
        return probe.phase - pert.phase / 2
    return probe.phase - pert.phase


def _fixed_cutoff(cfg: ExperimentConfig) -> Cutoff | None:
    if cfg.cutoff.policy == "fixed":
        return Cutoff(cfg.cutoff.dim)
    return None


def _closed_overlap_sq(cfg: ExperimentConfig, n_mean: float, magnitude: float) -> float:
    probe, pert = cfg.probe, cfg.perturbation
    rel = _relative_angle(probe, pert)
    if pert.family == "displacement":
        return overlaps.twinbeam_displacement(n_mean, magnitude**2).overlap_sq
    if pert.family == "phase":
        return overlaps.twinbeam_phase(_twinbeam_x(n_mean), magnitude).overlap_sq
    if probe.family in ("twinbeam", "vacuum"):
        return overlaps.twinbeam_squeeze(_twinbeam_x(n_mean), magnitude).overlap_sq
    if probe.family == "sqvac":
        return overlaps.sqvac_squeeze(math.asinh(math.sqrt(n_mean)), rel,
                                      magnitude).overlap_sq
    return overlaps.coherent_squeeze(n_mean, rel, magnitude).overlap_sq


def run_overlap(cfg: ExperimentConfig, threads: int = 1) -> Table:
    """Closed-form vs oracle overlap for every (energy, magnitude) grid point."""
    _require_pair(cfg.probe, cfg.perturbation)
    grid = [(n, m) for n in cfg.probe.energies for m in cfg.perturbation.magnitudes]
    c = _fixed_cutoff(cfg)
    disputed = (cfg.probe.family, cfg.perturbation.family) == ("sqvac", "displacement")

    def job(i: int) -> dict:
        n_mean, magnitude = grid[i]
        base = {"index": i, "probe_family": cfg.probe.family,
                "perturbation_family": cfg.perturbation.family,
                "n_mean": n_mean, "magnitude": magnitude}

        def compute() -> dict:
            if disputed:
                rel = _relative_angle(cfg.probe, cfg.perturbation)
                rec = overlaps.sqvac_displacement(n_mean, rel, magnitude**2, c)
                return {"closed_form_sq": rec.formula.overlap_sq,
                        "oracle_sq": rec.oracle.overlap_sq,
                        "discrepancy": rec.discrepancy,
                        "flagged": rec.flagged,
                        "cutoff_dim": None,
                        "convergence_delta": rec.oracle.convergence_delta}
            closed = _closed_overlap_sq(cfg, n_mean, magnitude)
            ora = oracle_overlap(_probe_spec(cfg.probe, cfg.perturbation.family, n_mean),
                                 _perturbation(cfg.perturbation, magnitude), c)
            disc = abs(closed - ora.overlap_sq)
            return {"closed_form_sq": closed, "oracle_sq": ora.overlap_sq,
                    "discrepancy": disc,
                    "flagged": disc > overlaps.ORACLE_AGREEMENT_TOL,
                    "cutoff_dim": ora.dim,
                    "convergence_delta": ora.convergence_delta}

        return _guarded(base, compute)

    return _finish(OVERLAP_COLUMNS, _run_rows(len(grid), job, threads))


_MAGNITUDE_KIND = {"displacement": "alpha_sq", "squeeze": "r", "phase": "phi"}


def _np_envelope(probe_family: str, pert_family: str, n_mean: float) -> float:
    if pert_family == "displacement":
        # The squeezed-vacuum probe's misaligned branch needs magnitudes that
        # grow with N, so it keeps the full envelope.
        return 50.0 if probe_family == "sqvac" else 50.0 / (n_mean + 1)
    if pert_family == "squeeze":
        return 2.0
    return math.pi / 2


def _np_sensitivity_row(cfg: ExperimentConfig, n_mean: float,
                        spec: SensitivitySpec, c: Cutoff | None) -> dict:
    probe, pert = cfg.probe, cfg.perturbation
    deficit = deficit_threshold(spec.q0, spec.acceptance_ratio)
    rel = _relative_angle(probe, pert)
    oracle_meta = {}

    if (probe.family, pert.family) == ("sqvac", "displacement"):
        probe_spec = _probe_spec(probe, pert.family, n_mean)

        def overlap_sq_fn(alpha_sq: float) -> float:
            ora = oracle_overlap(probe_spec, Displacement(math.sqrt(alpha_sq)), c)
            oracle_meta["cutoff_dim"] = ora.dim
            oracle_meta["convergence_delta"] = ora.convergence_delta
            return ora.overlap_sq
    elif pert.family == "displacement":
        # solved magnitude is |alpha|^2, the catalog's displacement scale
        overlap_sq_fn = lambda y: _closed_overlap_sq(cfg, n_mean, math.sqrt(y))
    else:
        overlap_sq_fn = lambda m: _closed_overlap_sq(cfg, n_mean, m)

    result = min_detectable(overlap_sq_fn, spec,
                            _np_envelope(probe.family, pert.family, n_mean))

    closed_min = printed_min = None
    flagged = None
    if pert.family == "displacement" and probe.family != "sqvac":
        closed_min = overlaps.twinbeam_displacement_min(n_mean, deficit)
    elif pert.family == "squeeze" and probe.family in ("twinbeam", "vacuum"):
        closed_min = overlaps.twinbeam_squeeze_min(n_mean, deficit)
    elif pert.family == "squeeze" and probe.family == "sqvac":
        closed_min = overlaps.sqvac_squeeze_min_r(n_mean, rel, spec.q0,
                                                  spec.acceptance_ratio)
    elif pert.family == "phase":
        closed_min = overlaps.twinbeam_phase_min(n_mean, deficit)
        printed_min = overlaps.twinbeam_phase_min_reference(n_mean, deficit)
        flagged = abs(printed_min - result.magnitude) > \
            PRINTED_FORM_FLAG_RTOL * result.magnitude

    return {"deficit": deficit,
            "magnitude_kind": _MAGNITUDE_KIND[pert.family],
            "magnitude_min": result.magnitude,
            "closed_form_min": closed_min,
            "printed_form_min": printed_min,
            "flagged": flagged,
            "bracket_lo": result.bracket_lo, "bracket_hi": result.bracket_hi,
            "iterations": result.iterations, "converged": result.converged,
            **oracle_meta}


def run_sensitivity(cfg: ExperimentConfig, threads: int = 1) -> Table:
    """Minimum detectable magnitude per probe energy at the configured budget."""
    dec = cfg.decision
    if dec.kind == "np":
        _require_pair(cfg.probe, cfg.perturbation)
        if dec.q0 is None or dec.acceptance_ratio is None:
            raise ConfigError(
                "[decision] q0 and acceptance_ratio: required when kind = np")
        spec = SensitivitySpec(dec.q0, dec.acceptance_ratio)
    else:
        if cfg.probe.family not in ("twinbeam", "vacuum"):
            raise ConfigError(
                "[probe] family: the photocurrent detector reads a twin beam")
        if dec.q_target is None:
            raise ConfigError(
                "[decision] q_target: required when kind = photocurrent")
    c = _fixed_cutoff(cfg)
    kind_map = {"displacement": Displacement, "squeeze": Squeeze,
                "phase": TwoModePhase}

    def job(i: int) -> dict:
        n_mean = cfg.probe.energies[i]
        base = {"index": i, "probe_family": cfg.probe.family,
                "perturbation_family": cfg.perturbation.family,
                "decision_kind": dec.kind, "n_mean": n_mean,
                "q0": dec.q0, "acceptance_ratio": dec.acceptance_ratio,
                "q_target": dec.q_target}

        def compute() -> dict:
            if dec.kind == "np":
                return _np_sensitivity_row(cfg, n_mean, spec, c)
            magnitude = min_detectable_photocurrent(
                kind_map[cfg.perturbation.family], n_mean, dec.q_target, c)
            return {"magnitude_kind": _MAGNITUDE_KIND[cfg.perturbation.family],
                    "magnitude_min": magnitude}

        return _guarded(base, compute)

    return _finish(SENSITIVITY_COLUMNS,
                   _run_rows(len(cfg.probe.energies), job, threads))


def run_roc(cfg: ExperimentConfig, threads: int = 1) -> Table:
    """Helstrom-vs-analytic receiver operating characteristic per grid point."""
    dec = cfg.decision
    mus = np.logspace(math.log10(dec.mu_min), math.log10(dec.mu_max), dec.mu_points)
    curves = []
    for n_mean in cfg.probe.energies:
        for magnitude in cfg.perturbation.magnitudes:
            probe = _probe_spec(cfg.probe, cfg.perturbation.family, n_mean)
            pert = _perturbation(cfg.perturbation, magnitude)
            c = _fixed_cutoff(cfg) or auto_cutoff(probe, pert)
            state = synthesize(probe, c)
            flat = state.amps.reshape(-1)
            if flat.size > ROC_MAX_FLAT_DIM:
                raise ConfigError(
                    f"roc state dimension {flat.size} exceeds {ROC_MAX_FLAT_DIM}; "
                    "use a smaller fixed cutoff")
            evolved = apply_perturbation(state, pert)
            kappa_sq = abs(inner_product(state, evolved)) ** 2
            curves.append((n_mean, magnitude, c.dim, kappa_sq,
                           pure_density(flat), pure_density(evolved.amps.reshape(-1))))

    def job(i: int) -> dict:
        n_mean, magnitude, dim, kappa_sq, rho0, rho_l = curves[i // len(mus)]
        mu = float(mus[i % len(mus)])
        base = {"index": i, "probe_family": cfg.probe.family,
                "perturbation_family": cfg.perturbation.family,
                "n_mean": n_mean, "magnitude": magnitude, "mu": mu,
                "kappa_sq": kappa_sq, "cutoff_dim": dim}

        def compute() -> dict:
            res = helstrom_np(rho0, rho_l, mu)
            analytic = detection_probability(res.q0, kappa_sq)
            return {"q0": res.q0, "q_det": res.q_det,
                    "q_det_analytic": analytic,
                    "deviation": abs(res.q_det - analytic),
                    "projector_rank": res.projector_rank}

        return _guarded(base, compute)

    return _finish(ROC_COLUMNS, _run_rows(len(curves) * len(mus), job, threads))


def run_photocurrent(cfg: ExperimentConfig, threads: int = 1) -> Table:
    """P(d = 0) sweep of the difference-photocurrent interferometer."""
    if cfg.probe.family not in ("twinbeam", "vacuum"):
        raise ConfigError("[probe] family: the photocurrent detector reads a twin beam")
    grid = [(n, m) for n in cfg.probe.energies for m in cfg.perturbation.magnitudes]
    c = _fixed_cutoff(cfg)
    kind_map = {"displacement": Displacement, "squeeze": Squeeze,
                "phase": TwoModePhase}
    kind = kind_map[cfg.perturbation.family]

    def job(i: int) -> dict:
        n_mean, magnitude = grid[i]
        base = {"index": i, "probe_family": cfg.probe.family,
                "perturbation_family": cfg.perturbation.family,
                "n_mean": n_mean, "magnitude": magnitude}

        def compute() -> dict:
            res = p_zero_difference(_twinbeam_x(n_mean),
                                    _perturbation(cfg.perturbation, magnitude), c)
            # closed-form magnitude convention: |alpha|^2 for displacement
            scalar = magnitude**2 if kind is Displacement else magnitude
            try:
                closed = closed_form_p_zero(kind, n_mean, scalar)
            except OutOfEnvelopeError:
                closed = None
            return {"p_zero": res.p_zero, "q_det": res.q_det,
                    "closed_form_p_zero": closed, "n_terms": res.n_terms,
                    "convergence_delta": res.convergence_delta,
                    "cutoff_dim": c.dim if c else None}

        return _guarded(base, compute)

    return _finish(PHOTOCURRENT_COLUMNS, _run_rows(len(grid), job, threads))


def fit_scaling(rows: Sequence[dict], x_col: str, y_col: str) -> FitResult:
    """Ordinary least squares on log-log data: slope, intercept, slope stderr.

    Requires at least 4 rows and strictly positive values in both columns.
    """
    xs, ys = [], []
    for i, row in enumerate(rows):
        try:
            x, y = float(row[x_col]), float(row[y_col])
        except (KeyError, TypeError, ValueError):
            raise ValueError(
                f"row {i}: cannot read numeric columns {x_col!r}, {y_col!r}") from None
        if x <= 0 or y <= 0:
            raise ValueError(
                f"row {i}: log-log fit needs positive values, got ({x}, {y})")
        xs.append(math.log(x))
        ys.append(math.log(y))
    if len(xs) < 4:
        raise ValueError(f"need at least 4 rows to fit, got {len(xs)}")
    lx, ly = np.asarray(xs), np.asarray(ys)
    dx = lx - lx.mean()
    slope = float(dx @ (ly - ly.mean()) / (dx @ dx))
    intercept = float(ly.mean() - slope * lx.mean())
    resid = ly - (intercept + slope * lx)
    stderr = math.sqrt(float(resid @ resid) / (len(xs) - 2) / float(dx @ dx))
    return FitResult(slope, intercept, stderr)


# ---------------------------------------------------------------------------
# Serialization: CSV with 17 significant digits, and JSON lines.

def _csv_cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(table: Table, fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(table.columns)
    for row in table.rows:
        writer.writerow([_csv_cell(row[c]) for c in table.columns])


def write_jsonl(table: Table, fh) -> None:
    for row in table.rows:
        fh.write(json.dumps({c: row[c] for c in table.columns}))
        fh.write("\n")


def read_rows(path: str) -> list[dict]:
    """Load an emitted table (CSV or JSON lines) back into row dicts."""
    with open(path) as fh:
        text = fh.read()
    if text.lstrip().startswith("{"):
        return [json.loads(line) for line in text.splitlines() if line.strip()]
    return list(csv.DictReader(text.splitlines()))
