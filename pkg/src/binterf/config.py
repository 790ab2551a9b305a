"""Experiment configuration files: INI sections parsed into typed specs.

One file describes one sweep: a probe family with an energy grid, a
perturbation family with a magnitude grid, the decision rule, the cutoff
policy, and where the table goes.  All physical parameters are in natural
units: photon numbers dimensionless, angles in radians.  Magnitudes use each
family's natural parameter (|alpha| for displacement, r for squeeze, phi for
the two-mode phase).
"""
from __future__ import annotations

import configparser
from dataclasses import dataclass, field

from .errors import ConfigError

PROBE_FAMILIES = ("vacuum", "coherent", "sqvac", "twinbeam")
PERTURBATION_FAMILIES = ("displacement", "squeeze", "phase")
DECISION_KINDS = ("np", "photocurrent")
OUTPUT_FORMATS = ("csv", "jsonl")
TARGETS = ("mode_a", "mode_b")


@dataclass(frozen=True)
class ProbeConfig:
    family: str
    energies: tuple
    # Orientation angle of the probe relative to the perturbation family's
    # real axis: arg(alpha) for coherent, arg(zeta)/2 toward a displacement
    # (the delta of the catalog) or arg(zeta) toward a squeeze for sqvac.
    phase: float = 0.0


@dataclass(frozen=True)
class PerturbationConfig:
    family: str
    magnitudes: tuple
    phase: float = 0.0
    target: str = "mode_a"


@dataclass(frozen=True)
class DecisionConfig:
    kind: str = "np"
    q0: float | None = None
    acceptance_ratio: float | None = None
    q_target: float | None = None
    mu_min: float = 1e-4
    mu_max: float = 1e4
    mu_points: int = 200


@dataclass(frozen=True)
class CutoffPolicy:
    policy: str = "auto"
    dim: int | None = None


@dataclass(frozen=True)
class OutputConfig:
    path: str | None = None
    format: str = "csv"


@dataclass(frozen=True)
class ExperimentConfig:
    probe: ProbeConfig
    perturbation: PerturbationConfig
    decision: DecisionConfig = field(default_factory=DecisionConfig)
    cutoff: CutoffPolicy = field(default_factory=CutoffPolicy)
    output: OutputConfig = field(default_factory=OutputConfig)


def _float_list(raw: str, where: str) -> tuple:
    vals = []
    for tok in raw.replace(",", " ").split():
        try:
            v = float(tok)
        except ValueError:
            raise ConfigError(f"{where}: {tok!r} is not a number") from None
        if v != v or v in (float("inf"), float("-inf")):
            raise ConfigError(f"{where}: values must be finite, got {tok!r}")
        vals.append(v)
    if not vals:
        raise ConfigError(f"{where}: grid must be non-empty")
    return tuple(vals)


def _get_float(cp, section: str, option: str, default=None):
    if not cp.has_option(section, option):
        if default is not None:
            return default
        raise ConfigError(f"[{section}] {option}: required option missing")
    try:
        return cp.getfloat(section, option)
    except ValueError:
        raise ConfigError(
            f"[{section}] {option}: {cp.get(section, option)!r} is not a number") from None


def _get_choice(cp, section: str, option: str, choices, default=None) -> str:
    if not cp.has_option(section, option):
        if default is not None:
            return default
        raise ConfigError(f"[{section}] {option}: required option missing")
    val = cp.get(section, option).strip().lower()
    if val not in choices:
        raise ConfigError(
            f"[{section}] {option}: {val!r} not one of {', '.join(choices)}")
    return val


def load_config(path: str) -> ExperimentConfig:
    """Parse and validate an experiment file; raises ConfigError on any defect."""
    cp = configparser.ConfigParser(interpolation=None)
    try:
        with open(path) as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except configparser.Error as exc:
        raise ConfigError(f"malformed config {path}: {exc}") from None

    for section in ("probe", "perturbation"):
        if not cp.has_section(section):
            raise ConfigError(f"[{section}]: required section missing")

    probe = ProbeConfig(
        family=_get_choice(cp, "probe", "family", PROBE_FAMILIES),
        energies=_float_list(cp.get("probe", "energies", fallback=""),
                             "[probe] energies"),
        phase=_get_float(cp, "probe", "phase", 0.0),
    )
    if any(e < 0 for e in probe.energies):
        raise ConfigError("[probe] energies: photon numbers must be nonnegative")
    if probe.family == "vacuum" and any(e != 0 for e in probe.energies):
        raise ConfigError("[probe] energies: the vacuum probe has energy 0")

    pert = PerturbationConfig(
        family=_get_choice(cp, "perturbation", "family", PERTURBATION_FAMILIES),
        magnitudes=_float_list(cp.get("perturbation", "magnitudes", fallback=""),
                               "[perturbation] magnitudes"),
        phase=_get_float(cp, "perturbation", "phase", 0.0),
        target=_get_choice(cp, "perturbation", "target", TARGETS, "mode_a"),
    )
    if any(m < 0 for m in pert.magnitudes):
        raise ConfigError("[perturbation] magnitudes: must be nonnegative")

    decision = DecisionConfig()
    if cp.has_section("decision"):
        kind = _get_choice(cp, "decision", "kind", DECISION_KINDS, "np")
        q0 = acceptance = q_target = None
        if cp.has_option("decision", "q0"):
            q0 = _get_float(cp, "decision", "q0")
        if cp.has_option("decision", "acceptance_ratio"):
            acceptance = _get_float(cp, "decision", "acceptance_ratio")
        if cp.has_option("decision", "q_target"):
            q_target = _get_float(cp, "decision", "q_target")
        mu_points = int(_get_float(cp, "decision", "mu_points", 200))
        if mu_points < 2:
            raise ConfigError("[decision] mu_points: need at least 2")
        decision = DecisionConfig(
            kind=kind, q0=q0, acceptance_ratio=acceptance, q_target=q_target,
            mu_min=_get_float(cp, "decision", "mu_min", 1e-4),
            mu_max=_get_float(cp, "decision", "mu_max", 1e4),
            mu_points=mu_points,
        )
        if kind == "np" and q0 is not None and acceptance is not None:
            if not 0.0 <= q0 < 1.0:
                raise ConfigError(f"[decision] q0: must lie in [0, 1), got {q0}")
            if acceptance < 1.0:
                raise ConfigError(
                    f"[decision] acceptance_ratio: must be >= 1, got {acceptance}")
            if q0 * acceptance > 1.0:
                raise ConfigError(
                    f"[decision] q0 * acceptance_ratio = {q0 * acceptance} exceeds 1")
        if kind == "photocurrent" and q_target is not None:
            if not 0.0 < q_target < 1.0:
                raise ConfigError(
                    f"[decision] q_target: must lie in (0, 1), got {q_target}")
        if decision.mu_min <= 0 or decision.mu_max <= decision.mu_min:
            raise ConfigError("[decision] mu grid: need 0 < mu_min < mu_max")

    cutoff = CutoffPolicy()
    if cp.has_section("cutoff"):
        policy = _get_choice(cp, "cutoff", "policy", ("auto", "fixed"), "auto")
        dim = None
        if policy == "fixed":
            dim = int(_get_float(cp, "cutoff", "dim"))
            if dim < 2:
                raise ConfigError(f"[cutoff] dim: must be >= 2, got {dim}")
        cutoff = CutoffPolicy(policy, dim)

    output = OutputConfig()
    if cp.has_section("output"):
        output = OutputConfig(
            path=cp.get("output", "path", fallback=None),
            format=_get_choice(cp, "output", "format", OUTPUT_FORMATS, "csv"),
        )

    return ExperimentConfig(probe, pert, decision, cutoff, output)
