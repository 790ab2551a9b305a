"""Brute-force overlap oracle with cutoff-doubling convergence control.

This is the ground truth against which every closed form in the catalog is
judged: synthesize the probe, exponentiate the truncated generator, take
<psi0 | U | psi0>, then repeat at twice the cutoff.  The overlap is accepted
only when the two cutoffs agree.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError
from . import fock
from .fock import Cutoff, Displacement, Perturbation, Squeeze, TwoModePhase, TwoModeFock
from . import probes
from .probes import ProbeSpec

AUTO_BASE_DIM = 16
ORACLE_TOL = 1e-9
TAIL_TOL = 1e-10


@dataclass(frozen=True)
class OracleOverlap:
    """Converged brute-force overlap amplitude plus convergence metadata."""

    amplitude: complex
    convergence_delta: float
    dim: int

    @property
    def overlap_sq(self) -> float:
        return abs(self.amplitude) ** 2


def perturbation_scale_sq(p: Perturbation) -> float:
    if isinstance(p, (Displacement, Squeeze)):
        return p.mod**2
    return p.phi**2


def auto_cutoff(probe: ProbeSpec, p: Perturbation) -> Cutoff:
    """Energy-aware starting cutoff: max(16, ceil(8 (N + |lambda|^2 + 1)))."""
    n_mean = probes.mean_photon_number(probe)
    dim = max(AUTO_BASE_DIM, math.ceil(8 * (n_mean + perturbation_scale_sq(p) + 1)))
    return Cutoff(dim)


def _overlap_at(probe: ProbeSpec, p: Perturbation, dim: int) -> complex:
    state = probes.synthesize(probe, Cutoff(dim))
    if isinstance(p, TwoModePhase) and not isinstance(state, TwoModeFock):
        raise ValueError("TwoModePhase needs a two-mode probe")
    evolved = fock.apply_perturbation(state, p)
    return fock.inner_product(state, evolved)


def _dim_cap(probe: ProbeSpec, p: Perturbation) -> int:
    # Two-mode amplitude matrices are dim x dim, so they hit memory limits
    # far earlier than single-mode vectors do.
    if isinstance(p, TwoModePhase) or probes.is_two_mode(probe):
        return fock.TWO_MODE_STATE_DIM_CAP
    return fock.SINGLE_MODE_DIM_CAP


def oracle_overlap(probe: ProbeSpec, p: Perturbation, c: Cutoff | None = None,
                   tol: float = ORACLE_TOL, tail_tol: float = TAIL_TOL) -> OracleOverlap:
    """<psi0|U|psi0> with the cutoff doubled until both the overlap delta and
    the probe tail mass pass tolerance.

    With an explicit cutoff the doubling happens once, as a check: failure
    raises instead of escalating, carrying both values.
    """
    fixed = c is not None
    dim = (c or auto_cutoff(probe, p)).dim
    cap = _dim_cap(probe, p)
    if dim > cap:
        raise ValueError(f"cutoff {dim} exceeds cap {cap} for this perturbation kind")
    k_lo = _overlap_at(probe, p, dim)
    while True:
        if 2 * dim > cap:
            raise ConvergenceError(
                f"cutoff doubling exceeded cap {cap} before convergence",
                value_lo=k_lo, dim=dim)
        k_hi = _overlap_at(probe, p, 2 * dim)
        delta = abs(k_hi - k_lo)
        tail = fock.tail_mass(probes.synthesize(probe, Cutoff(dim)))
        if delta <= tol and tail <= tail_tol:
            return OracleOverlap(k_hi, delta, 2 * dim)
        if fixed:
            raise ConvergenceError(
                f"overlap differs by {delta:.3e} between dim {dim} and {2 * dim} "
                f"(tail mass {tail:.3e}); raise the cutoff",
                value_lo=k_lo, value_hi=k_hi, delta=delta, dim=dim)
        k_lo = k_hi
        dim *= 2


def brute_force_overlap(probe: ProbeSpec, p: Perturbation,
                        c: Cutoff | None = None, tol: float = ORACLE_TOL) -> complex:
    """Converged overlap amplitude; see oracle_overlap for the metadata form."""
    return oracle_overlap(probe, p, c, tol=tol).amplitude
