"""Closed-form input-output overlaps for each probe/perturbation pair.

Each entry returns the overlap amplitude kappa (or its squared modulus) of
the unperturbed and perturbed probe.  All entries are cross-validated in the
test suite against the brute-force oracle; the squeezed-vacuum-vs-
displacement entry is special: its reference formula is known to disagree
with the oracle away from N = 0, so that entry returns both values side by
side with an explicit flag instead of pretending they coincide (see
``sqvac_displacement``).
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import NoSolutionError
from .fock import Cutoff, Displacement
from .oracle import OracleOverlap, oracle_overlap
from .probes import SqueezedVacuum

# A closed form counts as agreeing with the oracle below this discrepancy.
ORACLE_AGREEMENT_TOL = 1e-6


@dataclass(frozen=True)
class OverlapResult:
    """Overlap amplitude with its provenance.

    source is "closed-form" or "oracle"; convergence_delta is set only on
    oracle-sourced values.
    """

    amplitude: complex
    source: str
    convergence_delta: float | None = None

    def __post_init__(self):
        if self.source not in ("closed-form", "oracle"):
            raise ValueError(f"unknown source {self.source!r}")
        sq = self.overlap_sq
        if not 0.0 <= sq <= 1.0 + 1e-10:
            raise ValueError(f"overlap squared {sq} outside [0, 1]")

    @property
    def overlap_sq(self) -> float:
        return abs(self.amplitude) ** 2


@dataclass(frozen=True)
class DisputedOverlap:
    """A formula value and the oracle value that contradicts it.

    value (the oracle) is what downstream consumers should use; the formula
    member is retained verbatim so sweeps can emit the comparison artifact.
    """

    formula: OverlapResult
    oracle: OverlapResult
    discrepancy: float
    flagged: bool

    @property
    def value(self) -> OverlapResult:
        return self.oracle


def _energy_check(n_mean: float):
    if n_mean < 0:
        raise ValueError(f"mean photon number must be nonnegative, got {n_mean}")


def twinbeam_displacement(n_mean: float, alpha_sq: float) -> OverlapResult:
    """Twin beam of energy N vs single-arm displacement: |kappa|^2 = exp(-|alpha|^2 (N+1)).

    The amplitude is real positive and independent of arg(alpha) and of the
    twin-beam phase convention (only diagonal displacement elements enter).
    """
    _energy_check(n_mean)
    if alpha_sq < 0:
        raise ValueError(f"|alpha|^2 must be nonnegative, got {alpha_sq}")
    return OverlapResult(math.exp(-alpha_sq * (n_mean + 1) / 2), "closed-form")


def twinbeam_squeeze(x: float, r: float) -> OverlapResult:
    """Twin beam vs single-arm squeeze: kappa = (1-x^2)/sqrt((x^4+1) cosh r - 2 x^2)."""
    if not 0.0 <= x < 1.0:
        raise ValueError(f"twin-beam parameter must satisfy 0 <= x < 1, got {x}")
    amp = (1 - x**2) / math.sqrt((x**4 + 1) * math.cosh(r) - 2 * x**2)
    return OverlapResult(amp, "closed-form")


def twinbeam_phase(x: float, phi: float) -> OverlapResult:
    """Twin beam vs two-mode phase: |kappa|^2 = 1 / (1 + N(N+2) sin^2 phi).

    kappa itself is real positive: (1-x^2)/sqrt(1 - 2 x^2 cos 2phi + x^4).
    """
    if not 0.0 <= x < 1.0:
        raise ValueError(f"twin-beam parameter must satisfy 0 <= x < 1, got {x}")
    amp = (1 - x**2) / math.sqrt(1 - 2 * x**2 * math.cos(2 * phi) + x**4)
    return OverlapResult(amp, "closed-form")


def sqvac_squeeze(zeta_mod: float, psi: float, r: float) -> OverlapResult:
    """Squeezed vacuum (|zeta| e^{i psi}) vs real squeeze r.

    kappa = (cosh r + 2i sinh|zeta| cosh|zeta| sinh r sin psi)^(-1/2), taking
    the principal branch of the reciprocal square root.  At sin psi = 0 the
    probe squeezing is aligned with the perturbation and drops out entirely:
    |kappa|^2 = sech r regardless of |zeta|.
    """
    if zeta_mod < 0:
        raise ValueError(f"|zeta| must be nonnegative, got {zeta_mod}")
    z = (math.cosh(r)
         + 2j * math.sinh(zeta_mod) * math.cosh(zeta_mod) * math.sinh(r) * math.sin(psi))
    return OverlapResult(1.0 / cmath.sqrt(z), "closed-form")


def coherent_squeeze(n_mean: float, phase: float, r: float) -> OverlapResult:
    """Coherent probe (|alpha|^2 = N, arg alpha = phase) vs real squeeze r.

    |kappa|^2 = sech(r) * exp(-2N cos^2(phase) (1 - cosh r - sinh r)^2 / (1 + e^{2r})
                              -2N sin^2(phase) (1 - cosh r + sinh r)^2 / (1 + e^{-2r}))
    This is the Gaussian (Wigner-function) overlap of the two states; the
    sech prefactor is the covariance normalization and is required for the
    vacuum limit |<0|S(r)|0>|^2 = sech r to come out right.  Only the
    magnitude is modeled; the amplitude is returned real positive.
    """
    _energy_check(n_mean)
    ch, sh = math.cosh(r), math.sinh(r)
    expo = (-2 * n_mean * math.cos(phase) ** 2 * (1 - ch - sh) ** 2 / (1 + math.exp(2 * r))
            - 2 * n_mean * math.sin(phase) ** 2 * (1 - ch + sh) ** 2 / (1 + math.exp(-2 * r)))
    sq = math.exp(expo) / ch
    return OverlapResult(math.sqrt(sq), "closed-form")


def sqvac_displacement(n_mean: float, delta: float, alpha_sq: float,
                       c: Cutoff | None = None,
                       flag_tol: float = ORACLE_AGREEMENT_TOL) -> DisputedOverlap:
    """Squeezed vacuum vs displacement: reference formula AND oracle, flagged.

    The reference closed form reads
        |kappa|^2 = exp(-|alpha|^2 [2N + 1 + sqrt(N(N+1)) cos 2 delta]),
    with delta the orientation angle between squeezing and displacement.  It
    is inconsistent with the numerical oracle away from N = 0 (and with its
    own large-N limits, which require the orientation term to enter with
    twice that coefficient and the opposite sign).  Both values are returned;
    ``flagged`` records whether they disagree beyond flag_tol, and consumers
    should use the oracle member.

    Oracle convention: the probe is SqueezedVacuum(arcsinh(sqrt(N)) e^{2i delta})
    and the displacement is real positive.  Under this orientation map the
    reference large-N limits (|alpha|^2_min of Lambda/4N at delta = pi/2 and
    4 N Lambda at delta = 0) are reproduced by the oracle.
    """
    _energy_check(n_mean)
    if alpha_sq < 0:
        raise ValueError(f"|alpha|^2 must be nonnegative, got {alpha_sq}")
    printed_sq = math.exp(
        -alpha_sq * (2 * n_mean + 1 + math.sqrt(n_mean * (n_mean + 1)) * math.cos(2 * delta)))
    formula = OverlapResult(math.sqrt(printed_sq), "closed-form")
    probe = SqueezedVacuum(math.asinh(math.sqrt(n_mean)) * cmath.exp(2j * delta))
    ora: OracleOverlap = oracle_overlap(probe, Displacement(math.sqrt(alpha_sq)), c)
    oracle_res = OverlapResult(ora.amplitude, "oracle", ora.convergence_delta)
    disc = abs(formula.overlap_sq - oracle_res.overlap_sq)
    return DisputedOverlap(formula, oracle_res, disc, disc > flag_tol)


# ---------------------------------------------------------------------------
# Minimum detectable magnitudes by direct inversion of the closed forms.
# The generic bisection route lives in decision.min_detectable; these entries
# exist so sweeps can report closed-form columns next to the numeric ones.

def _deficit_check(deficit: float):
    if not 0.0 <= deficit < 1.0:
        raise NoSolutionError(
            f"overlap deficit must lie in [0, 1) for a detectable threshold, got {deficit}")


def twinbeam_displacement_min(n_mean: float, deficit: float) -> float:
    """Exact inversion of exp(-|alpha|^2 (N+1)) = 1 - deficit for |alpha|^2.

    Equals deficit/(N+1) to first order in the deficit.
    """
    _energy_check(n_mean)
    _deficit_check(deficit)
    return -math.log1p(-deficit) / (n_mean + 1)


def twinbeam_squeeze_min(n_mean: float, deficit: float) -> float:
    """Exact inversion of the twin-beam squeeze overlap for r."""
    _energy_check(n_mean)
    _deficit_check(deficit)
    denom = n_mean**2 + 2 * n_mean + 2
    return math.acosh(1 + 2 * deficit / ((1 - deficit) * denom))


def twinbeam_squeeze_min_scaling(n_mean: float, deficit: float) -> float:
    """Leading-order form 2 sqrt(deficit/(1-deficit)) / sqrt(N^2+2N+2)."""
    _energy_check(n_mean)
    _deficit_check(deficit)
    return 2 * math.sqrt(deficit / (1 - deficit)) / math.sqrt(n_mean**2 + 2 * n_mean + 2)


def twinbeam_phase_min(n_mean: float, deficit: float) -> float:
    """Exact inversion of 1/(1 + N(N+2) sin^2 phi) = 1 - deficit for phi.

    sin(phi_min) = sqrt(deficit/(1-deficit)) / sqrt(N(N+2)).
    """
    if n_mean <= 0:
        raise ValueError("phase detection needs a nonzero-energy twin beam")
    _deficit_check(deficit)
    s = math.sqrt(deficit / (1 - deficit)) / math.sqrt(n_mean * (n_mean + 2))
    if s > 1:
        raise NoSolutionError(f"required sin(phi) = {s:.3e} exceeds 1", residual=s - 1)
    return math.asin(s)


def twinbeam_phase_min_reference(n_mean: float, deficit: float) -> float:
    """Reference small-angle display phi_min = arcsin(deficit / sqrt(N(N+2))).

    Kept verbatim for comparison artifacts: it scales linearly in the deficit
    where the exact inversion scales as its square root, a known inconsistency
    that the sensitivity sweeps flag rather than fix.
    """
    if n_mean <= 0:
        raise ValueError("phase detection needs a nonzero-energy twin beam")
    _deficit_check(deficit)
    s = deficit / math.sqrt(n_mean * (n_mean + 2))
    if s > 1:
        raise NoSolutionError(f"required sin(phi) = {s:.3e} exceeds 1", residual=s - 1)
    return math.asin(s)


def sqvac_squeeze_min_r(n_mean: float, psi: float, q0: float,
                        acceptance_ratio: float) -> float:
    """Branch-wise minimum detectable squeeze for a squeezed-vacuum probe.

    Aligned branch (sin psi = 0): the probe energy drops out and the exact
    inversion of sech r = 1 - deficit gives
        r_min = log[(1 + sqrt(d(2-d)))/(1-d)].
    Otherwise the large-N leading form sqrt(d/2)/(N sin psi) is returned.
    Cross-checked against generic root-finding in the tests.
    """
    from .decision import deficit_threshold  # local import, no cycle

    _energy_check(n_mean)
    deficit = deficit_threshold(q0, acceptance_ratio)
    if deficit >= 1:
        raise NoSolutionError(f"deficit {deficit} leaves no reachable overlap")
    if deficit == 0:
        return 0.0
    s = math.sin(psi)
    if abs(s) < 1e-12:
        return math.log((1 + math.sqrt(deficit * (2 - deficit))) / (1 - deficit))
    if n_mean <= 0:
        raise ValueError("the oriented branch needs a nonzero probe energy")
    return math.sqrt(deficit / 2) / (n_mean * abs(s))
