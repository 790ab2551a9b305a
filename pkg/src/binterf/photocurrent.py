"""Difference-photocurrent detection on a twin-beam probe.

The two beams feed a pair of photodetectors and only the count difference
d = n_a - n_b is recorded.  The twin beam is an eigenstate of the difference
with eigenvalue zero, so the unperturbed interferometer clicks d = 0 with
certainty and the false-alarm probability vanishes identically.  A
perturbation on one arm (or a two-mode phase) leaks amplitude into d != 0,
and the detection probability is 1 - P(d = 0).

P(d = 0) projects the perturbed state onto the full degenerate d = 0
subspace, i.e. sums |c[n, n]|^2 over the diagonal of the two-mode amplitude
matrix.  For the three canonical perturbation families the perturbed
diagonal factorizes into probe weights times diagonal unitary elements, so
the sum reduces to stable scalar recurrences; p_zero_dense keeps the direct
matrix route as a cross-check.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import i0e

from .errors import ConvergenceError, NoSolutionError, OutOfEnvelopeError
from .fock import (Cutoff, Displacement, Perturbation, Squeeze, Target,
                   TwoModePhase, apply_perturbation, laguerre_sequence,
                   legendre_sequence)
from .probes import TwinBeam, param_for_energy, synthesize

# Doubling the number of summed projections must move P(d=0) less than this.
CONVERGENCE_TOL = 1e-9

# Weight tail q^(n+1) below this picks the automatic number of terms.
_AUTO_TAIL = 1e-14
_AUTO_MIN_TERMS = 32

# Search caps for the minimum-detectable solver, per magnitude convention
# (|alpha|^2 for displacement, r for squeeze, phi for the two-mode phase;
# the phase cap stays where P(d=0) is monotone in phi).
MAGNITUDE_CAPS = {Displacement: 50.0, Squeeze: 2.0, TwoModePhase: math.pi / 4}

_BISECTION_REL_TOL = 1e-10
_BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class PhotocurrentResult:
    """P(d = 0) with convergence diagnostics.

    q0 is identically zero: the unperturbed probe never leaves d = 0.
    """

    p_zero: float
    n_terms: int
    convergence_delta: float

    def __post_init__(self):
        if not 0.0 <= self.p_zero <= 1.0:
            raise ValueError(f"p_zero must lie in [0, 1], got {self.p_zero}")

    @property
    def q_det(self) -> float:
        return 1.0 - self.p_zero

    @property
    def q0(self) -> float:
        return 0.0


def _diag_survival_sq(p: Perturbation, n_max: int) -> np.ndarray:
    """|<n|U|n>|^2 for n = 0..n_max of the single-arm (or phase) unitary."""
    if isinstance(p, Displacement):
        y = p.mod**2
        lag = laguerre_sequence(n_max, y)
        return np.exp(-y) * lag**2
    if isinstance(p, Squeeze):
        # Diagonal elements depend only on |zeta|: a number-basis phase
        # rotation maps S(zeta) to S(zeta e^{2i theta}) without touching them.
        t = 1.0 / math.cosh(p.mod)
        return t * legendre_sequence(n_max, t) ** 2
    if isinstance(p, TwoModePhase):
        return legendre_sequence(n_max, math.cos(2.0 * p.phi)) ** 2
    raise ValueError(f"unsupported perturbation: {p!r}")


def _p_zero_at(x: float, p: Perturbation, n_max: int) -> float:
    q = x * x
    weights = (1 - q) * q ** np.arange(n_max + 1)
    total = weights.sum()
    return float(weights @ _diag_survival_sq(p, n_max) / total)


def p_zero_difference(x: float, p: Perturbation,
                      c: Cutoff | None = None) -> PhotocurrentResult:
    """Probability of zero count difference after perturbing a twin beam.

    x is the twin-beam parameter; p acts on one arm (Displacement, Squeeze)
    or on both (TwoModePhase).  The number of diagonal projections summed is
    taken from c when given, otherwise from the weight-tail rule; either way
    the count is doubled once and the change reported as convergence_delta.
    """
    if not 0.0 <= x < 1.0:
        raise ValueError(f"twin-beam parameter must satisfy 0 <= x < 1, got {x}")
    if isinstance(p, (Displacement, Squeeze)) and p.target is Target.BOTH:
        raise ValueError("single-mode perturbations act on MODE_A or MODE_B")
    q = x * x
    if c is not None:
        n_max = c.dim - 1
    elif q == 0.0:
        n_max = _AUTO_MIN_TERMS - 1
    else:
        n_max = max(_AUTO_MIN_TERMS, math.ceil(math.log(_AUTO_TAIL) / math.log(q))) - 1
    coarse = _p_zero_at(x, p, n_max)
    fine = _p_zero_at(x, p, 2 * (n_max + 1) - 1)
    delta = abs(fine - coarse)
    if delta > CONVERGENCE_TOL:
        raise ConvergenceError(
            f"P(d=0) moved by {delta:.3e} when doubling {n_max + 1} projection terms",
            value_lo=coarse, value_hi=fine, delta=delta, dim=n_max + 1)
    return PhotocurrentResult(min(max(fine, 0.0), 1.0), 2 * (n_max + 1), delta)


def p_zero_dense(x: float, p: Perturbation, dim: int) -> float:
    """Reference route: evolve the two-mode state, mask the diagonal, sum.

    Kept deliberately independent of the recurrence kernels so the two can
    arbitrate each other in tests.  No convergence management: dim is used
    as given.
    """
    state = synthesize(TwinBeam(x), Cutoff(dim))
    evolved = apply_perturbation(state, p)
    return float(np.sum(np.abs(np.diagonal(evolved.amps)) ** 2))


def closed_form_p_zero(kind: type, n_mean: float, magnitude: float) -> float:
    """Reference closed forms for P(d = 0) at twin-beam energy n_mean.

    Displacement (magnitude = |alpha|^2): exact,
        exp(-|alpha|^2 (1+N)) I0(|alpha|^2 sqrt(N(N+2))),
    evaluated with the exponentially scaled Bessel function so the decaying
    exponential and the growing I0 never overflow separately.
    Squeeze (magnitude = r) and TwoModePhase (magnitude = phi) are the
    quadratic small-parameter displays 1 - N r^2 and 1 - N^2 phi^2 / 2; they
    carry unspecified remainders, so they are only served inside the
    envelopes r^2 N <= 0.1 and phi^2 N^2 <= 0.1.
    """
    if n_mean < 0:
        raise ValueError(f"mean photon number must be nonnegative, got {n_mean}")
    if magnitude < 0:
        raise ValueError(f"magnitude must be nonnegative, got {magnitude}")
    if kind is Displacement:
        z = magnitude * math.sqrt(n_mean * (n_mean + 2))
        return math.exp(z - magnitude * (1 + n_mean)) * float(i0e(z))
    if kind is Squeeze:
        if magnitude**2 * n_mean > 0.1:
            raise OutOfEnvelopeError(
                f"quadratic squeeze form needs r^2 N <= 0.1, got {magnitude**2 * n_mean:.3g}; "
                "use p_zero_difference")
        return 1.0 - n_mean * magnitude**2
    if kind is TwoModePhase:
        if (magnitude * n_mean) ** 2 > 0.1:
            raise OutOfEnvelopeError(
                f"quadratic phase form needs phi^2 N^2 <= 0.1, got {(magnitude * n_mean) ** 2:.3g}; "
                "use p_zero_difference")
        return 1.0 - 0.5 * (magnitude * n_mean) ** 2
    raise ValueError(f"unknown perturbation family: {kind!r}")


def _make_perturbation(kind: type, magnitude: float) -> Perturbation:
    if kind is Displacement:
        return Displacement(math.sqrt(magnitude))
    if kind is Squeeze:
        return Squeeze(magnitude)
    if kind is TwoModePhase:
        return TwoModePhase(magnitude)
    raise ValueError(f"unknown perturbation family: {kind!r}")


def _initial_guess(kind: type, n_mean: float, q_target: float, cap: float) -> float:
    if kind is Displacement:
        return q_target / (n_mean + 1)
    if kind is Squeeze:
        return 2 * math.sqrt(q_target / (n_mean**2 + 2 * n_mean + 2))
    if n_mean > 0:
        return math.sqrt(2 * q_target / (n_mean * (n_mean + 2)))
    return cap / 8


def min_detectable_photocurrent(kind: type, n_mean: float, q_target: float,
                                c: Cutoff | None = None) -> float:
    """Smallest magnitude whose d != 0 probability reaches q_target.

    Bisection on the exact p_zero_difference at the twin-beam energy n_mean;
    magnitude conventions and search caps per MAGNITUDE_CAPS.
    """
    if not 0.0 < q_target < 1.0:
        raise ValueError(f"q_target must lie in (0, 1), got {q_target}")
    if kind not in MAGNITUDE_CAPS:
        raise ValueError(f"unknown perturbation family: {kind!r}")
    x = param_for_energy(TwinBeam, n_mean).x
    cap = MAGNITUDE_CAPS[kind]
    target = 1.0 - q_target

    def p_zero(m: float) -> float:
        return p_zero_difference(x, _make_perturbation(kind, m), c).p_zero

    lo = 0.0
    hi = min(_initial_guess(kind, n_mean, q_target, cap), cap)
    while p_zero(hi) > target:
        if hi >= cap:
            raise NoSolutionError(
                f"P(d=0) stays above {target} up to the {kind.__name__} cap",
                envelope=cap, residual=p_zero(cap) - target)
        lo, hi = hi, min(2 * hi, cap)
    iterations = 0
    while hi - lo > _BISECTION_REL_TOL * hi and iterations < _BISECTION_MAX_ITER:
        mid = 0.5 * (lo + hi)
        if p_zero(mid) > target:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return 0.5 * (lo + hi)
