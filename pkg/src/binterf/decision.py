"""Neyman-Pearson binary decision machinery.

Covers the analytic pure-state receiver operating characteristic, the
likelihood-ratio projector construction for arbitrary density matrices, the
overlap-deficit threshold that encodes a target acceptance ratio, the
minimum-detectable-magnitude solver, and the eigenphase-polygon lower bound
on unitary survival probability.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .errors import NoSolutionError

# Eigenvalues within this band of zero stay out of the acceptance projector.
# Biases toward lower false alarm when the decision operator is singular.
ZERO_EIGENVALUE_TOL = 1e-12

# Hermiticity / trace / positivity slack for density-matrix inputs.
DENSITY_TOL = 1e-10

_BISECTION_REL_TOL = 1e-10
_BISECTION_MAX_ITER = 200


@dataclass(frozen=True)
class ROCPoint:
    """One (false-alarm, detection) probability pair."""

    q0: float
    q_det: float

    def __post_init__(self):
        for name, v in (("q0", self.q0), ("q_det", self.q_det)):
            if not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {v}")


@dataclass(frozen=True)
class SensitivitySpec:
    """Operating point of the detector: false alarm q0 and acceptance ratio.

    acceptance_ratio is the required q_det/q0 multiple; the product
    acceptance_ratio * q0 is a probability and cannot exceed 1.
    """

    q0: float
    acceptance_ratio: float

    def __post_init__(self):
        if not 0.0 <= self.q0 < 1.0:
            raise ValueError(f"q0 must lie in [0, 1), got {self.q0}")
        if self.acceptance_ratio < 1.0:
            raise ValueError(
                f"acceptance ratio must be >= 1, got {self.acceptance_ratio}")
        if self.acceptance_ratio * self.q0 > 1.0 + 1e-15:
            raise ValueError(
                f"acceptance_ratio * q0 = {self.acceptance_ratio * self.q0} exceeds 1; "
                "the requested detection probability is not a probability")


@dataclass(frozen=True)
class SensitivityResult:
    """Solved minimum detectable magnitude with bracket diagnostics."""

    magnitude: float
    deficit: float
    bracket_lo: float
    bracket_hi: float
    iterations: int
    converged: bool


@dataclass(frozen=True)
class HelstromResult:
    """Projector decision at one likelihood-ratio multiplier mu."""

    mu: float
    q0: float
    q_det: float
    projector_rank: int


@dataclass(frozen=True)
class EigenPhasePolygon:
    """Eigenphases of a unitary, viewed as points e^{i phi} on the unit circle."""

    phases: tuple

    def __init__(self, phases: Sequence[float]):
        reduced = tuple(float(p) % (2 * math.pi) for p in phases)
        if not reduced:
            raise ValueError("phase list must be non-empty")
        object.__setattr__(self, "phases", reduced)


def detection_probability(q0: float, kappa_sq: float) -> float:
    """Optimal pure-state detection probability at false alarm q0.

    For overlap squared kappa_sq between the two hypotheses,
        q_det = [sqrt(q0 kappa_sq) + sqrt((1-q0)(1-kappa_sq))]^2
    when q0 <= kappa_sq, and 1 beyond that boundary (the states are then
    distinguishable enough that the false-alarm budget is not binding).
    """
    for name, v in (("q0", q0), ("kappa_sq", kappa_sq)):
        if not 0.0 <= v <= 1.0:
            raise ValueError(f"{name} must lie in [0, 1], got {v}")
    if q0 >= kappa_sq:
        return 1.0
    root = math.sqrt(q0 * kappa_sq) + math.sqrt((1 - q0) * (1 - kappa_sq))
    return min(1.0, root**2)


def deficit_threshold(q0: float, acceptance_ratio: float) -> float:
    """Overlap deficit required to reach q_det = acceptance_ratio * q0.

    Returns the threshold on 1 - kappa_sq: perturbations whose overlap
    deficit exceeds this value are detected with the requested multiple of
    the false-alarm probability.  Closed form:
        q0 * [1 + g(1 - 2 q0) - 2 sqrt(g (1-q0)(1 - g q0))],  g = acceptance_ratio.
    Inverse of detection_probability in the sense
        detection_probability(q0, 1 - deficit) = acceptance_ratio * q0.
    """
    spec = SensitivitySpec(q0, acceptance_ratio)
    g, p = spec.acceptance_ratio, spec.q0
    radicand = g * (1 - p) * (1 - g * p)
    # Clamp a -1e-16-scale radicand produced by the g*q0 = 1 boundary.
    val = p * (1 + g * (1 - 2 * p) - 2 * math.sqrt(max(radicand, 0.0)))
    return min(max(val, 0.0), 1.0)


def min_detectable(overlap_sq_fn: Callable[[float], float],
                   spec: SensitivitySpec, envelope: float) -> SensitivityResult:
    """Smallest magnitude whose overlap deficit reaches the spec's threshold.

    overlap_sq_fn maps a perturbation magnitude to the squared overlap of
    unperturbed and perturbed probe; it must start at 1 and be non-increasing
    on [0, envelope].  Plain bisection to relative tolerance 1e-10.
    """
    if envelope <= 0:
        raise ValueError(f"search envelope must be positive, got {envelope}")
    deficit = deficit_threshold(spec.q0, spec.acceptance_ratio)
    if deficit == 0.0:
        return SensitivityResult(0.0, 0.0, 0.0, 0.0, 0, True)
    at_zero = overlap_sq_fn(0.0)
    if abs(at_zero - 1.0) > 1e-8:
        raise ValueError(
            f"overlap at zero magnitude is {at_zero}, expected 1; "
            "the map does not describe a perturbation family")
    target = 1.0 - deficit
    lo, hi = 0.0, float(envelope)
    f_hi = overlap_sq_fn(hi) - target
    if f_hi > 0.0:
        raise NoSolutionError(
            f"overlap stays above {target} on [0, {envelope}]; "
            "perturbation undetectable at this threshold within the envelope",
            envelope=envelope, residual=f_hi)
    iterations = 0
    while hi - lo > _BISECTION_REL_TOL * hi and iterations < _BISECTION_MAX_ITER:
        mid = 0.5 * (lo + hi)
        if overlap_sq_fn(mid) - target > 0.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    return SensitivityResult(0.5 * (lo + hi), deficit, lo, hi, iterations,
                             hi - lo <= _BISECTION_REL_TOL * hi)


def pure_density(amps: np.ndarray) -> np.ndarray:
    """Rank-one density matrix of a (flattened, normalized) amplitude vector."""
    v = np.asarray(amps, dtype=complex).reshape(-1)
    norm = np.linalg.norm(v)
    if norm == 0:
        raise ValueError("cannot normalize the zero vector")
    v = v / norm
    return np.outer(v, v.conj())


def _check_density(name: str, rho: np.ndarray, dim: int | None) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {rho.shape}")
    if dim is not None and rho.shape[0] != dim:
        raise ValueError(
            f"density matrices must share a dimension: {rho.shape[0]} vs {dim}")
    if np.max(np.abs(rho - rho.conj().T)) > DENSITY_TOL:
        raise ValueError(f"{name} is not Hermitian within {DENSITY_TOL}")
    tr = np.trace(rho).real
    if abs(tr - 1.0) > DENSITY_TOL:
        raise ValueError(f"{name} has trace {tr}, expected 1 within {DENSITY_TOL}")
    if np.linalg.eigvalsh(rho)[0] < -DENSITY_TOL:
        raise ValueError(f"{name} is not positive semidefinite within {DENSITY_TOL}")
    return rho


def helstrom_np(rho0: np.ndarray, rho_l: np.ndarray, mu: float,
                zero_tol: float = ZERO_EIGENVALUE_TOL) -> HelstromResult:
    """Likelihood-ratio projector decision for a general density-matrix pair.

    Diagonalizes rho_l - mu * rho0 and accepts on the strictly positive
    eigenspace (eigenvalues <= zero_tol excluded).  Returns the resulting
    false-alarm and detection probabilities.
    """
    if mu < 0 or not math.isfinite(mu):
        raise ValueError(f"multiplier mu must be finite and >= 0, got {mu}")
    rho0 = _check_density("rho0", rho0, None)
    rho_l = _check_density("rho_l", rho_l, rho0.shape[0])
    eigvals, eigvecs = np.linalg.eigh(rho_l - mu * rho0)
    keep = eigvals > zero_tol
    rank = int(np.count_nonzero(keep))
    if rank == 0:
        return HelstromResult(mu, 0.0, 0.0, 0)
    basis = eigvecs[:, keep]
    q0 = float(np.einsum("ij,jk,ki->", basis.conj().T, rho0, basis).real)
    q_det = float(np.einsum("ij,jk,ki->", basis.conj().T, rho_l, basis).real)
    clamp = lambda v: min(max(v, 0.0), 1.0)
    return HelstromResult(mu, clamp(q0), clamp(q_det), rank)


def default_mu_grid(n_points: int = 200) -> np.ndarray:
    """Logarithmic multiplier grid wide enough to trace the full curve."""
    return np.logspace(-4, 4, n_points)


def roc_curve(rho0: np.ndarray, rho_l: np.ndarray,
              mu_grid: Sequence[float] | None = None) -> list[HelstromResult]:
    """Trace the receiver operating characteristic over a multiplier grid."""
    grid = default_mu_grid() if mu_grid is None else mu_grid
    return [helstrom_np(rho0, rho_l, float(mu)) for mu in grid]


# ---------------------------------------------------------------------------
# Eigenphase polygon: the minimum survival probability of a unitary over all
# probes equals the squared distance from the origin to the convex hull of
# its eigenvalues on the unit circle.

def _convex_hull(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    # Monotone chain; returns counterclockwise hull without repeated endpoint.
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def cross(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list[tuple[float, float]] = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list[tuple[float, float]] = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    return lower[:-1] + upper[:-1]


def _segment_distance_sq(a: tuple[float, float], b: tuple[float, float]) -> float:
    ax, ay = a
    dx, dy = b[0] - ax, b[1] - ay
    seg = dx * dx + dy * dy
    if seg == 0.0:
        return ax * ax + ay * ay
    t = min(1.0, max(0.0, -(ax * dx + ay * dy) / seg))
    px, py = ax + t * dx, ay + t * dy
    return px * px + py * py


def _origin_inside(hull: list[tuple[float, float]]) -> bool:
    # hull is counterclockwise; inside (or on boundary) iff the origin is on
    # the left of every directed edge.
    n = len(hull)
    for i in range(n):
        ax, ay = hull[i]
        bx, by = hull[(i + 1) % n]
        if (bx - ax) * (-ay) - (by - ay) * (-ax) < 0:
            return False
    return True


def polygon_min_overlap(poly: EigenPhasePolygon | Sequence[float]) -> float:
    """Squared distance from the origin to the convex hull of e^{i phi_j}.

    This is the greatest lower bound on |<psi|U|psi>|^2 over all probes for a
    unitary with the given eigenphases; 0 when the hull encloses the origin,
    cos^2(spread/2) for two phases separated by at most pi.
    """
    if not isinstance(poly, EigenPhasePolygon):
        poly = EigenPhasePolygon(poly)
    points = [(math.cos(p), math.sin(p)) for p in poly.phases]
    hull = _convex_hull(points)
    if len(hull) == 1:
        x, y = hull[0]
        return x * x + y * y
    if len(hull) >= 3 and _origin_inside(hull):
        return 0.0
    return min(_segment_distance_sq(hull[i], hull[(i + 1) % len(hull)])
               for i in range(len(hull)))


def optimal_probe_superposition(phase_i: float, phase_j: float,
                                eigvec_i: np.ndarray,
                                eigvec_j: np.ndarray) -> np.ndarray:
    """Equal superposition of two unitary eigenvectors.

    For a unitary with eigenpairs (e^{i phase_i}, eigvec_i) and
    (e^{i phase_j}, eigvec_j) this probe attains survival probability
    cos^2((phase_i - phase_j)/2), the two-phase polygon bound.  The
    eigenvectors must be orthogonal (they belong to distinct eigenvalues).
    """
    for p in (phase_i, phase_j):
        if not math.isfinite(p):
            raise ValueError(f"eigenphase must be finite, got {p}")
    vi = np.asarray(eigvec_i, dtype=complex).reshape(-1)
    vj = np.asarray(eigvec_j, dtype=complex).reshape(-1)
    if vi.shape != vj.shape:
        raise ValueError(f"eigenvector shapes differ: {vi.shape} vs {vj.shape}")
    ni, nj = np.linalg.norm(vi), np.linalg.norm(vj)
    if ni == 0 or nj == 0:
        raise ValueError("eigenvectors must be nonzero")
    vi, vj = vi / ni, vj / nj
    ip = abs(np.vdot(vi, vj))
    if ip > 1e-10:
        raise ValueError(f"eigenvectors are not orthogonal: |<i|j>| = {ip:.3e}")
    return (vi + vj) / math.sqrt(2.0)
