"""Probe state families and their energy parametrization.

Every family is specified by a small immutable spec object and realized on a
truncated Fock space by ``synthesize``.  Mean photon number is the resource
axis of all sensitivity comparisons, so each family carries the exact map
between its natural parameter and the mean total photon number, plus the
inverse map (``param_for_energy``).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import ConvergenceError
from .fock import Cutoff, FockVec, TwoModeFock, apply_mixer, mean_total_photons, tail_mass


@dataclass(frozen=True)
class Vacuum:
    pass


@dataclass(frozen=True)
class Coherent:
    alpha: complex


@dataclass(frozen=True)
class SqueezedVacuum:
    """exp((zeta a'^2 - conj(zeta) a^2)/2) |0>; mean photons sinh^2|zeta|."""

    zeta: complex


@dataclass(frozen=True)
class TwinBeam:
    """sqrt(1-x^2) sum_n x^n |n,n>; mean total photons 2x^2/(1-x^2)."""

    x: float

    def __post_init__(self):
        if not 0.0 <= self.x < 1.0:
            raise ValueError(f"twin-beam parameter must satisfy 0 <= x < 1, got {self.x}")


@dataclass(frozen=True, eq=False)
class CustomSingle:
    """Raw single-mode amplitudes, normalized at synthesis."""

    amps: tuple

    def __post_init__(self):
        object.__setattr__(self, "amps", tuple(complex(a) for a in self.amps))
        if not any(abs(a) > 0 for a in self.amps):
            raise ValueError("custom amplitudes must be normalizable (not all zero)")


@dataclass(frozen=True, eq=False)
class CustomTwoMode:
    """Raw two-mode amplitude matrix c[m, n], normalized at synthesis."""

    amps: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.amps, dtype=complex)
        if a.ndim != 2:
            raise ValueError("two-mode amplitudes must be a 2-D matrix")
        if not np.any(np.abs(a) > 0):
            raise ValueError("custom amplitudes must be normalizable (not all zero)")
        object.__setattr__(self, "amps", a)


ProbeSpec = Union[Vacuum, Coherent, SqueezedVacuum, TwinBeam, CustomSingle, CustomTwoMode]


def is_two_mode(p: ProbeSpec) -> bool:
    return isinstance(p, (TwinBeam, CustomTwoMode))


def mean_photon_number(p: ProbeSpec) -> float:
    """Mean total photon number of the probe (both modes for entangled probes)."""
    if isinstance(p, Vacuum):
        return 0.0
    if isinstance(p, Coherent):
        return abs(p.alpha) ** 2
    if isinstance(p, SqueezedVacuum):
        return math.sinh(abs(p.zeta)) ** 2
    if isinstance(p, TwinBeam):
        return 2 * p.x**2 / (1 - p.x**2)
    if isinstance(p, CustomSingle):
        w = np.abs(np.asarray(p.amps)) ** 2
        return float(np.arange(len(w)) @ w / w.sum())
    if isinstance(p, CustomTwoMode):
        w = np.abs(p.amps) ** 2
        m = np.arange(w.shape[0])[:, None]
        n = np.arange(w.shape[1])[None, :]
        return float(((m + n) * w).sum() / w.sum())
    raise ValueError(f"unknown probe spec: {p!r}")


def param_for_energy(kind: type, n_mean: float) -> ProbeSpec:
    """Inverse of mean_photon_number for the analytic families (phases zero)."""
    if n_mean < 0:
        raise ValueError(f"mean photon number must be nonnegative, got {n_mean}")
    if kind is Vacuum:
        if n_mean > 0:
            raise ValueError("vacuum probe has zero photons")
        return Vacuum()
    if kind is Coherent:
        return Coherent(math.sqrt(n_mean))
    if kind is SqueezedVacuum:
        return SqueezedVacuum(math.asinh(math.sqrt(n_mean)))
    if kind is TwinBeam:
        return TwinBeam(math.sqrt(n_mean / (n_mean + 2)))
    raise ValueError(f"no energy parametrization for {kind!r}")


def synthesize(p: ProbeSpec, c: Cutoff, tail_tol: float | None = None
               ) -> FockVec | TwoModeFock:
    """Realize the probe on the truncated space, renormalized to unit norm.

    When tail_tol is given, the probability mass on the top two retained
    levels must not exceed it (convergence failure otherwise); callers on an
    auto-cutoff path leave it None and escalate the cutoff themselves.
    """
    dim = c.dim
    if isinstance(p, Vacuum):
        v = np.zeros(dim, dtype=complex)
        v[0] = 1.0
        state: FockVec | TwoModeFock = FockVec(v)
    elif isinstance(p, Coherent):
        v = np.empty(dim, dtype=complex)
        v[0] = 1.0
        for n in range(1, dim):
            v[n] = v[n - 1] * p.alpha / math.sqrt(n)
        state = FockVec(v / np.linalg.norm(v))
    elif isinstance(p, SqueezedVacuum):
        r = abs(p.zeta)
        phase = np.exp(1j * np.angle(p.zeta)) if r else 1.0
        v = np.zeros(dim, dtype=complex)
        v[0] = 1.0
        cur = 1.0 + 0j
        for m in range(1, (dim - 1) // 2 + 1):
            # <2m| S |0> / <2(m-1)| S |0> = e^{i psi} tanh(r) sqrt((2m-1)/(2m))
            cur = cur * phase * math.tanh(r) * math.sqrt((2 * m - 1) / (2 * m))
            v[2 * m] = cur
        state = FockVec(v / np.linalg.norm(v))
    elif isinstance(p, TwinBeam):
        m = np.zeros((dim, dim), dtype=complex)
        np.fill_diagonal(m, p.x ** np.arange(dim))
        state = TwoModeFock(m / np.linalg.norm(m))
    elif isinstance(p, CustomSingle):
        if len(p.amps) > dim:
            raise ValueError(f"custom amplitudes ({len(p.amps)}) exceed cutoff {dim}")
        v = np.zeros(dim, dtype=complex)
        v[: len(p.amps)] = p.amps
        state = FockVec(v / np.linalg.norm(v))
    elif isinstance(p, CustomTwoMode):
        k = p.amps.shape
        if k[0] > dim or k[1] > dim:
            raise ValueError(f"custom amplitudes {k} exceed cutoff {dim}")
        m = np.zeros((dim, dim), dtype=complex)
        m[: k[0], : k[1]] = p.amps
        state = TwoModeFock(m / np.linalg.norm(m))
    else:
        raise ValueError(f"unknown probe spec: {p!r}")
    if tail_tol is not None:
        t = tail_mass(state)
        if t > tail_tol:
            raise ConvergenceError(
                f"tail mass {t:.3e} exceeds {tail_tol:.1e} at dim {dim}; raise the cutoff",
                dim=dim)
    return state


def optimal_phase_probe(d_list, weights, c: Cutoff) -> TwoModeFock:
    """Superposition of number-difference eigenstates, sent through a 50/50 mixer.

    The input superposition sum_j w_j |n=0, d_j>> is diagonal in
    D = a'a - b'b; its image under exp(-(pi/4)(a'b - ab')) is an eigenvector
    superposition of the two-mode phase unitary with eigenphases d_j * phi,
    which is what makes these probes optimal for phase detection.
    """
    d_list = [int(d) for d in d_list]
    w = np.asarray(list(weights), dtype=complex)
    if len(d_list) != w.size or w.size == 0:
        raise ValueError("need one weight per d value")
    if not np.any(np.abs(w) > 0):
        raise ValueError("weights must be normalizable (not all zero)")
    dim = c.dim
    if max(abs(d) for d in d_list) > dim - 1:
        raise ValueError(f"|d| values must stay below the cutoff {dim}")
    m = np.zeros((dim, dim), dtype=complex)
    for d, wj in zip(d_list, w):
        if d >= 0:
            m[d, 0] += wj
        else:
            m[0, -d] += wj
    state = TwoModeFock(m / np.linalg.norm(m))
    return apply_mixer(state, -math.pi / 4)


def energy_consistency_gap(p: ProbeSpec, c: Cutoff) -> float:
    """|analytic mean photons - number expectation of the synthesized state|."""
    return abs(mean_photon_number(p) - mean_total_photons(synthesize(p, c)))
