"""Representation vectors of observed counts and the dispersion of amplitude vectors."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dist import OutcomeDistribution, TrialCounts, binomial_weights
from .encode import BitBudget, EncodingKind, _as_budget, encode_value
from .errors import DomainError

NORM_TOL = 1e-12
TWO_PI = 2.0 * math.pi


class VectorKind(enum.Enum):
    NU = "nu"
    ETA = "eta"
    CHI = "chi"


# length of the curve on which the endpoint of a K=2 vector can lie
ENDPOINT_LOCUS_LENGTH = {
    VectorKind.NU: math.sqrt(2.0),
    VectorKind.ETA: math.pi / 2.0,
    VectorKind.CHI: math.sqrt(2.0),
}


@dataclass(frozen=True)
class PhaseVector:
    phases: tuple[float, ...]

    def __post_init__(self) -> None:
        phases = tuple(float(x) for x in self.phases)
        if not all(math.isfinite(x) for x in phases):
            raise DomainError(f"phases must be finite: {phases}")
        object.__setattr__(self, "phases", phases)

    @classmethod
    def zeros(cls, k: int) -> "PhaseVector":
        return cls((0.0,) * k)

    @classmethod
    def from_degrees(cls, degrees: Sequence[float]) -> "PhaseVector":
        return cls(tuple(math.radians(d) for d in degrees))

    def __len__(self) -> int:
        return len(self.phases)

    def canonical(self) -> tuple[float, ...]:
        return tuple(x % TWO_PI for x in self.phases)

    def factors(self) -> np.ndarray:
        return np.exp(1j * np.array(self.phases))


@dataclass(frozen=True, eq=False)
class RepVector:
    components: np.ndarray
    kind: VectorKind

    def __len__(self) -> int:
        return len(self.components)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.components))


@dataclass(frozen=True)
class DispersionReport:
    """Per-component dispersions D_j^2 and their sum for N trials."""

    per_component: tuple[float, ...]
    total: float
    trials: int

    @classmethod
    def from_components(cls, values, trials: int) -> "DispersionReport":
        per = tuple(float(v) for v in values)
        return cls(per, math.fsum(per), trials)

    @property
    def n_scaled_total(self) -> float:
        return self.trials * self.total

    @property
    def n_scaled(self) -> tuple[float, ...]:
        return tuple(self.trials * v for v in self.per_component)


def _check_phases(phases: PhaseVector | None, k: int) -> PhaseVector:
    if phases is None:
        return PhaseVector.zeros(k)
    if len(phases) != k:
        raise DomainError(f"{len(phases)} phases given for K={k}")
    return phases


def build_vector(
    kind: VectorKind, counts: TrialCounts, phases: PhaseVector | None = None
) -> RepVector:
    """Vector representation of observed counts.

    NU and CHI are real two-component vectors and take no phases;
    ETA has components sqrt(L_j/N) * exp(i phi_j) for any K.
    """
    phases = _check_phases(phases, counts.k)
    if kind is VectorKind.ETA:
        comps = np.sqrt(counts.frequencies()) * phases.factors()
        return RepVector(comps, kind)
    if counts.k != 2:
        raise DomainError(f"{kind.name} vectors need K=2, got K={counts.k}")
    if any(phi != 0.0 for phi in phases.phases):
        raise DomainError(f"{kind.name} vectors are real; phases must be zero")
    nu = counts.counts[0] / counts.total
    first = nu if kind is VectorKind.NU else encode_value(EncodingKind.ARCSINE, nu)
    return RepVector(np.array([first, 1.0 - first]), kind)


def _endpoints(kind: VectorKind, nu: np.ndarray) -> np.ndarray:
    """Endpoint coordinates (first, second) for K=2 vectors at frequencies nu."""
    if kind is VectorKind.ETA:
        return np.stack([np.sqrt(nu), np.sqrt(1.0 - nu)])
    first = nu if kind is VectorKind.NU else encode_value(EncodingKind.ARCSINE, nu)
    return np.stack([first, 1.0 - first])


def endpoint_prob(kind: VectorKind, n: int, p: float, bits: int | BitBudget) -> float:
    """Probability that the observed endpoint lies within the S-bit radius of the true one.

    The radius is 2**-(S+1) times the length of the endpoint locus:
    sqrt(2) for the straight NU and CHI lines, pi/2 for the ETA quarter circle.
    """
    budget = _as_budget(bits)
    if n < 1:
        raise DomainError(f"trial count must be positive, got {n}")
    w = binomial_weights(n, p)
    observed = _endpoints(kind, np.arange(n + 1) / n)
    true = _endpoints(kind, np.array([p]))
    dist = np.hypot(observed[0] - true[0], observed[1] - true[1])
    accept = dist < ENDPOINT_LOCUS_LENGTH[kind] * budget.radius
    return min(1.0, float(np.sum(w[accept])))


def _sqrt_freqs(n: int) -> np.ndarray:
    return np.sqrt(np.arange(n + 1) / n)


def expectation_magnitude(n: int, p_j: float) -> float:
    """E(sqrt(L_j/N)), the phase-free part of the expected amplitude."""
    return float(np.dot(binomial_weights(n, p_j), _sqrt_freqs(n)))


def expectation_eta(n: int, p_j: float, phi_j: float = 0.0) -> complex:
    """Expectation of sqrt(L_j/N) exp(i phi_j) under the binomial marginal of L_j."""
    if n < 1:
        raise DomainError(f"trial count must be positive, got {n}")
    mag = expectation_magnitude(n, p_j)
    if phi_j == 0.0:
        return complex(mag, 0.0)
    return mag * complex(math.cos(phi_j), math.sin(phi_j))


def dispersion_component(n: int, p_j: float, phi_j: float = 0.0, literal: bool = False) -> float:
    """D_j^2 = E|eta_j - E(eta_j)|^2 for one amplitude component.

    The default evaluates E(L_j/N) - |E(eta_j)|^2 with the phase factored out,
    so the result does not depend on ``phi_j`` at all. ``literal=True`` instead
    sums l/N - 2 Re(eta_j* E(eta_j)) + |E(eta_j)|^2 term by term with the phase
    carried through.
    """
    if n < 1:
        raise DomainError(f"trial count must be positive, got {n}")
    w = binomial_weights(n, p_j)
    freqs = np.arange(n + 1) / n
    if not literal:
        mag = float(np.dot(w, np.sqrt(freqs)))
        return max(0.0, float(np.dot(w, freqs)) - mag * mag)
    phase = complex(math.cos(phi_j), math.sin(phi_j))
    eta = np.sqrt(freqs) * phase
    mean = complex(np.dot(w, eta))
    terms = freqs - 2.0 * np.real(np.conj(eta) * mean) + abs(mean) ** 2
    return float(np.dot(w, terms))


def dispersion_total(
    n: int, dist: OutcomeDistribution, phases: PhaseVector | None = None
) -> DispersionReport:
    """Dispersion of the K-component amplitude vector as a sum over components."""
    _check_phases(phases, dist.k)
    per = [dispersion_component(n, p) for p in dist.probs]
    return DispersionReport.from_components(per, n)


def expectation_vector(
    n: int, dist: OutcomeDistribution, phases: PhaseVector | None = None
) -> np.ndarray:
    phases = _check_phases(phases, dist.k)
    return np.array([expectation_eta(n, p, phi) for p, phi in zip(dist.probs, phases.phases)])


def asymptotic_dispersion(k: int, n: int) -> float:
    """Large-N limit (K-1)/(4N) of the amplitude-vector dispersion."""
    if k < 2 or n < 1:
        raise DomainError(f"need K >= 2 and N >= 1, got K={k}, N={n}")
    return (k - 1) / (4.0 * n)


def asymptotic_component(p_j: float) -> float:
    """Large-N limit of N * D_j^2."""
    return 0.25 * (1.0 - p_j)
