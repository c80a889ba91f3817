"""SU(2) rotations, their embedding into K dimensions, and dispersion under unitaries.

Factor lists are applied in order: ``compose([f1, f2, f3])`` returns
``F3 @ F2 @ F1`` so that ``f1`` acts on the vector first.
Indices of embedded rotations are 1-based, i < j.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .dist import (
    DEFAULT_CUTOFF,
    OutcomeDistribution,
    binomial_weights,
    trinomial_expectation,
)
from .errors import DomainError
from .repvec import (
    DispersionReport,
    PhaseVector,
    RepVector,
    VectorKind,
    _check_phases,
    expectation_vector,
)

UNITARY_TOL = 1e-10
SU2_TOL = 1e-12


@dataclass(frozen=True)
class Rotation2Params:
    """Rotation angle ``tau`` about the axis with polar angle ``theta`` and azimuth ``phi``.

    Radians. Any finite values are accepted.
    """

    tau: float
    theta: float
    phi: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(x) for x in (self.tau, self.theta, self.phi)):
            raise DomainError(f"rotation angles must be finite: {self}")

    @classmethod
    def from_degrees(cls, tau: float, theta: float, phi: float) -> "Rotation2Params":
        return cls(math.radians(tau), math.radians(theta), math.radians(phi))

    def canonical(self) -> tuple[float, float, float]:
        """Equivalent angles with tau in [0, pi), theta in [0, pi], phi in [0, 2 pi).

        Equal canonical forms mean equal matrices up to an overall sign.
        """
        tau, theta, phi = self.tau, self.theta % (2 * math.pi), self.phi
        if theta > math.pi:
            theta = 2 * math.pi - theta
            phi += math.pi
        return (tau % math.pi, theta, phi % (2 * math.pi))


@dataclass(frozen=True)
class Unitary2:
    """The 2x2 matrix [[a, b], [-conj(b), conj(a)]]."""

    a: complex
    b: complex

    def __post_init__(self) -> None:
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > SU2_TOL:
            raise DomainError(f"|a|^2 + |b|^2 must be 1, got a={self.a}, b={self.b}")

    @classmethod
    def identity(cls) -> "Unitary2":
        return cls(1.0 + 0j, 0j)

    @property
    def matrix(self) -> np.ndarray:
        a, b = complex(self.a), complex(self.b)
        return np.array([[a, b], [-b.conjugate(), a.conjugate()]])


def rotation2(params: Rotation2Params) -> Unitary2:
    """a = cos tau + i sin tau cos theta,  b = sin tau sin theta exp(-i phi).

    This equals exp(i tau n.sigma) for the unit axis
    n = (-sin theta sin phi, sin theta cos phi, cos theta).
    """
    tau, theta, phi = params.tau, params.theta, params.phi
    a = complex(math.cos(tau), math.sin(tau) * math.cos(theta))
    s = math.sin(tau) * math.sin(theta)
    b = complex(s * math.cos(phi), -s * math.sin(phi))
    return Unitary2(a, b)


@dataclass(frozen=True)
class EmbeddedRotation:
    i: int
    j: int
    rot: Unitary2
    dim: int

    def __post_init__(self) -> None:
        if not (1 <= self.i < self.j <= self.dim):
            raise DomainError(f"need 1 <= i < j <= K, got i={self.i}, j={self.j}, K={self.dim}")


@dataclass(frozen=True, eq=False)
class UnitaryK:
    entries: np.ndarray

    def __post_init__(self) -> None:
        m = np.array(self.entries, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DomainError(f"unitary must be square, got shape {m.shape}")
        m.setflags(write=False)
        object.__setattr__(self, "entries", m)
        if self.residual() > UNITARY_TOL:
            raise DomainError(f"matrix is not unitary (residual {self.residual():.3g})")

    @classmethod
    def identity(cls, dim: int) -> "UnitaryK":
        return cls(np.eye(dim, dtype=complex))

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def residual(self) -> float:
        """max |U U^dagger - I| elementwise."""
        m = self.entries
        return float(np.max(np.abs(m @ m.conj().T - np.eye(len(m)))))


def embed(er: EmbeddedRotation) -> UnitaryK:
    m = np.eye(er.dim, dtype=complex)
    i, j = er.i - 1, er.j - 1
    block = er.rot.matrix
    m[i, i], m[i, j] = block[0, 0], block[0, 1]
    m[j, i], m[j, j] = block[1, 0], block[1, 1]
    return UnitaryK(m)


def compose(factors: Sequence[EmbeddedRotation], dim: int | None = None) -> UnitaryK:
    """Product of embedded rotations, the first factor acting first.

    ``dim`` is needed only for an empty factor list.
    """
    if not factors:
        if dim is None:
            raise DomainError("dimension required to compose an empty factor list")
        return UnitaryK.identity(dim)
    k = factors[0].dim
    if dim is not None and dim != k:
        raise DomainError(f"factors have K={k}, requested K={dim}")
    m = np.eye(k, dtype=complex)
    for f in factors:
        if f.dim != k:
            raise DomainError(f"factor dimension {f.dim} differs from {k}")
        m = embed(f).entries @ m
    return UnitaryK(m)


def random_factors(
    k: int, count: int, rng: np.random.Generator
) -> list[EmbeddedRotation]:
    """Embedded rotations with uniformly drawn index pairs and angles."""
    out = []
    for _ in range(count):
        i, j = sorted(rng.choice(k, size=2, replace=False) + 1)
        tau, theta, phi = rng.uniform(0, 2 * math.pi, size=3)
        out.append(EmbeddedRotation(int(i), int(j), rotation2(Rotation2Params(tau, theta, phi)), k))
    return out


def apply(u: UnitaryK, v: RepVector) -> RepVector:
    if v.kind is not VectorKind.ETA:
        raise DomainError(f"only amplitude vectors can be transformed, got {v.kind.name}")
    if len(v) != u.dim:
        raise DomainError(f"vector has {len(v)} components, unitary is {u.dim}x{u.dim}")
    return RepVector(u.entries @ v.components, VectorKind.ETA)


def joint_sqrt_moment(
    n: int, dist: OutcomeDistribution, i: int, j: int, cutoff: float = DEFAULT_CUTOFF
) -> float:
    """E(sqrt(L_i L_j)) / N for 0-based outcome indices i != j.

    A single binomial sum when the two outcomes exhaust all probability,
    otherwise a trinomial double sum with certified tail cutoff.
    """
    pi, pj = dist.probs[i], dist.probs[j]
    if pi == 0.0 or pj == 0.0:
        return 0.0
    others = math.fsum(p for m, p in enumerate(dist.probs) if m not in (i, j))
    if others == 0.0:
        w = binomial_weights(n, pi)
        l = np.arange(n + 1)
        return float(np.dot(w, np.sqrt(l * (n - l)))) / n
    total = trinomial_expectation(
        n, pi, pj, lambda la, lb: np.sqrt(float(la) * lb), cutoff=cutoff
    )
    return float(total) / n


def moment_matrix(
    n: int,
    dist: OutcomeDistribution,
    phases: PhaseVector | None = None,
    cutoff: float = DEFAULT_CUTOFF,
) -> np.ndarray:
    """M[j, l] = E(eta_j conj(eta_l)); the diagonal is p_j."""
    phases = _check_phases(phases, dist.k)
    k = dist.k
    ph = np.array(phases.phases)
    m = np.zeros((k, k), dtype=complex)
    for j in range(k):
        m[j, j] = dist.probs[j]
        for l in range(j + 1, k):
            r = joint_sqrt_moment(n, dist, j, l, cutoff)
            m[j, l] = r * np.exp(1j * (ph[j] - ph[l]))
            m[l, j] = np.conj(m[j, l])
    return m


def dispersion_transformed(
    n: int,
    dist: OutcomeDistribution,
    phases: PhaseVector | None,
    u: UnitaryK,
    cutoff: float = DEFAULT_CUTOFF,
) -> DispersionReport:
    """Per-component dispersion of psi = U eta.

    D^2(psi_k) = (U M U^dagger)_kk - |(U E(eta))_k|^2 with M the second-moment
    matrix of eta.
    """
    if u.dim != dist.k:
        raise DomainError(f"unitary is {u.dim}x{u.dim}, distribution has K={dist.k}")
    phases = _check_phases(phases, dist.k)
    mean = expectation_vector(n, dist, phases)
    second = moment_matrix(n, dist, phases, cutoff)
    return _transformed_report(n, u, mean, second)


def _transformed_report(
    n: int, u: UnitaryK, mean_eta: np.ndarray, second: np.ndarray
) -> DispersionReport:
    m = u.entries
    mean = m @ mean_eta
    power = np.einsum("kj,jl,kl->k", m, second, m.conj()).real
    per = np.maximum(0.0, power - (mean.real**2 + mean.imag**2))
    return DispersionReport.from_components(per, n)


def pair_dispersion_direct(
    n: int, dist: OutcomeDistribution, phases: PhaseVector | None, er: EmbeddedRotation
) -> tuple[float, float]:
    """Dispersions of the two components touched by ``er``, summed outcome by outcome.

    Evaluates E|a eta_i + b eta_j - E(.)|^2 and E|-b* eta_i + a* eta_j - E(.)|^2
    directly over the joint law of (L_i, L_j), independent of the moment matrix.
    """
    if er.dim != dist.k:
        raise DomainError(f"rotation acts on K={er.dim}, distribution has K={dist.k}")
    phases = _check_phases(phases, dist.k)
    i, j = er.i - 1, er.j - 1
    a, b = complex(er.rot.a), complex(er.rot.b)
    ei = complex(np.exp(1j * phases.phases[i]))
    ej = complex(np.exp(1j * phases.phases[j]))
    pi, pj = dist.probs[i], dist.probs[j]
    mean = expectation_vector(n, dist, phases)
    m1 = a * mean[i] + b * mean[j]
    m2 = -b.conjugate() * mean[i] + a.conjugate() * mean[j]

    def sq_dev(li, lj):
        eta_i = np.sqrt(li / n) * ei
        eta_j = np.sqrt(lj / n) * ej
        d1 = a * eta_i + b * eta_j - m1
        d2 = -b.conjugate() * eta_i + a.conjugate() * eta_j - m2
        return np.abs(d1) ** 2, np.abs(d2) ** 2

    others = math.fsum(p for m, p in enumerate(dist.probs) if m not in (i, j))
    if others == 0.0:
        li = np.arange(n + 1)
        w = binomial_weights(n, pi)
        d1, d2 = sq_dev(li, n - li)
        return float(np.dot(w, d1)), float(np.dot(w, d2))
    d1 = trinomial_expectation(n, pi, pj, lambda la, lb: sq_dev(float(la), lb)[0])
    d2 = trinomial_expectation(n, pi, pj, lambda la, lb: sq_dev(float(la), lb)[1])
    return float(d1), float(d2)


class Conservation(NamedTuple):
    total_before: float
    total_after: float
    difference: float


def conservation_check(
    n: int, dist: OutcomeDistribution, phases: PhaseVector | None, u: UnitaryK
) -> Conservation:
    if u.dim != dist.k:
        raise DomainError(f"unitary is {u.dim}x{u.dim}, distribution has K={dist.k}")
    phases = _check_phases(phases, dist.k)
    mean = expectation_vector(n, dist, phases)
    second = moment_matrix(n, dist, phases)
    before = _transformed_report(n, UnitaryK.identity(dist.k), mean, second).total
    after = _transformed_report(n, u, mean, second).total
    return Conservation(before, after, abs(after - before))
