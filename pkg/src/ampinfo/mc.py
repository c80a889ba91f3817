"""Monte Carlo simulation of the experiments, as an independent check on exact sums.

Every replication draws from its own Philox4x64-10 stream keyed by
(seed, replication index), so results do not depend on evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dist import OutcomeDistribution, TrialCounts
from .encode import (
    BitBudget,
    EncodingKind,
    _as_budget,
    encode_limit,
    encode_value,
    prob_bits_correct,
)
from .errors import DomainError
from .repvec import PhaseVector, _check_phases, dispersion_total, expectation_vector
from .unitary import (
    Rotation2Params,
    UnitaryK,
    compose,
    dispersion_transformed,
    random_factors,
    rotation2,
)

GENERATOR = "numpy.Philox4x64-10(key=(seed, replication))"
_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class SamplerConfig:
    seed: int = 42
    replications: int = 10_000

    def __post_init__(self) -> None:
        if self.replications < 1:
            raise DomainError(f"replications must be at least 1, got {self.replications}")

    def generator(self, replication: int) -> np.random.Generator:
        key = np.array([self.seed & _MASK64, replication & _MASK64], dtype=np.uint64)
        return np.random.Generator(np.random.Philox(key=key))


@dataclass(frozen=True)
class McEstimate:
    mean: float
    std_error: float
    replications: int
    generator: str = GENERATOR

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "McEstimate":
        n = len(samples)
        mean = float(np.mean(samples))
        # a single replication carries no spread information
        se = float(np.std(samples, ddof=1) / math.sqrt(n)) if n > 1 else math.inf
        return cls(mean, se, n)

    def covers(self, value: float, width: float = 3.0) -> bool:
        """True if ``value`` lies within ``width`` standard errors of the mean."""
        if self.mean == value:
            return True
        return abs(self.mean - value) <= width * self.std_error


def _draw(n: int, cdf: np.ndarray, rng: np.random.Generator) -> np.ndarray:
    u = rng.random(n)
    idx = np.searchsorted(cdf, u, side="right")
    return np.bincount(idx, minlength=len(cdf))


def _cdf(dist: OutcomeDistribution) -> np.ndarray:
    cdf = np.cumsum(dist.as_array())
    cdf[-1] = 1.0
    return cdf


def sample_counts(
    n: int, dist: OutcomeDistribution, cfg: SamplerConfig, replication: int = 0
) -> TrialCounts:
    """Counts from n simulated trials, one inverse-CDF draw per trial."""
    if n < 1:
        raise DomainError(f"trial count must be positive, got {n}")
    counts = _draw(n, _cdf(dist), cfg.generator(replication))
    return TrialCounts(tuple(int(c) for c in counts), n)


def sample_count_matrix(n: int, dist: OutcomeDistribution, cfg: SamplerConfig) -> np.ndarray:
    """(replications, K) array of counts, row r drawn from stream r."""
    if n < 1:
        raise DomainError(f"trial count must be positive, got {n}")
    cdf = _cdf(dist)
    out = np.empty((cfg.replications, dist.k), dtype=np.int64)
    for r in range(cfg.replications):
        out[r] = _draw(n, cdf, cfg.generator(r))
    return out


def mc_prob_bits(
    kind: EncodingKind,
    n: int,
    p: float,
    bits: int | BitBudget,
    cfg: SamplerConfig,
    counts: np.ndarray | None = None,
) -> McEstimate:
    """Fraction of simulated experiments whose encoded frequency is within the S-bit radius.

    ``counts`` may supply a precomputed count matrix for the binary law (p, 1-p).
    """
    budget = _as_budget(bits)
    if counts is None:
        counts = sample_count_matrix(n, OutcomeDistribution.binary(p), cfg)
    encoded = encode_value(kind, counts[:, 0] / n)
    hits = np.abs(encoded - encode_limit(kind, p)) < budget.radius
    return McEstimate.from_samples(hits.astype(float))


def mc_dispersion(
    n: int,
    dist: OutcomeDistribution,
    phases: PhaseVector | None,
    u: UnitaryK | None,
    cfg: SamplerConfig,
    counts: np.ndarray | None = None,
) -> McEstimate:
    """Mean squared distance of the simulated (optionally transformed) amplitude
    vector from its exact expectation."""
    phases = _check_phases(phases, dist.k)
    if u is not None and u.dim != dist.k:
        raise DomainError(f"unitary is {u.dim}x{u.dim}, distribution has K={dist.k}")
    if counts is None:
        counts = sample_count_matrix(n, dist, cfg)
    eta = np.sqrt(counts / n) * phases.factors()
    mean = expectation_vector(n, dist, phases)
    if u is not None:
        eta = eta @ u.entries.T
        mean = u.entries @ mean
    dev = eta - mean
    sq = np.sum(dev.real**2 + dev.imag**2, axis=1)
    return McEstimate.from_samples(sq)


@dataclass(frozen=True)
class CalibrationCell:
    name: str
    exact: float
    estimate: McEstimate

    @property
    def passed(self) -> bool:
        return self.estimate.covers(self.exact)


def calibration_cells(cfg: SamplerConfig) -> list[CalibrationCell]:
    """Exact values against simulation over a fixed 20-cell grid.

    15 bit-credibility cells (three encodings at five (N, p) settings),
    one degenerate bit-credibility cell, and four dispersion cells, one of
    them degenerate. Count matrices are shared between cells with the same
    (N, distribution).
    """
    cache: dict[tuple, np.ndarray] = {}

    def counts_for(n: int, dist: OutcomeDistribution) -> np.ndarray:
        key = (n, dist.probs)
        if key not in cache:
            cache[key] = sample_count_matrix(n, dist, cfg)
        return cache[key]

    cells = []
    for n, p in ((4000, 0.05), (4000, 0.3), (4000, 0.5), (4000, 0.9), (500, 0.2)):
        counts = counts_for(n, OutcomeDistribution.binary(p))
        for kind in EncodingKind:
            est = mc_prob_bits(kind, n, p, 6, cfg, counts)
            exact = prob_bits_correct(kind, n, p, 6)
            cells.append(CalibrationCell(f"bits {kind.value} N={n} p={p}", exact, est))
    counts = counts_for(1000, OutcomeDistribution.binary(1.0))
    est = mc_prob_bits(EncodingKind.AMPLITUDE, 1000, 1.0, 6, cfg, counts)
    exact = prob_bits_correct(EncodingKind.AMPLITUDE, 1000, 1.0, 6)
    cells.append(CalibrationCell("bits amplitude N=1000 p=1 (degenerate)", exact, est))

    half = OutcomeDistribution.binary(0.5)
    est = mc_dispersion(4000, half, None, None, cfg, counts_for(4000, half))
    cells.append(CalibrationCell("dispersion K=2 N=4000 p=0.5", dispersion_total(4000, half).total, est))

    fig5 = UnitaryK(rotation2(Rotation2Params.from_degrees(75, 50, 110)).matrix)
    d = OutcomeDistribution.binary(0.3)
    est = mc_dispersion(4000, d, None, fig5, cfg, counts_for(4000, d))
    exact = dispersion_transformed(4000, d, None, fig5).total
    cells.append(CalibrationCell("dispersion K=2 N=4000 p=0.3 rotated 75/50/110", exact, est))

    u3 = compose(random_factors(3, 3, np.random.default_rng(2024)))
    phases = PhaseVector.from_degrees((0.0, 30.0, 60.0))
    d = OutcomeDistribution((0.2, 0.3, 0.5))
    est = mc_dispersion(1000, d, phases, u3, cfg, counts_for(1000, d))
    exact = dispersion_transformed(1000, d, phases, u3).total
    cells.append(CalibrationCell("dispersion K=3 N=1000 random unitary", exact, est))

    d = OutcomeDistribution((1.0, 0.0, 0.0))
    est = mc_dispersion(1000, d, phases, u3, cfg, counts_for(1000, d))
    exact = dispersion_transformed(1000, d, phases, u3).total
    cells.append(CalibrationCell("dispersion K=3 N=1000 p=(1,0,0) (degenerate)", exact, est))
    return cells
