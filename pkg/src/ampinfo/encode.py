"""Scalar encodings of an observed relative frequency and their bit credibility.

Three encodings of nu = L/N are compared:

* ``FREQUENCY``  nu itself
* ``AMPLITUDE``  sqrt(nu)
* ``ARCSINE``    arcsin(2 nu - 1) / pi + 1/2

The S leading bits of an encoded value are trusted when it lies closer than
2**-(S+1) to the encoding of the true probability.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .dist import binomial_weights
from .errors import DomainError

ARCSINE_CLAMP_TOL = 1e-12


class EncodingKind(enum.Enum):
    FREQUENCY = "frequency"
    AMPLITUDE = "amplitude"
    ARCSINE = "arcsine"


@dataclass(frozen=True)
class BitBudget:
    bits: int

    def __post_init__(self) -> None:
        if int(self.bits) != self.bits or self.bits < 1:
            raise DomainError(f"bit budget must be a positive integer, got {self.bits}")

    @property
    def radius(self) -> float:
        """Half the value of the last kept bit, 2**-(S+1)."""
        return 2.0 ** -(self.bits + 1)


@dataclass(frozen=True)
class ProbabilityCurve:
    grid: np.ndarray
    values: np.ndarray
    trials: int
    bits: int
    kind: EncodingKind

    def __post_init__(self) -> None:
        if len(self.grid) != len(self.values):
            raise DomainError("grid and values differ in length")

    def __len__(self) -> int:
        return len(self.grid)


def _as_budget(bits: int | BitBudget) -> BitBudget:
    return bits if isinstance(bits, BitBudget) else BitBudget(bits)


def _arcsine(nu: np.ndarray) -> np.ndarray:
    arg = 2.0 * nu - 1.0
    if np.any(np.abs(arg) > 1.0 + ARCSINE_CLAMP_TOL):
        raise DomainError("arcsine argument outside [-1, 1]")
    return np.arcsin(np.clip(arg, -1.0, 1.0)) / math.pi + 0.5


def encode_value(kind: EncodingKind, nu):
    """Encode relative frequencies in [0, 1]; scalars and arrays both work."""
    arr = np.asarray(nu, dtype=float)
    if np.any((arr < 0.0) | (arr > 1.0)) or np.any(np.isnan(arr)):
        raise DomainError(f"relative frequency must lie in [0, 1], got {nu}")
    if kind is EncodingKind.FREQUENCY:
        out = arr.copy()
    elif kind is EncodingKind.AMPLITUDE:
        out = np.sqrt(arr)
    elif kind is EncodingKind.ARCSINE:
        out = _arcsine(arr)
    else:
        raise DomainError(f"unknown encoding {kind!r}")
    return float(out) if out.ndim == 0 else out


def encode_limit(kind: EncodingKind, p):
    """The value the encoding approaches after infinitely many trials."""
    return encode_value(kind, p)


def decode_arcsine(x):
    """Inverse of the arcsine encoding, p = sin^2(pi x / 2)."""
    out = np.sin(0.5 * math.pi * np.asarray(x, dtype=float)) ** 2
    return float(out) if out.ndim == 0 else out


def sigma_nu(p: float, n: int) -> float:
    """Standard deviation of the relative frequency after n trials."""
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    if n < 1:
        raise DomainError(f"trial count must be positive, got {n}")
    return math.sqrt(p * (1.0 - p) / n)


def arcsine_scale_constant() -> float:
    """The constant c in sigma_chi / sigma_nu = c / sqrt(p(1-p)).

    d chi / d nu = 1 / (pi sqrt(nu (1 - nu))), so mapping [0, 1] onto [0, 1]
    forces c = 1/pi and sigma_chi ~ 1 / (pi sqrt(N)) for every p.
    """
    return 1.0 / math.pi


def prob_bits_correct(kind: EncodingKind, n: int, p: float, bits: int | BitBudget) -> float:
    """Probability that n trials give an encoded value within 2**-(S+1) of the limit."""
    budget = _as_budget(bits)
    if n < 1:
        raise DomainError(f"trial count must be positive, got {n}")
    w = binomial_weights(n, p)
    encoded = encode_value(kind, np.arange(n + 1) / n)
    accept = np.abs(encoded - encode_limit(kind, p)) < budget.radius
    return min(1.0, float(np.sum(w[accept])))


def default_grid(points: int = 199, include_endpoints: bool = False) -> np.ndarray:
    """Equally spaced p = k/(points+1), k = 1..points, optionally with 0 and 1."""
    if points < 1:
        raise DomainError(f"need at least one grid point, got {points}")
    grid = np.arange(1, points + 1) / (points + 1)
    if include_endpoints:
        grid = np.concatenate(([0.0], grid, [1.0]))
    return grid


def _check_grid(grid) -> np.ndarray:
    g = np.asarray(grid, dtype=float)
    if g.ndim != 1 or len(g) == 0:
        raise DomainError("grid must be a non-empty 1-d sequence")
    if np.any(np.diff(g) <= 0):
        raise DomainError("grid must be strictly increasing")
    if g[0] < 0.0 or g[-1] > 1.0:
        raise DomainError("grid values must lie in [0, 1]")
    return g


def prob_curve(
    kind: EncodingKind, n: int, bits: int | BitBudget, grid=None
) -> ProbabilityCurve:
    budget = _as_budget(bits)
    g = default_grid() if grid is None else _check_grid(grid)
    values = np.array([prob_bits_correct(kind, n, p, budget) for p in g])
    return ProbabilityCurve(g, values, n, budget.bits, kind)


def info_content(k: int, bits: int | BitBudget) -> int:
    """Bits needed for K-component amplitudes known to S bits each, phases unknown."""
    if k < 2:
        raise DomainError(f"need at least 2 outcomes, got {k}")
    return (k - 1) * _as_budget(bits).bits
