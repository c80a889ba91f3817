"""Exact binomial, trinomial and small multinomial probabilities.

Binomial weights use the saddle-point form

    log P(l) = d(N) - d(l) - d(N-l) - B(l, Np) - B(N-l, Nq) + 0.5 log(N / (2 pi l (N-l)))

where ``d`` is the Stirling remainder of ``ln n!`` and ``B(x, m) = x ln(x/m) + m - x``
is the deviance term. No large logarithms are subtracted from each other, so
the weights keep close to full double precision at N in the thousands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import DomainError, SizeError

LOG_FLOOR = math.log(1e-300)
PROB_SUM_TOL = 1e-12
ENUMERATION_LIMIT = 10**6
DEFAULT_CUTOFF = 1e-15

_HALF_LOG_2PI = 0.5 * math.log(2.0 * math.pi)


@dataclass(frozen=True)
class OutcomeDistribution:
    """Probabilities p_1..p_K of the K possible outcomes of a single trial."""

    probs: tuple[float, ...]

    def __post_init__(self) -> None:
        probs = tuple(float(p) for p in self.probs)
        object.__setattr__(self, "probs", probs)
        if len(probs) < 2:
            raise DomainError(f"need at least 2 outcomes, got {len(probs)}")
        if any(not (0.0 <= p <= 1.0) for p in probs):
            raise DomainError(f"probabilities must lie in [0, 1]: {probs}")
        if abs(math.fsum(probs) - 1.0) > PROB_SUM_TOL:
            raise DomainError(f"probabilities must sum to 1: {probs}")

    @classmethod
    def uniform(cls, k: int) -> "OutcomeDistribution":
        return cls((1.0 / k,) * k)

    @classmethod
    def binary(cls, p: float) -> "OutcomeDistribution":
        """Two outcomes with probabilities (p, 1 - p)."""
        return cls((p, 1.0 - p))

    @property
    def k(self) -> int:
        return len(self.probs)

    def as_array(self) -> np.ndarray:
        return np.array(self.probs)


@dataclass(frozen=True)
class TrialCounts:
    """Observed counts L_1..L_K of each outcome in ``total`` trials."""

    counts: tuple[int, ...]
    total: int

    def __post_init__(self) -> None:
        counts = tuple(int(c) for c in self.counts)
        object.__setattr__(self, "counts", counts)
        if self.total < 1:
            raise DomainError(f"total must be positive, got {self.total}")
        if any(c < 0 for c in counts):
            raise DomainError(f"counts must be non-negative: {counts}")
        if sum(counts) != self.total:
            raise DomainError(f"counts {counts} do not sum to {self.total}")

    @classmethod
    def from_counts(cls, counts: Sequence[int]) -> "TrialCounts":
        return cls(tuple(counts), int(sum(counts)))

    @property
    def k(self) -> int:
        return len(self.counts)

    def frequencies(self) -> np.ndarray:
        return np.array(self.counts, dtype=float) / self.total

    def check_against(self, dist: OutcomeDistribution) -> None:
        if dist.k != self.k:
            raise DomainError(f"counts have K={self.k}, distribution has K={dist.k}")


@dataclass(frozen=True, eq=False)
class LogFactorialTable:
    """ln(n!) for n = 0..n_max, with the matching Stirling remainders.

    ``stirling[n] = ln(n!) - [(n + 1/2) ln n - n + ln(2 pi)/2]`` for n >= 1,
    and 0 at n = 0 where the expansion is undefined.
    """

    values: np.ndarray
    stirling: np.ndarray

    @property
    def n_max(self) -> int:
        return len(self.values) - 1

    @classmethod
    def build(cls, n_max: int) -> "LogFactorialTable":
        if n_max < 0:
            raise DomainError(f"n_max must be non-negative, got {n_max}")
        values = _log_factorials(n_max)
        stirling = _stirling_remainder(np.arange(n_max + 1))
        values.setflags(write=False)
        stirling.setflags(write=False)
        return cls(values, stirling)

    def log_multinomial(self, counts: Sequence[int]) -> float:
        """ln(N! / (L_1! ... L_K!)) with N = sum(counts)."""
        n = int(sum(counts))
        return float(self.values[n] - math.fsum(self.values[c] for c in counts))


def _log_factorials(n_max: int) -> np.ndarray:
    # extended-precision running sum rounds each entry almost exactly, keeping
    # values[n] - values[n-1] within 1e-12 of ln n up to n ~ 8000
    if np.finfo(np.longdouble).eps < 1e-18:
        logs = np.log(np.arange(1, n_max + 1, dtype=np.longdouble))
        return np.concatenate(([0.0], np.cumsum(logs).astype(float)))
    return gammaln(np.arange(n_max + 1, dtype=float) + 1.0)


def _stirling_remainder(n: np.ndarray) -> np.ndarray:
    out = np.zeros(len(n))
    small = (n >= 1) & (n <= 15)
    for k in n[small]:
        k = int(k)
        out[k] = math.log(math.factorial(k)) - (k + 0.5) * math.log(k) + k - _HALF_LOG_2PI
    big = n > 15
    x = n[big].astype(float)
    nn = x * x
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    # more series terms for smaller n; each branch is accurate to ~1e-16 on its range
    val = np.where(
        x > 500,
        (s0 - s1 / nn) / x,
        np.where(
            x > 80,
            (s0 - (s1 - s2 / nn) / nn) / x,
            np.where(
                x > 35,
                (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / x,
                (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / x,
            ),
        ),
    )
    out[big] = val
    return out


@lru_cache(maxsize=16)
def _table_for(size: int) -> LogFactorialTable:
    return LogFactorialTable.build(size)


def log_factorial_table(n_max: int) -> LogFactorialTable:
    """Shared immutable table covering at least 0..n_max."""
    size = 64
    while size < n_max:
        size *= 2
    return _table_for(size)


def _deviance(x: np.ndarray, m: float) -> np.ndarray:
    """x ln(x/m) + m - x, evaluated without cancellation when x is close to m."""
    x = np.asarray(x, dtype=float)
    d = x - m
    s = x + m
    near = np.abs(d) < 0.1 * s
    out = np.empty_like(x)
    far = ~near
    out[far] = x[far] * np.log(x[far] / m) + m - x[far]
    if near.any():
        xn, dn, sn = x[near], d[near], s[near]
        v = dn / sn
        acc = dn * v
        term = 2.0 * xn * v
        v2 = v * v
        for j in range(1, 16):
            term = term * v2
            acc = acc + term / (2 * j + 1)
        out[near] = acc
    return out


def _check_trials(n: int) -> int:
    if int(n) != n or n < 0:
        raise DomainError(f"trial count must be a non-negative integer, got {n}")
    return int(n)


def _check_prob(p: float) -> float:
    p = float(p)
    if not (0.0 <= p <= 1.0):
        raise DomainError(f"probability must lie in [0, 1], got {p}")
    return p


def _binomial_log_weights(n: int, p: float) -> np.ndarray:
    """log P(L = l) for l = 0..n, with -inf where the weight is exactly 0."""
    logw = np.full(n + 1, -np.inf)
    if p == 0.0:
        logw[0] = 0.0
        return logw
    if p == 1.0:
        logw[n] = 0.0
        return logw
    q = 1.0 - p
    # end points share the same log form so that the p <-> 1-p mirror is exact
    logw[0] = n * math.log(q)
    logw[n] = n * math.log(p)
    if n >= 2:
        table = log_factorial_table(n)
        x = np.arange(1, n)
        y = n - x
        xf = x.astype(float)
        yf = y.astype(float)
        st = table.stirling
        logw[1:n] = (
            st[n]
            - (st[x] + st[y])
            - (_deviance(xf, n * p) + _deviance(yf, n * q))
            + 0.5 * np.log(n / (2.0 * math.pi * (xf * yf)))
        )
    return logw


def _weights_from_logs(logw: np.ndarray) -> np.ndarray:
    w = np.exp(logw)
    w[logw < LOG_FLOOR] = 0.0
    return w


@lru_cache(maxsize=4096)
def _cached_binomial_weights(n: int, p: float) -> np.ndarray:
    w = _weights_from_logs(_binomial_log_weights(n, p))
    w.setflags(write=False)
    return w


def binomial_weights(n: int, p: float) -> np.ndarray:
    """Read-only vector of binomial probabilities P(L = l), l = 0..n."""
    return _cached_binomial_weights(_check_trials(n), _check_prob(p))


def binomial_pmf(n: int, p: float, l: int) -> float:
    """C(n, l) p^l (1-p)^(n-l)."""
    n = _check_trials(n)
    p = _check_prob(p)
    if int(l) != l or not (0 <= l <= n):
        raise DomainError(f"count must satisfy 0 <= l <= {n}, got {l}")
    return float(binomial_weights(n, p)[int(l)])


def binomial_sum(
    n: int, p: float, accept: Callable[[np.ndarray], np.ndarray] | np.ndarray
) -> float:
    """Total binomial probability of the accepted counts.

    ``accept`` is either a boolean mask over l = 0..n or a vectorised
    predicate called once with the integer array ``arange(n + 1)``.
    """
    w = binomial_weights(n, p)
    if callable(accept):
        mask = np.asarray(accept(np.arange(n + 1)), dtype=bool)
    else:
        mask = np.asarray(accept, dtype=bool)
    if mask.shape != w.shape:
        raise DomainError(f"acceptance mask has shape {mask.shape}, expected {w.shape}")
    total = float(np.sum(w[mask]))
    return min(1.0, max(0.0, total))


def binomial_expectation(n: int, p: float, values: np.ndarray) -> float | complex:
    """Sum over l of P(L = l) * values[l]."""
    w = binomial_weights(n, p)
    return np.dot(w, values).item()


def _third_prob(pa: float, pb: float) -> float:
    pc = 1.0 - pa - pb
    if pc < 0.0:
        if pc < -PROB_SUM_TOL:
            raise DomainError(f"p_a + p_b must not exceed 1, got {pa} + {pb}")
        pc = 0.0
    return pc


def trinomial_pmf(n: int, pa: float, pb: float, la, lb):
    """N!/(la! lb! lc!) pa^la pb^lb pc^lc with lc = N-la-lb and pc = 1-pa-pb.

    ``la`` and ``lb`` may be integer arrays; they broadcast against each other.
    """
    n = _check_trials(n)
    pa, pb = _check_prob(pa), _check_prob(pb)
    pc = _third_prob(pa, pb)
    la_arr = np.asarray(la)
    lb_arr = np.asarray(lb)
    if np.any(la_arr < 0) or np.any(lb_arr < 0) or np.any(la_arr + lb_arr > n):
        raise DomainError(f"counts ({la}, {lb}) invalid for N={n}")
    la_arr, lb_arr = np.broadcast_arrays(la_arr.astype(np.int64), lb_arr.astype(np.int64))
    lc_arr = n - la_arr - lb_arr
    v = log_factorial_table(n).values
    logw = v[n] - (v[la_arr] + v[lb_arr] + v[lc_arr])
    zero = np.zeros(logw.shape, dtype=bool)
    for count, prob in ((la_arr, pa), (lb_arr, pb), (lc_arr, pc)):
        if prob == 0.0:
            zero |= count > 0
        else:
            logw = logw + count * math.log(prob)
    w = np.where(zero | (logw < LOG_FLOOR), 0.0, np.exp(np.where(zero, 0.0, logw)))
    return float(w) if w.ndim == 0 else w


def mass_window(w: np.ndarray, tol: float) -> tuple[int, int]:
    """Smallest index range [lo, hi] whose complement carries mass <= tol * total.

    Each tail is trimmed only while its cumulative mass stays within tol/2.
    """
    total = float(np.sum(w))
    if tol <= 0.0 or total == 0.0:
        return 0, len(w) - 1
    budget = 0.5 * tol * total
    left = np.cumsum(w)
    lo = int(np.searchsorted(left, budget, side="right"))
    right = np.cumsum(w[::-1])
    hi = len(w) - 1 - int(np.searchsorted(right, budget, side="right"))
    if lo > hi:
        mode = int(np.argmax(w))
        return mode, mode
    return lo, hi


def trinomial_expectation(
    n: int,
    pa: float,
    pb: float,
    func: Callable[[int, np.ndarray], np.ndarray],
    cutoff: float = 0.0,
) -> float | complex:
    """Sum of P(la, lb) * func(la, lb) over the trinomial law.

    The joint weight is factored as Binom(N, pa)(la) * Binom(N - la, pb/(1-pa))(lb),
    and ``func`` is called once per retained la with the array of lb values.
    With ``cutoff > 0`` outer and inner tails of mass below ``cutoff`` (relative)
    are skipped; the absolute error is then at most 2 * cutoff * max|func|.
    """
    n = _check_trials(n)
    pa, pb = _check_prob(pa), _check_prob(pb)
    _third_prob(pa, pb)
    outer = binomial_weights(n, pa)
    lo, hi = mass_window(outer, cutoff) if cutoff > 0 else (0, n)
    cond = 0.0 if pa == 1.0 else min(1.0, pb / (1.0 - pa))
    acc: float | complex = 0.0
    for la in range(lo, hi + 1):
        wa = outer[la]
        if wa == 0.0:
            continue
        m = n - la
        inner = binomial_weights(m, cond) if m >= 1 else np.ones(1)
        ilo, ihi = mass_window(inner, cutoff) if cutoff > 0 else (0, m)
        lb = np.arange(ilo, ihi + 1)
        acc += wa * np.dot(inner[ilo : ihi + 1], func(la, lb)).item()
    return acc


def composition_count(n: int, k: int) -> int:
    return math.comb(n + k - 1, k - 1)


def compositions(n: int, k: int) -> Iterator[tuple[int, ...]]:
    """All ways of writing n as an ordered sum of k non-negative parts.

    The first part runs from n down to 0, recursively.
    """
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, k - 1):
            yield (first,) + rest


def multinomial_enumerate(
    n: int, dist: OutcomeDistribution
) -> list[tuple[TrialCounts, float]]:
    """Every composition of n into K parts with its multinomial probability."""
    n = _check_trials(n)
    if n < 1:
        raise DomainError("need at least one trial")
    k = dist.k
    size = composition_count(n, k)
    if size > ENUMERATION_LIMIT:
        raise SizeError(f"{size} compositions for N={n}, K={k} exceeds {ENUMERATION_LIMIT}")
    table = log_factorial_table(n)
    logp = [math.log(p) if p > 0.0 else None for p in dist.probs]
    out = []
    for counts in compositions(n, k):
        weight = 0.0
        if all(c == 0 or lp is not None for c, lp in zip(counts, logp)):
            logw = table.log_multinomial(counts) + math.fsum(
                c * lp for c, lp in zip(counts, logp) if c > 0
            )
            weight = math.exp(logw) if logw >= LOG_FLOOR else 0.0
        out.append((TrialCounts(counts, n), weight))
    return out


def enumerate_expectation(
    n: int, dist: OutcomeDistribution, func: Callable[[np.ndarray], complex | float]
) -> complex | float:
    """Expectation of func(counts) over the full multinomial enumeration.

    Brute force; meant for small N as an independent check on the binomial
    reductions used elsewhere.
    """
    terms = [w * func(np.array(c.counts)) for c, w in multinomial_enumerate(n, dist)]
    if any(isinstance(t, complex) for t in terms):
        return complex(math.fsum(t.real for t in terms), math.fsum(t.imag for t in terms))
    return math.fsum(terms)

