"""Structure distributions and mixed Poisson count laws.

A mixed Poisson process draws its intensity once, at time zero, from a
*structure distribution* and then runs as an ordinary Poisson process. Three
structure distributions are supported:

* :class:`Degenerate` -- a fixed intensity (plain Poisson process),
* :class:`Gamma` -- gamma-distributed intensity (negative binomial process),
* :class:`FiniteDiscrete` -- a finite mixture of intensities.

:class:`MixedPoissonDistribution` is the count law at a fixed horizon.  All
"infinite" sums downstream operate on a :class:`TruncatedPmf`, which keeps the
neglected tail mass explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy import special, stats

DEFAULT_TOL = 1e-12


class StructureDistribution:
    """Base class for intensity mixing laws."""

    def mean(self) -> float:
        raise NotImplementedError

    def variance(self) -> float:
        raise NotImplementedError

    def logpmf(self, k, t: float) -> np.ndarray:
        """Log-probability of ``k`` events in ``[0, t]``."""
        raise NotImplementedError

    def sf(self, k, t: float) -> np.ndarray:
        """``P(X_t > k)``."""
        raise NotImplementedError

    def cdf(self, k, t: float) -> np.ndarray:
        raise NotImplementedError

    def mgf(self, z, t: float):
        """Generating function ``E[z ** X_t]`` for ``|z| <= 1``."""
        raise NotImplementedError


def _check_positive(name: str, value: float) -> None:
    if not (np.isfinite(value) and value > 0):
        raise ValueError(f"{name} must be a finite positive number, got {value!r}")


def _poisson_logpmf(k, mu):
    k = np.asarray(k, dtype=float)
    return special.xlogy(k, mu) - mu - special.gammaln(k + 1.0)


@dataclass(frozen=True)
class Degenerate(StructureDistribution):
    """Fixed intensity ``rate``: the ordinary Poisson process."""

    rate: float

    def __post_init__(self):
        _check_positive("rate", self.rate)

    def mean(self) -> float:
        return float(self.rate)

    def variance(self) -> float:
        return 0.0

    def logpmf(self, k, t):
        return _poisson_logpmf(k, self.rate * t)

    def sf(self, k, t):
        return stats.poisson.sf(k, self.rate * t)

    def cdf(self, k, t):
        return stats.poisson.cdf(k, self.rate * t)

    def mgf(self, z, t):
        return np.exp(self.rate * t * (np.asarray(z, dtype=float) - 1.0))


@dataclass(frozen=True)
class Gamma(StructureDistribution):
    """Gamma intensity with shape ``r`` and rate ``b``.

    The resulting count at time ``t`` is negative binomial with generating
    function ``(b / (b + t (1 - z))) ** r``.
    """

    shape: float
    rate: float

    def __post_init__(self):
        _check_positive("shape", self.shape)
        _check_positive("rate", self.rate)

    def mean(self) -> float:
        return self.shape / self.rate

    def variance(self) -> float:
        return self.shape / self.rate**2

    def _success(self, t):
        # scipy's nbinom(n=r, p) counts failures before the r-th success
        return self.rate / (self.rate + t)

    def logpmf(self, k, t):
        k = np.asarray(k, dtype=float)
        r, b = self.shape, self.rate
        return (
            special.gammaln(k + r)
            - special.gammaln(r)
            - special.gammaln(k + 1.0)
            + r * (math.log(b) - math.log(b + t))
            + special.xlogy(k, t / (b + t))
        )

    def sf(self, k, t):
        return stats.nbinom.sf(k, self.shape, self._success(t))

    def cdf(self, k, t):
        return stats.nbinom.cdf(k, self.shape, self._success(t))

    def mgf(self, z, t):
        z = np.asarray(z, dtype=float)
        return (self.rate / (self.rate + t * (1.0 - z))) ** self.shape


@dataclass(frozen=True)
class FiniteDiscrete(StructureDistribution):
    """Intensity taking value ``rates[i]`` with probability ``weights[i]``."""

    rates: tuple[float, ...]
    weights: tuple[float, ...]

    def __post_init__(self):
        rates = tuple(float(r) for r in self.rates)
        weights = tuple(float(w) for w in self.weights)
        if not rates or len(rates) != len(weights):
            raise ValueError("rates and weights must be non-empty and of equal length")
        for r in rates:
            _check_positive("rate", r)
        if any(w < 0 or not np.isfinite(w) for w in weights):
            raise ValueError("mixture weights must be non-negative")
        if abs(sum(weights) - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {sum(weights)!r}, expected 1")
        object.__setattr__(self, "rates", rates)
        object.__setattr__(self, "weights", weights)

    @classmethod
    def from_atoms(cls, atoms: Sequence[tuple[float, float]]) -> "FiniteDiscrete":
        rates, weights = zip(*atoms)
        return cls(tuple(rates), tuple(weights))

    def mean(self) -> float:
        return float(np.dot(self.weights, self.rates))

    def variance(self) -> float:
        rates = np.asarray(self.rates)
        return float(np.dot(self.weights, (rates - self.mean()) ** 2))

    def logpmf(self, k, t):
        k = np.asarray(k, dtype=float)
        terms = [math.log(w) + _poisson_logpmf(k, r * t)
                 for r, w in zip(self.rates, self.weights) if w > 0]
        return special.logsumexp(np.stack(terms), axis=0)

    def sf(self, k, t):
        return sum(w * stats.poisson.sf(k, r * t) for r, w in zip(self.rates, self.weights))

    def cdf(self, k, t):
        return sum(w * stats.poisson.cdf(k, r * t) for r, w in zip(self.rates, self.weights))

    def mgf(self, z, t):
        z = np.asarray(z, dtype=float)
        return sum(w * np.exp(r * t * (z - 1.0)) for r, w in zip(self.rates, self.weights))


def nb_from_mean_variance(mean: float, variance: float, horizon: float = 1.0) -> Gamma:
    """Gamma structure whose count at ``horizon`` has the given mean and variance.

    Matches ``r T / b = mean`` and ``r T / b + r T**2 / b**2 = variance``.
    """
    _check_positive("mean", mean)
    _check_positive("horizon", horizon)
    if not variance > mean:
        raise ValueError(
            f"negative binomial needs variance > mean (overdispersion); got mean={mean}, "
            f"variance={variance}. Use a Poisson marginal when variance == mean."
        )
    excess = variance - mean
    return Gamma(shape=mean**2 / excess, rate=mean * horizon / excess)


@dataclass(frozen=True)
class TruncatedPmf:
    """Probabilities on ``0..K`` plus the mass of the neglected tail ``{K+1, ...}``."""

    probs: np.ndarray
    tail_mass: float = 0.0

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float)
        probs.setflags(write=False)
        if probs.ndim != 1 or probs.size == 0:
            raise ValueError("probs must be a non-empty 1-d sequence")
        if np.any(probs < 0):
            raise ValueError("probabilities must be non-negative")
        if not 0.0 <= self.tail_mass < 1.0:
            raise ValueError(f"tail_mass must lie in [0, 1), got {self.tail_mass}")
        if abs(probs.sum() + self.tail_mass - 1.0) > 1e-12:
            raise ValueError(
                f"probs sum to {probs.sum()!r} with tail {self.tail_mass!r}; expected 1"
            )
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "tail_mass", float(self.tail_mass))

    @classmethod
    def from_probs(cls, probs) -> "TruncatedPmf":
        """A finitely supported pmf, renormalized so the tail is empty."""
        probs = np.asarray(probs, dtype=float)
        return cls(probs / probs.sum(), 0.0)

    @property
    def K(self) -> int:
        return self.probs.size - 1

    @property
    def support(self) -> np.ndarray:
        return np.arange(self.probs.size)

    def cdf(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def mean(self) -> float:
        return float(self.support @ self.probs / self.probs.sum())

    def variance(self) -> float:
        p = self.probs / self.probs.sum()
        k = self.support
        return float(p @ k**2 - (p @ k) ** 2)

    def pgf(self, z):
        """``sum_k probs[k] * z**k`` over the stored support."""
        z = np.asarray(z, dtype=float)
        return np.polynomial.polynomial.polyval(z, self.probs)


@dataclass(frozen=True)
class MixedPoissonDistribution:
    """Law of ``X_t`` for a mixed Poisson process with the given structure."""

    structure: StructureDistribution
    horizon: float = 1.0
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        _check_positive("horizon", self.horizon)

    def mean(self) -> float:
        return self.structure.mean() * self.horizon

    def variance(self) -> float:
        t = self.horizon
        return self.structure.mean() * t + self.structure.variance() * t**2

    def pmf(self, k):
        k = np.asarray(k)
        if np.any(k < 0):
            raise ValueError("k must be non-negative")
        return np.exp(self.structure.logpmf(k, self.horizon))

    def cdf(self, k):
        return self.structure.cdf(k, self.horizon)

    def sf(self, k):
        return self.structure.sf(k, self.horizon)

    def mgf(self, z):
        z = np.asarray(z, dtype=float)
        if np.any(np.abs(z) > 1):
            raise ValueError("mgf is defined here for |z| <= 1")
        return self.structure.mgf(z, self.horizon)

    def _initial_bound(self) -> int:
        return int(self.mean() + 20.0 * math.sqrt(self.variance()) + 20)

    def quantile(self, u):
        """Smallest ``k`` with ``cdf(k) > u``; ``u`` must lie in ``[0, 1)``."""
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u >= 1)) or np.any(np.isnan(u)):
            raise ValueError("quantile level must lie in [0, 1)")
        bound = self._initial_bound()
        while True:
            cdf = self.cdf(np.arange(bound + 1))
            if cdf[-1] > np.max(u):
                break
            bound *= 2
        out = np.searchsorted(cdf, u, side="right")
        return int(out) if out.ndim == 0 else out

    def truncate(self, tol: float = DEFAULT_TOL) -> TruncatedPmf:
        """Probabilities on ``0..K`` for the smallest ``K`` with ``P(X > K) <= tol``."""
        if not 0.0 < tol < 1.0:
            raise ValueError("tol must lie in (0, 1)")
        key = ("truncate", tol)
        if key not in self._cache:
            bound = self._initial_bound()
            while True:
                sf = self.sf(np.arange(bound + 1))
                hits = np.flatnonzero(sf <= tol)
                if hits.size:
                    break
                bound *= 2
            K = int(hits[0])
            probs = self.pmf(np.arange(K + 1))
            tail = float(sf[K])
            # absorb last-ulp disagreement between the pmf and scipy's sf
            tail = min(max(tail, 0.0), tol)
            probs = probs * ((1.0 - tail) / probs.sum())
            self._cache[key] = TruncatedPmf(probs, tail)
        return self._cache[key]


def thin_pmf(p: TruncatedPmf, x: float) -> TruncatedPmf:
    """Binomial thinning: keep each of ``N ~ p`` events independently w.p. ``x``.

    ``q_k = sum_m p_{k+m} C(k+m, k) x**k (1-x)**m``, so the generating function
    of ``q`` is ``p_hat(1 - x + x z)``.  The tail mass of ``p`` is carried over
    unchanged since its thinned location is unknown.
    """
    if not 0.0 <= x <= 1.0:
        raise ValueError("thinning probability must lie in [0, 1]")
    n = np.arange(p.probs.size, dtype=float)
    k = n[:, None]
    with np.errstate(invalid="ignore"):
        log_binom = (special.gammaln(n + 1) - special.gammaln(k + 1)
                     - special.gammaln(n - k + 1))
        log_w = log_binom + special.xlogy(k, x) + special.xlog1py(n - k, -x)
    weights = np.where(k <= n, np.exp(log_w), 0.0)
    q = weights @ p.probs
    return TruncatedPmf(q, p.tail_mass)


def split_pmf(p: TruncatedPmf, x1: float, x2: float) -> np.ndarray:
    """Joint pmf of event counts falling into two disjoint sub-intervals.

    Each of ``N ~ p`` events lands in the first interval w.p. ``x1``, in the
    second w.p. ``x2`` and elsewhere otherwise (multinomial given ``N``).
    Returns ``P[k1, k2]`` for ``k1, k2 <= K``.
    """
    if x1 < 0 or x2 < 0 or x1 + x2 > 1 + 1e-15:
        raise ValueError("fractions must be non-negative and sum to at most 1")
    y = max(0.0, 1.0 - x1 - x2)
    K = p.K
    k1 = np.arange(K + 1, dtype=float)[:, None]
    k2 = np.arange(K + 1, dtype=float)[None, :]
    out = np.zeros((K + 1, K + 1))
    for total in range(K + 1):
        rest = total - k1 - k2
        valid = rest >= 0
        with np.errstate(invalid="ignore"):
            log_m = (special.gammaln(total + 1) - special.gammaln(k1 + 1)
                     - special.gammaln(k2 + 1) - special.gammaln(rest + 1)
                     + special.xlogy(k1, x1) + special.xlogy(k2, x2)
                     + special.xlogy(rest, y))
        out += np.where(valid, np.exp(np.where(valid, log_m, -np.inf)), 0.0) * p.probs[total]
    return out
