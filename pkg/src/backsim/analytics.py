"""Correlation structure in time: closed forms and Monte Carlo estimators.

Under Backward Simulation on ``[0, T]`` the covariance scales as
``Cov(X_t, Y_t) = (t/T)**2 Cov(X_T, Y_T)``, so

    rho(t) = rho(T) * Z(T) / Z(t),   Z(t) = sd(X_t) sd(Y_t) / t**2.

Under Forward Continuation, at ``t = mT + tau``,

    rho(t) = rho(T) (m + tau**2/T**2) sd(X_T) sd(Y_T)
             / (sqrt(m var(X_T) + var(X_tau)) sqrt(m var(Y_T) + var(Y_tau))).
"""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import stats

from .distributions import MixedPoissonDistribution, StructureDistribution, TruncatedPmf

log = logging.getLogger(__name__)


def _structure(marginal) -> StructureDistribution:
    return marginal.structure if isinstance(marginal, MixedPoissonDistribution) else marginal


def count_variance(marginal, t: float) -> float:
    """``var(X_t) = mean(lambda) t + var(lambda) t**2``."""
    s = _structure(marginal)
    return s.mean() * t + s.variance() * t**2


def z_function(marginal, t: float) -> float:
    """Per-marginal factor ``sd(X_t) / t`` of the auxiliary function ``Z``."""
    if t <= 0:
        raise ValueError("Z(t) is singular at t <= 0")
    return math.sqrt(count_variance(marginal, t)) / t


def rho_bs(t: float, T: float, rho_T: float, marginal_k, marginal_l) -> float:
    """Correlation at ``0 < t <= T`` of a pair generated by Backward Simulation."""
    if t <= 0:
        raise ValueError("correlation is undefined at t <= 0")
    if t > T * (1 + 1e-12):
        raise ValueError(f"t={t} lies beyond the simulation horizon T={T}")
    ratio = (z_function(marginal_k, T) * z_function(marginal_l, T)
             / (z_function(marginal_k, t) * z_function(marginal_l, t)))
    return rho_T * ratio


def rho_fc(m: int, tau: float, T: float, rho_T: float, marginal_k, marginal_l) -> float:
    """Correlation at ``mT + tau`` under Forward Continuation."""
    if m < 0:
        raise ValueError("period index must be non-negative")
    if not 0 <= tau <= T:
        raise ValueError("tau must lie in [0, T]")
    if m == 0:
        return rho_bs(tau, T, rho_T, marginal_k, marginal_l)
    vk_T, vl_T = count_variance(marginal_k, T), count_variance(marginal_l, T)
    vk_tau, vl_tau = count_variance(marginal_k, tau), count_variance(marginal_l, tau)
    scale = m + (tau / T) ** 2
    return (rho_T * scale * math.sqrt(vk_T * vl_T)
            / (math.sqrt(m * vk_T + vk_tau) * math.sqrt(m * vl_T + vl_tau)))


def rho_theoretical(t: float, T: float, rho_T: float, marginal_k, marginal_l) -> float:
    """``rho(t)`` for any ``t > 0``, splitting ``t = mT + tau`` as needed."""
    m = int(math.floor(t / T + 1e-12))
    tau = max(0.0, t - m * T)
    if m >= 1 and tau < 1e-12 * T:
        tau = 0.0
    return rho_fc(m, tau, T, rho_T, marginal_k, marginal_l)


@dataclass(frozen=True)
class CorrelationCurve:
    times: np.ndarray
    theoretical: np.ndarray
    empirical: np.ndarray
    stderr: np.ndarray
    n_paths: int
    pair: tuple[int, int]
    degenerate: np.ndarray   # True where a sample had zero variance

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["time", "rho_theoretical", "rho_empirical", "stderr", "n_paths"])
            for row in zip(self.times, self.theoretical, self.empirical, self.stderr):
                w.writerow([repr(float(x)) for x in row] + [self.n_paths])


def pearson(x, y) -> tuple[float, float]:
    """Sample correlation and its standard error.

    The error comes from the influence function of ``r``, which stays valid
    for skewed, heavy-tailed counts.  The textbook Fisher value
    ``(1 - r**2) / sqrt(n - 3)`` assumes bivariate normality and understates
    the spread of negative binomial counts by about a factor of two.
    Returns ``(nan, nan)`` when either sample is constant.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = x.size
    xc, yc = x - x.mean(), y - y.mean()
    sxx, syy = xc @ xc, yc @ yc
    if sxx == 0 or syy == 0:
        return float("nan"), float("nan")
    r = float(np.clip(xc @ yc / math.sqrt(sxx * syy), -1.0, 1.0))
    if n < 4:
        return r, float("nan")
    xs, ys = xc / math.sqrt(sxx / n), yc / math.sqrt(syy / n)
    influence = xs * ys - 0.5 * r * (xs * xs + ys * ys)
    return r, float(influence.std(ddof=1) / math.sqrt(n))


def empirical_curve(paths, pair: tuple[int, int], times: Sequence[float],
                    theoretical: Sequence[float] | None = None) -> CorrelationCurve:
    """Pearson correlation of cumulative counts of ``pair`` at each time."""
    if paths.n_paths < 2:
        raise ValueError("need at least two paths")
    k, l = pair
    times = np.asarray(times, dtype=float)
    emp = np.empty(times.size)
    se = np.empty(times.size)
    for i, t in enumerate(times):
        X = paths.counts_at(t)
        emp[i], se[i] = pearson(X[:, k], X[:, l])
    degenerate = np.isnan(emp)
    if degenerate.any():
        log.warning("pair %s: zero-variance counts at t=%s; correlation undefined",
                    pair, times[degenerate].tolist())
    theo = (np.full(times.size, np.nan) if theoretical is None
            else np.asarray(theoretical, dtype=float))
    return CorrelationCurve(times, theo, emp, se, paths.n_paths, (k, l), degenerate)


def correlation_curve(model, paths, pair: tuple[int, int],
                      times: Sequence[float]) -> CorrelationCurve:
    """Empirical curve alongside the closed form for the model's target ``rho(T)``."""
    k, l = pair
    T = model.horizon
    rho_T = model.target[k, l]
    mk, ml = model.marginals[k], model.marginals[l]
    theo = [rho_theoretical(t, T, rho_T, mk, ml) if t > 0 else float("nan") for t in times]
    return empirical_curve(paths, pair, times, theo)


def covariance_ratio(x_num, y_num, x_den, y_den) -> tuple[float, float]:
    """``Cov(x_num, y_num) / Cov(x_den, y_den)`` with a delta-method standard error.

    All four arrays are paired observations from the same paths.
    """
    arrays = [np.asarray(a, dtype=float) for a in (x_num, y_num, x_den, y_den)]
    n = arrays[0].size
    a = (arrays[0] - arrays[0].mean()) * (arrays[1] - arrays[1].mean())
    b = (arrays[2] - arrays[2].mean()) * (arrays[3] - arrays[3].mean())
    A, B = a.mean(), b.mean()
    ratio = A / B
    influence = (a - A) / B - A * (b - B) / B**2
    return float(ratio), float(influence.std(ddof=1) / math.sqrt(n))


def ks_uniform_test(samples) -> tuple[float, float]:
    """Kolmogorov-Smirnov statistic and p-value against Uniform[0, 1]."""
    samples = np.asarray(samples, dtype=float)
    if samples.size < 20:
        raise ValueError("KS test needs at least 20 samples")
    res = stats.kstest(samples, "uniform")
    return float(res.statistic), float(res.pvalue)


def ks_uniform(samples) -> float:
    """Kolmogorov-Smirnov p-value of ``samples`` against Uniform[0, 1]."""
    return ks_uniform_test(samples)[1]


def pooled_cells(expected: np.ndarray, min_expected: float = 5.0) -> np.ndarray:
    """Cell labels merging adjacent categories until each expects ``min_expected``."""
    labels = np.empty(expected.size, dtype=np.int64)
    cell, acc = 0, 0.0
    for i, e in enumerate(expected):
        labels[i] = cell
        acc += e
        if acc >= min_expected:
            cell += 1
            acc = 0.0
    if acc < min_expected and cell > 0:
        labels[labels == cell] = cell - 1   # fold the light remainder into its neighbour
    return labels


def chi_square_pmf(samples, pmf) -> float:
    """Pearson chi-square p-value of integer ``samples`` against ``pmf``."""
    return chi_square_test(samples, pmf)[1]


def chi_square_test(samples, pmf) -> tuple[float, float]:
    """Pearson chi-square statistic and p-value of integer ``samples`` against ``pmf``.

    ``pmf`` is a :class:`TruncatedPmf` or probability array on ``0..K``; mass
    beyond ``K`` (including any tail) forms the last category.  Sparse
    categories are pooled so every cell expects at least five counts.
    """
    samples = np.asarray(samples, dtype=np.int64)
    n = samples.size
    if n < 20:
        raise ValueError("chi-square test needs at least 20 samples")
    probs = pmf.probs if isinstance(pmf, TruncatedPmf) else np.asarray(pmf, dtype=float)
    K = probs.size - 1
    probs = np.append(probs, max(0.0, 1.0 - probs.sum()))
    observed = np.bincount(np.minimum(samples, K + 1), minlength=K + 2)
    labels = pooled_cells(n * probs)
    cells = labels.max() + 1
    if cells < 2:
        raise ValueError("too few samples: fewer than two cells expect five counts")
    obs = np.bincount(labels, weights=observed, minlength=cells)
    exp = np.bincount(labels, weights=n * probs, minlength=cells)
    exp *= n / exp.sum()
    res = stats.chisquare(obs, exp)
    return float(res.statistic), float(res.pvalue)
