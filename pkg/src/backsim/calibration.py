"""Calibrate a mixture of extreme measures to a target correlation matrix.

Any joint law of the form ``P = sum_j w_j P^(j)`` with ``w`` on the simplex
keeps the marginals of the extreme measures ``P^(j)`` and has correlation
matrix ``sum_j w_j C^(j)``.  Calibration therefore reduces to finding a
non-negative ``w`` with ``A w = b, 1'w = 1``, where the columns of ``A`` are
the flattened extreme correlation matrices.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import ejd, lp
from .distributions import DEFAULT_TOL, MixedPoissonDistribution, StructureDistribution, TruncatedPmf

log = logging.getLogger(__name__)

FEASIBILITY_TOL = 1e-9
RESIDUAL_TOL = 1e-7
WEIGHT_FLOOR = 1e-12


class InfeasibleCalibration(lp.Infeasible):
    """No joint law with these marginals has the requested correlation matrix."""

    def __init__(self, message: str, *, pair: tuple[int, int] | None = None,
                 admissible: tuple[float, float] | None = None, row: int | None = None,
                 objective: float = float("nan"), residual=None):
        super().__init__(message, objective=objective, residual=residual)
        self.pair = pair
        self.admissible = admissible
        self.row = row


def flatten(C, *, atol: float = 1e-12) -> np.ndarray:
    """Row-major strict upper triangle of a symmetric unit-diagonal matrix."""
    C = np.asarray(C, dtype=float)
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ValueError("correlation matrix must be square")
    if np.abs(C - C.T).max() > atol:
        raise ValueError("correlation matrix is not symmetric")
    if np.abs(np.diag(C) - 1.0).max() > atol:
        raise ValueError("correlation matrix must have a unit diagonal")
    return C[np.triu_indices(C.shape[0], k=1)]


def unflatten(v, d: int) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if v.size != d * (d - 1) // 2:
        raise ValueError(f"expected {d * (d - 1) // 2} entries for d={d}, got {v.size}")
    C = np.eye(d)
    iu = np.triu_indices(d, k=1)
    C[iu] = v
    C[(iu[1], iu[0])] = v
    return C


def _pair_of_row(row: int, d: int) -> tuple[int, int]:
    iu = np.triu_indices(d, k=1)
    return int(iu[0][row]), int(iu[1][row])


def phase1_solve(A_hat, b_hat, *, tol: float = FEASIBILITY_TOL) -> np.ndarray:
    """Non-negative solution of ``A_hat w = b_hat`` via the phase-1 simplex LP.

    ``A_hat`` is the flattened extreme-correlation matrix with a row of ones
    appended and ``b_hat`` the flattened target with a 1 appended.  Returns
    weights with entries below ``1e-12`` zeroed and the rest renormalized.
    Raises :class:`InfeasibleCalibration` naming the row with the largest
    residual when no solution exists.
    """
    A_hat = np.asarray(A_hat, dtype=float)
    b_hat = np.asarray(b_hat, dtype=float)
    try:
        w = lp.phase1(A_hat, b_hat, tol=tol)
    except lp.Infeasible as exc:
        row = int(np.argmax(np.abs(exc.residual)))
        raise InfeasibleCalibration(
            f"no convex combination of extreme correlations reaches the target "
            f"(phase-1 objective {exc.objective:.3e}; largest residual in row {row})",
            row=row, objective=exc.objective, residual=exc.residual,
        ) from None
    w[w < WEIGHT_FLOOR] = 0.0
    return w / w.sum()


def admissible_range(pmf_k: TruncatedPmf, pmf_l: TruncatedPmf) -> tuple[float, float]:
    """Minimum and maximum attainable correlation between two marginals."""
    co, anti = ejd.enumerate_structures(2)
    c_max = ejd.correlation_matrix(ejd.build_extreme_measure([pmf_k, pmf_l], co))[0, 1]
    c_min = ejd.correlation_matrix(ejd.build_extreme_measure([pmf_k, pmf_l], anti))[0, 1]
    return float(c_min), float(c_max)


@dataclass(frozen=True)
class CalibratedModel:
    """Marginals at the horizon, the extreme measures and their mixture weights."""

    marginals: tuple[MixedPoissonDistribution, ...]
    truncated: tuple[TruncatedPmf, ...]
    measures: tuple[ejd.ExtremeMeasure, ...]
    extreme_corrs: np.ndarray   # (n, d, d)
    weights: np.ndarray         # (n,)
    target: np.ndarray          # (d, d)
    horizon: float
    ranges: np.ndarray | None = None   # (d, d, 2) pairwise admissible (min, max)

    @property
    def d(self) -> int:
        return len(self.marginals)

    @property
    def structures(self) -> list[ejd.MonotonicityStructure]:
        return [m.structure for m in self.measures]

    def mixture_correlation(self) -> np.ndarray:
        return np.einsum("j,jkl->kl", self.weights, self.extreme_corrs)

    def residual(self) -> float:
        return float(np.abs(self.mixture_correlation() - self.target).max())


def _as_marginal(spec, horizon: float) -> MixedPoissonDistribution:
    if isinstance(spec, MixedPoissonDistribution):
        if spec.horizon != horizon:
            raise ValueError("marginal horizon disagrees with the calibration horizon")
        return spec
    if isinstance(spec, StructureDistribution):
        return MixedPoissonDistribution(spec, horizon)
    raise TypeError(f"cannot use {type(spec).__name__} as a marginal")


def calibrate(marginals: Sequence[StructureDistribution | MixedPoissonDistribution],
              target, horizon: float = 1.0, tol: float = DEFAULT_TOL) -> CalibratedModel:
    """Mixture of extreme measures whose terminal correlation matrix is ``target``.

    Marginals are truncated at tail mass ``tol`` before the extreme measures are
    built.  Pairwise admissibility is checked first so an out-of-range entry is
    reported with the offending pair; otherwise the phase-1 LP decides.
    """
    dists = tuple(_as_marginal(m, horizon) for m in marginals)
    d = len(dists)
    target = np.asarray(target, dtype=float)
    if target.shape != (d, d):
        raise ValueError(f"target is {target.shape}, expected ({d}, {d}) for {d} marginals")
    b = flatten(target)
    if np.any(np.abs(b) > 1):
        raise ValueError("correlations must lie in [-1, 1]")

    truncated = tuple(m.truncate(tol) for m in dists)
    for k, pmf in enumerate(truncated):
        if pmf.variance() <= 0:
            raise ValueError(f"marginal {k + 1} is degenerate (zero variance)")

    ranges = np.zeros((d, d, 2))
    for k in range(d):
        ranges[k, k] = (1.0, 1.0)
        for l in range(k + 1, d):
            lo, hi = admissible_range(truncated[k], truncated[l])
            ranges[k, l] = ranges[l, k] = (lo, hi)
            c = target[k, l]
            if c > hi + RESIDUAL_TOL or c < lo - RESIDUAL_TOL:
                raise InfeasibleCalibration(
                    f"target correlation {c:+.6f} for pair ({k + 1},{l + 1}) is outside the "
                    f"admissible range [{lo:+.6f}, {hi:+.6f}]",
                    pair=(k + 1, l + 1), admissible=(lo, hi),
                )

    structures = ejd.enumerate_structures(d)
    measures = tuple(ejd.build_extreme_measure(truncated, e) for e in structures)
    corrs = np.stack([ejd.correlation_matrix(m) for m in measures])
    A = np.stack([flatten(C) for C in corrs], axis=1)
    A_hat = np.vstack([A, np.ones(A.shape[1])])
    b_hat = np.append(b, 1.0)
    try:
        w = phase1_solve(A_hat, b_hat)
    except InfeasibleCalibration as exc:
        if exc.row is not None and exc.row < b.size:
            exc.pair = tuple(x + 1 for x in _pair_of_row(exc.row, d))
            exc.args = (f"{exc.args[0]}; worst pair {exc.pair}",)
        raise
    residual = np.abs(A @ w - b).max() if b.size else 0.0
    if residual > RESIDUAL_TOL:
        raise InfeasibleCalibration(
            f"recovered weights leave residual {residual:.3e} > {RESIDUAL_TOL:.0e}",
            row=int(np.argmax(np.abs(A @ w - b))),
        )
    log.debug("calibrated %d-dim model: %d active measures, residual %.2e",
              d, np.count_nonzero(w), residual)
    return CalibratedModel(dists, truncated, measures, corrs, w, target, float(horizon), ranges)


def sample_joint(model: CalibratedModel, rng: np.random.Generator,
                 size: int | None = None) -> np.ndarray:
    """Draw terminal count vectors from the calibrated mixture.

    First a measure index with probabilities ``weights``, then an inverse-CDF
    draw along that measure's support.  Returns shape ``(d,)`` or ``(size, d)``.
    If the weights carry less than unit mass, the missing mass yields the zero
    vector; a properly calibrated model never does this.
    """
    n = 1 if size is None else int(size)
    u_pick = rng.random(n)
    u_atom = rng.random(n)
    cum = np.cumsum(model.weights)
    if abs(cum[-1] - 1.0) <= 1e-9:
        cum[-1] = 1.0
    choice = np.searchsorted(cum, u_pick, side="right")
    out = np.zeros((n, model.d), dtype=np.int64)
    for j, measure in enumerate(model.measures):
        sel = choice == j
        if model.weights[j] > 0 and sel.any():
            out[sel] = measure.sample(u_atom[sel])
    return out[0] if size is None else out
