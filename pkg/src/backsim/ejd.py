"""Extreme joint distributions with given discrete marginals.

For a monotonicity structure ``e`` (bit ``e_k = 0``: coordinate ``k`` moves
with coordinate 1, bit ``1``: against it) the extreme measure puts mass

    P[i_1, ..., i_d] = [min_k Fbar_k(i_k - e_k; e_k) - max_k Fbar_k(i_k + e_k - 1; e_k)]^+

with ``Fbar_k(i; 0) = F_k(i)`` and ``Fbar_k(i; 1) = 1 - F_k(i)``.  Each
bracket is the overlap of one interval per coordinate on the unit interval,
so the support is the set of vectors obtained by walking all marginal CDF
breakpoints in increasing order: a monotone path of length at most
``sum_k (K_k + 1) - (d - 1)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .distributions import TruncatedPmf

MAX_DIM = 12
DUST = 1e-14


@dataclass(frozen=True)
class MonotonicityStructure:
    bits: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bits)
        if len(bits) < 2:
            raise ValueError("a monotonicity structure needs at least two coordinates")
        if bits[0] != 0 or any(b not in (0, 1) for b in bits):
            raise ValueError(f"bits must be binary with a leading 0, got {bits}")
        object.__setattr__(self, "bits", bits)

    @property
    def d(self) -> int:
        return len(self.bits)

    def comonotone(self, k: int, l: int) -> bool:
        return self.bits[k] == self.bits[l]

    def __str__(self) -> str:
        return "".join(map(str, self.bits))


def enumerate_structures(d: int) -> list[MonotonicityStructure]:
    """All ``2**(d-1)`` structures with ``e_1 = 0``, in lexicographic order."""
    if not 2 <= d <= MAX_DIM:
        raise ValueError(f"dimension must lie in [2, {MAX_DIM}], got {d}")
    return [MonotonicityStructure((0,) + tail)
            for tail in itertools.product((0, 1), repeat=d - 1)]


@dataclass(frozen=True)
class ExtremeMeasure:
    """A monotone joint pmf given by its support path and atom probabilities."""

    support: np.ndarray      # (n_atoms, d) integer index vectors
    probs: np.ndarray        # (n_atoms,) strictly positive
    structure: MonotonicityStructure
    tail_mass: float = 0.0   # mass lost to marginal truncation and dropped dust

    def __post_init__(self):
        for name in ("support", "probs"):
            getattr(self, name).setflags(write=False)

    @property
    def d(self) -> int:
        return self.support.shape[1]

    @property
    def cum(self) -> np.ndarray:
        return np.cumsum(self.probs)

    def marginal(self, k: int, size: int | None = None) -> np.ndarray:
        """Mass of the measure projected onto coordinate ``k``."""
        idx = self.support[:, k]
        return np.bincount(idx, weights=self.probs, minlength=size or idx.max() + 1)

    def sample(self, u):
        """Inverse-CDF draw along the support path.

        Returns ``support[k]`` for ``k = min{k : cum[k] > u}``.  Levels beyond
        the total stored mass map to the last support point.
        """
        u = np.asarray(u, dtype=float)
        if np.any((u < 0) | (u >= 1)):
            raise ValueError("uniform level must lie in [0, 1)")
        idx = np.minimum(np.searchsorted(self.cum, u, side="right"), len(self.probs) - 1)
        return self.support[idx]


def _edges(pmf: TruncatedPmf, bit: int) -> tuple[np.ndarray, np.ndarray]:
    """Increasing breakpoints on [0, 1] and the marginal index of each segment."""
    p = pmf.probs
    K = p.size - 1
    if bit == 0:
        edges = np.concatenate([[0.0], np.cumsum(p)])
        index = np.arange(K + 1)
    else:
        # walk the support from K downward: u in (1 - F(i), 1 - F(i-1)] -> i
        edges = pmf.tail_mass + np.concatenate([[0.0], np.cumsum(p[::-1])])
        index = np.arange(K, -1, -1)
    return edges, index


def build_extreme_measure(marginals: Sequence[TruncatedPmf],
                          structure: MonotonicityStructure) -> ExtremeMeasure:
    """Extreme measure for ``structure`` by sweeping the merged CDF breakpoints.

    Tied breakpoints across coordinates collapse to a single cut, so every
    emitted atom has positive mass.  Atoms lighter than ``1e-14`` are dropped
    and their mass is reported in ``tail_mass``.
    """
    if len(marginals) != structure.d:
        raise ValueError(f"{len(marginals)} marginals for a {structure.d}-dim structure")
    per_coord = [_edges(m, b) for m, b in zip(marginals, structure.bits)]
    lo = max(e[0] for e, _ in per_coord)
    hi = min(e[-1] for e, _ in per_coord)
    cuts = np.unique(np.concatenate([e for e, _ in per_coord] + [[lo, hi]]))
    cuts = cuts[(cuts >= lo) & (cuts <= hi)]
    widths = np.diff(cuts)
    mids = 0.5 * (cuts[1:] + cuts[:-1])
    keep = widths >= DUST
    widths, mids = widths[keep], mids[keep]
    support = np.empty((mids.size, structure.d), dtype=np.int64)
    for k, (edges, index) in enumerate(per_coord):
        seg = np.searchsorted(edges, mids, side="right") - 1
        support[:, k] = index[seg]
    tail = max(0.0, 1.0 - widths.sum())
    return ExtremeMeasure(support, widths, structure, tail)


def closed_form_probability(marginals: Sequence[TruncatedPmf],
                            structure: MonotonicityStructure,
                            index: Sequence[int]) -> float:
    """Evaluate the bracketed min/max expression for one index vector directly."""
    upper, lower = [], []
    for pmf, bit, i in zip(marginals, structure.bits, index):
        F = np.concatenate([[0.0], np.cumsum(pmf.probs)])  # F[i + 1] = F(i)

        def fbar(j, bit=bit, F=F):
            j = min(max(j, -1), len(F) - 2)
            value = F[j + 1]
            return value if bit == 0 else 1.0 - value

        upper.append(fbar(i - bit))
        lower.append(fbar(i + bit - 1))
    return max(0.0, min(upper) - max(lower))


def correlation_matrix(measure: ExtremeMeasure) -> np.ndarray:
    """Exact Pearson correlation matrix of the measure (normalized to unit mass)."""
    w = measure.probs / measure.probs.sum()
    X = measure.support.astype(float)
    mu = w @ X
    centered = X - mu
    cov = centered.T @ (centered * w[:, None])
    sd = np.sqrt(np.diag(cov))
    if np.any(sd <= 0):
        raise ValueError("correlation undefined: a marginal has zero variance")
    C = cov / np.outer(sd, sd)
    C = np.clip(0.5 * (C + C.T), -1.0, 1.0)
    np.fill_diagonal(C, 1.0)
    return C


def product_moment(measure: ExtremeMeasure, k: int = 0, l: int = 1) -> float:
    """``E[X_k X_l]`` under the stored atoms."""
    s = measure.support
    return float(measure.probs @ (s[:, k] * s[:, l]))
