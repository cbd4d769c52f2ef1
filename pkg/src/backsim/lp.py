"""Dense tableau simplex with Bland's anti-cycling rule.

Problems here are small (tens of rows, at most a few thousand columns), so a
plain dense tableau is adequate.  Two entry points:

* :func:`phase1` -- find ``x >= 0`` with ``A x = b`` by minimizing the mass
  of artificial variables, starting from ``x = 0, z = |b|``.
* :func:`linprog` -- minimize ``c @ x`` subject to ``A x = b, x >= 0``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PIVOT_TOL = 1e-11
COST_TOL = 1e-12


class Infeasible(ValueError):
    """No non-negative solution of the equality system exists."""

    def __init__(self, message: str, *, objective: float = float("nan"),
                 residual=None):
        super().__init__(message)
        self.objective = objective
        self.residual = residual


class Unbounded(ValueError):
    pass


@dataclass
class _Tableau:
    T: np.ndarray        # constraint rows, then the reduced-cost row; rhs in last column
    basis: np.ndarray    # basic variable index for each constraint row

    @property
    def m(self) -> int:
        return self.T.shape[0] - 1

    def pivot(self, row: int, col: int) -> None:
        T = self.T
        T[row] /= T[row, col]
        factors = T[:, col].copy()
        factors[row] = 0.0
        T -= np.outer(factors, T[row])
        T[:, col] = 0.0
        T[row, col] = 1.0
        self.basis[row] = col

    def run(self, allowed: np.ndarray, max_iter: int) -> None:
        """Pivot to optimality, choosing among columns flagged in ``allowed``."""
        T = self.T
        for _ in range(max_iter):
            costs = T[-1, :-1]
            candidates = np.flatnonzero((costs < -COST_TOL) & allowed)
            if candidates.size == 0:
                return
            col = int(candidates[0])  # Bland: lowest index entering
            column = T[:-1, col]
            rows = np.flatnonzero(column > PIVOT_TOL)
            if rows.size == 0:
                raise Unbounded("objective is unbounded below")
            ratios = T[rows, -1] / column[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, abs(best))]
            row = int(ties[np.argmin(self.basis[ties])])  # Bland: lowest index leaving
            self.pivot(row, col)
        raise RuntimeError(f"simplex did not terminate within {max_iter} pivots")


def _phase1_tableau(A: np.ndarray, b: np.ndarray, max_iter: int) -> _Tableau:
    m, n = A.shape
    sign = np.where(b >= 0, 1.0, -1.0)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A * sign[:, None]
    T[:m, n:n + m] = np.eye(m)
    T[:m, -1] = np.abs(b)
    # reduced costs for objective sum(z) with z basic
    T[-1, :n] = -T[:m, :n].sum(axis=0)
    T[-1, -1] = -T[:m, -1].sum()
    tab = _Tableau(T, np.arange(n, n + m))
    allowed = np.ones(n + m, dtype=bool)
    tab.run(allowed, max_iter)
    return tab


def _basic_solution(tab: _Tableau, n: int) -> np.ndarray:
    x = np.zeros(n)
    for row, var in enumerate(tab.basis):
        if var < n:
            x[var] = tab.T[row, -1]
    return x


def _polish(A: np.ndarray, b: np.ndarray, x: np.ndarray, cols: np.ndarray) -> np.ndarray:
    """Re-solve for the basic columns directly to shed tableau round-off."""
    if cols.size == 0:
        return x
    sol, *_ = np.linalg.lstsq(A[:, cols], b, rcond=None)
    if np.all(sol >= -1e-12):
        refined = np.zeros_like(x)
        refined[cols] = np.maximum(sol, 0.0)
        if np.abs(A @ refined - b).max() <= np.abs(A @ x - b).max():
            return refined
    return x


def phase1(A, b, *, tol: float = 1e-9, max_iter: int = 100_000) -> np.ndarray:
    """Return some ``x >= 0`` with ``A x = b`` or raise :class:`Infeasible`.

    The auxiliary problem ``min 1'z  s.t.  A x + E z = b, (x, z) >= 0`` with
    ``E = diag(sign(b))`` is solved from the start ``x = 0, z = |b|``.  The
    system is declared infeasible when the optimal artificial mass exceeds
    ``tol``.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    tab = _phase1_tableau(A, b, max_iter)
    objective = -tab.T[-1, -1]
    x = _basic_solution(tab, n)
    residual = A @ x - b
    if objective > tol:
        raise Infeasible(
            f"phase-1 optimum {objective:.3e} exceeds tolerance {tol:.0e}",
            objective=objective, residual=residual,
        )
    cols = np.array([v for v in tab.basis if v < n], dtype=int)
    return _polish(A, b, x, cols)


@dataclass
class LPResult:
    x: np.ndarray
    fun: float


def linprog(c, A, b, *, maximize: bool = False, max_iter: int = 100_000) -> LPResult:
    """Solve ``min (or max) c @ x  s.t.  A x = b, x >= 0`` by two-phase simplex.

    Redundant equality rows (as in transportation problems, where the row and
    column sums share one dependency) are detected after phase 1 and dropped.
    """
    c = np.asarray(c, dtype=float)
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    cost = -c if maximize else c
    tab = _phase1_tableau(A, b, max_iter)
    if -tab.T[-1, -1] > 1e-9:
        raise Infeasible("equality constraints admit no non-negative solution",
                         objective=-tab.T[-1, -1])

    # drive artificial variables out of the basis; rows where that is
    # impossible are linearly dependent and can be discarded
    keep = []
    for row in range(m):
        if tab.basis[row] >= n:
            entries = np.flatnonzero(np.abs(tab.T[row, :n]) > 1e-9)
            if entries.size == 0:
                continue
            tab.pivot(row, int(entries[0]))
        keep.append(row)
    rows = keep + [m]
    T = np.hstack([tab.T[rows, :n], tab.T[rows, -1:]])
    basis = tab.basis[keep].copy()
    T[-1, :] = 0.0
    T[-1, :n] = cost
    for i, var in enumerate(basis):
        T[-1] -= cost[var] * T[i]
    phase2 = _Tableau(T, basis)
    phase2.run(np.ones(n, dtype=bool), max_iter)
    x = np.zeros(n)
    for i, var in enumerate(phase2.basis):
        x[var] = phase2.T[i, -1]
    fun = float(c @ x)
    return LPResult(x=x, fun=fun)


def transport_extreme(p, q, *, maximize: bool) -> LPResult:
    """Extremize ``E[X Y] = sum i j P_ij`` over couplings of pmfs ``p`` and ``q``."""
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    n1, n2 = p.size, q.size
    A = np.zeros((n1 + n2, n1 * n2))
    for i in range(n1):
        A[i, i * n2:(i + 1) * n2] = 1.0
    for j in range(n2):
        A[n1 + j, j::n2] = 1.0
    c = np.outer(np.arange(n1), np.arange(n2)).ravel().astype(float)
    return linprog(c, A, np.concatenate([p, q]), maximize=maximize)
