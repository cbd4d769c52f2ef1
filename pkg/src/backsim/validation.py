"""Statistical self-checks of a calibrated scenario.

Each check returns a :class:`CheckResult`; :func:`run_checks` bundles the
four standard ones: uniformity of arrival times, terminal marginals, the
extreme-measure/LP equivalence and the forward-coupled correlation bound.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass

import numpy as np

from . import analytics, ejd, lp
from .calibration import CalibratedModel, calibrate
from .distributions import TruncatedPmf
from .scenario import Scenario
from .simulation import SimulationConfig, forward_comonotone_counts, make_rng, simulate

ALPHA = 0.01


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    statistic: float
    threshold: float
    p_value: float = float("nan")
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        if math.isnan(self.p_value):
            test = f"statistic={self.statistic:.6g} threshold={self.threshold:.6g}"
        else:
            test = f"statistic={self.statistic:.6g} p={self.p_value:.4g} alpha={self.threshold:.6g}"
        return f"[{status}] {self.name}: {test} {self.detail}".rstrip()


def check_uniform_arrivals(paths, k: int) -> CheckResult:
    stat, p = analytics.ks_uniform_test(paths.normalized_arrivals(k))
    return CheckResult(f"ks_uniform[{k + 1}]", p > ALPHA, stat, ALPHA, p,
                       "arrival times within each period vs Uniform(0,1)")


def check_marginal(paths, pmf: TruncatedPmf, k: int) -> CheckResult:
    draws = paths.counts[:, :, k].ravel()
    stat, p = analytics.chi_square_test(draws, pmf)
    return CheckResult(f"chi_square_marginal[{k + 1}]", p > ALPHA, stat, ALPHA, p,
                       "period counts vs marginal pmf")


def check_lp_oracle(rng: np.random.Generator, pairs: int = 20, atoms: int = 8,
                    tol: float = 1e-9) -> CheckResult:
    worst = 0.0
    co, anti = ejd.enumerate_structures(2)
    for _ in range(pairs):
        pmfs = [TruncatedPmf.from_probs(rng.dirichlet(np.ones(rng.integers(2, atoms + 1))))
                for _ in range(2)]
        for e, maximize in ((co, True), (anti, False)):
            closed = ejd.product_moment(ejd.build_extreme_measure(pmfs, e))
            oracle = lp.transport_extreme(pmfs[0].probs, pmfs[1].probs, maximize=maximize).fun
            worst = max(worst, abs(closed - oracle))
    return CheckResult("ejd_lp_oracle", worst <= tol, worst, tol,
                       detail=f"max |E[X1 X2]| gap over {pairs} random pairs")


def check_forward_bound(rate1: float, rate2: float, horizon: float,
                        rng: np.random.Generator, n_paths: int) -> CheckResult:
    kappa = max(rate1, rate2) / min(rate1, rate2)
    expected = 1.0 / math.sqrt(kappa)
    counts = forward_comonotone_counts(rate1, rate2, horizon, rng, n_paths, mode="max")
    r, se = analytics.pearson(counts[:, 0], counts[:, 1])
    if kappa == 1.0:
        gap = float(np.abs(counts[:, 0] - counts[:, 1]).max())
        return CheckResult("frechet_forward", gap == 0, gap, 0.0,
                           detail="equal rates must give identical paths")
    threshold = 4.0 * se
    return CheckResult("frechet_forward", abs(r - expected) <= threshold, abs(r - expected),
                       threshold, detail=f"rho={r:.4f} vs 1/sqrt(kappa)={expected:.4f}")


def corrupt(model: CalibratedModel, factor: float = 0.8) -> CalibratedModel:
    """Negative control: weights that no longer sum to one."""
    return dataclasses.replace(model, weights=model.weights * factor)


def run_checks(scenario: Scenario, *, seed: int | None = None, paths: int | None = None,
               threads: int | None = None, corrupt_weights: bool = False,
               model: CalibratedModel | None = None) -> list[CheckResult]:
    seed = scenario.seed if seed is None else seed
    paths = scenario.paths if paths is None else paths
    if model is None:
        model = calibrate(scenario.structures(), scenario.target(), scenario.horizon, scenario.tol)
    results = [CheckResult("calibration_residual", model.residual() <= 1e-7,
                           model.residual(), 1e-7, detail="max |sum w C_j - C|")]
    if corrupt_weights:
        model = corrupt(model)
    pathset = simulate(SimulationConfig(model, scenario.periods, paths, seed), threads)
    for k in range(model.d):
        results.append(check_uniform_arrivals(pathset, k))
        results.append(check_marginal(pathset, model.truncated[k], k))
    results.append(check_lp_oracle(make_rng(seed, 2**20, 1)))
    rates = [m.structure.mean() for m in model.marginals[:2]]
    results.append(check_forward_bound(rates[0], rates[1], scenario.horizon,
                                       make_rng(seed, 2**20, 2), min(paths, 20_000)))
    return results
