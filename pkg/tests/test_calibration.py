import math

import numpy as np
import pytest
from scipy import optimize, stats

from backsim.calibration import (InfeasibleCalibration, admissible_range, calibrate, flatten,
                                 phase1_solve, sample_joint, unflatten)
from backsim.distributions import (Degenerate, FiniteDiscrete, Gamma, MixedPoissonDistribution,
                                   nb_from_mean_variance)


def test_flatten_example():
    C = np.array([[1, 0.1, 0.2], [0.1, 1, 0.3], [0.2, 0.3, 1]])
    np.testing.assert_array_equal(flatten(C), [0.1, 0.2, 0.3])
    np.testing.assert_array_equal(unflatten(flatten(C), 3), C)


def test_flatten_rejects_bad_matrices():
    with pytest.raises(ValueError, match="symmetric"):
        flatten([[1, 0.1], [0.2, 1]])
    with pytest.raises(ValueError, match="diagonal"):
        flatten([[1, 0.1], [0.1, 0.9]])


def scalar_system(c_hat):
    c_hat = np.asarray(c_hat, dtype=float)
    return np.vstack([c_hat, np.ones(c_hat.size)])


def test_phase1_interior_target():
    w = phase1_solve(scalar_system([0.9, -0.6]), [0.0, 1.0])
    np.testing.assert_allclose(w, [0.4, 0.6], atol=1e-12)


def test_phase1_vertex_target():
    w = phase1_solve(scalar_system([0.9, -0.6]), [0.9, 1.0])
    np.testing.assert_allclose(w, [1.0, 0.0], atol=1e-12)


def test_phase1_infeasible_target():
    with pytest.raises(InfeasibleCalibration):
        phase1_solve(scalar_system([0.9, -0.6]), [0.95, 1.0])


def test_phase1_is_deterministic():
    A = scalar_system([0.9, 0.1, -0.6])
    w1 = phase1_solve(A, [0.3, 1.0])
    w2 = phase1_solve(A, [0.3, 1.0])
    np.testing.assert_array_equal(w1, w2)


MARGINALS = [Degenerate(4.0), nb_from_mean_variance(6.0, 15.0, 1.0),
             FiniteDiscrete((2.0, 8.0), (0.5, 0.5)), Gamma(1.0, 0.2)]


@pytest.mark.parametrize("d", [2, 3, 4])
@pytest.mark.parametrize("seed", range(3))
def test_recovers_convex_combination_targets(d, seed):
    base = calibrate(MARGINALS[:d], np.eye(d))
    rng = np.random.default_rng(seed)
    w_star = rng.dirichlet(np.ones(len(base.measures)))
    target = np.einsum("j,jkl->kl", w_star, base.extreme_corrs)
    model = calibrate(MARGINALS[:d], target)
    assert model.residual() <= 1e-7
    assert np.all(model.weights >= 0)
    assert model.weights.sum() == pytest.approx(1.0, abs=1e-12)


def test_infeasibility_agrees_with_highs():
    base = calibrate(MARGINALS[:3], np.eye(3))
    A = np.stack([flatten(C) for C in base.extreme_corrs], axis=1)
    A_hat = np.vstack([A, np.ones(A.shape[1])])
    rng = np.random.default_rng(11)
    for _ in range(30):
        b = rng.uniform(-0.6, 0.8, size=3)
        b_hat = np.append(b, 1.0)
        ref = optimize.linprog(np.zeros(A_hat.shape[1]), A_eq=A_hat, b_eq=b_hat,
                               bounds=(0, None), method="highs")
        try:
            w = phase1_solve(A_hat, b_hat)
            feasible = True
            np.testing.assert_allclose(A_hat @ w, b_hat, atol=1e-9)
        except InfeasibleCalibration:
            feasible = False
        assert feasible == (ref.status == 0)


def test_poisson_nb_pair_weights():
    marg = [Degenerate(5.0), nb_from_mean_variance(5.0, 30.0, 1.0)]
    for rho in (0.7, -0.7):
        model = calibrate(marg, [[1, rho], [rho, 1]])
        assert model.residual() <= 1e-7
        lo, hi = model.ranges[0, 1]
        assert lo < rho < hi


def test_admissible_range_identical_marginals():
    p = MixedPoissonDistribution(Gamma(2.0, 0.5)).truncate(1e-12)
    lo, hi = admissible_range(p, p)
    assert hi == pytest.approx(1.0, abs=1e-12)
    assert -1 < lo < 0


@pytest.mark.parametrize("lam1, lam2", [(3.0, 30.0), (1.0, 2.0), (5.0, 5.5)])
def test_poisson_max_correlation_beats_common_shock(lam1, lam2):
    p = MixedPoissonDistribution(Degenerate(lam1)).truncate(1e-12)
    q = MixedPoissonDistribution(Degenerate(lam2)).truncate(1e-12)
    lo, hi = admissible_range(p, q)
    # a common Poisson shock of rate min(lam) attains sqrt(min/max)
    assert hi >= math.sqrt(min(lam1, lam2) / max(lam1, lam2)) - 1e-12
    assert hi < 1 and lo < 0


def test_infeasible_target_names_pair():
    marg = [Degenerate(3.0), Gamma(1 / 3, 1 / 9)]
    with pytest.raises(InfeasibleCalibration) as info:
        calibrate(marg, [[1, 0.999], [0.999, 1]])
    assert info.value.pair == (1, 2)
    assert "(1,2)" in str(info.value)
    lo, hi = info.value.admissible
    assert hi < 0.999


def test_jointly_infeasible_pairwise_admissible_target():
    # three pairwise-admissible correlations that no joint law can realise
    marg = MARGINALS[:3]
    target = np.array([[1, 0.6, -0.6], [0.6, 1, 0.6], [-0.6, 0.6, 1]])
    with pytest.raises(InfeasibleCalibration) as info:
        calibrate(marg, target)
    assert info.value.admissible is None   # raised by the LP, not the pairwise pre-check
    assert info.value.pair is not None


def test_calibrate_input_validation():
    with pytest.raises(ValueError):
        calibrate(MARGINALS[:2], np.eye(3))
    with pytest.raises(ValueError):
        calibrate(MARGINALS[:2], [[1, 1.2], [1.2, 1]])


def test_sample_joint_single_measure():
    model = calibrate(MARGINALS[:2], np.eye(2))
    model = model.__class__(**{**model.__dict__, "weights": np.array([1.0, 0.0])})
    draws = sample_joint(model, np.random.default_rng(0), 5000)
    atoms = {tuple(a) for a in model.measures[0].support}
    assert all(tuple(x) in atoms for x in draws)


def test_sample_joint_marginals_and_correlation():
    marg = [Degenerate(5.0), nb_from_mean_variance(5.0, 30.0, 1.0)]
    model = calibrate(marg, [[1, 0.7], [0.7, 1]])
    n = 200_000
    draws = sample_joint(model, np.random.default_rng(42), n)
    for k in range(2):
        probs = model.truncated[k].probs
        K = probs.size
        observed = np.bincount(np.minimum(draws[:, k], K - 1), minlength=K)[:K]
        expected = n * probs
        keep = expected >= 5
        obs = np.append(observed[keep], observed[~keep].sum())
        exp = np.append(expected[keep], expected[~keep].sum())
        exp *= obs.sum() / exp.sum()
        assert stats.chisquare(obs, exp).pvalue > 0.001
    r = np.corrcoef(draws.T)[0, 1]
    xc = draws - draws.mean(0)
    xs = xc / xc.std(0)
    se = np.std(xs[:, 0] * xs[:, 1] - 0.5 * r * (xs**2).sum(1)) / math.sqrt(n)
    assert abs(r - 0.7) <= 3 * se
