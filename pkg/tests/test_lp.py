import numpy as np
import pytest
from scipy import optimize

from backsim import lp

HIGHS_TIGHT = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


def test_phase1_finds_feasible_point():
    A = np.array([[1.0, 1.0, 0.0], [0.0, 1.0, 1.0]])
    b = np.array([1.0, 0.5])
    x = lp.phase1(A, b)
    assert np.all(x >= 0)
    np.testing.assert_allclose(A @ x, b, atol=1e-12)


def test_phase1_negative_rhs():
    A = np.array([[-1.0, 2.0], [1.0, 1.0]])
    b = np.array([-0.4, 1.0])
    x = lp.phase1(A, b)
    np.testing.assert_allclose(A @ x, b, atol=1e-12)
    np.testing.assert_allclose(x, [0.8, 0.2], atol=1e-12)


def test_phase1_infeasible_reports_residual():
    A = np.array([[1.0, 1.0]])
    with pytest.raises(lp.Infeasible) as info:
        lp.phase1(A, np.array([-1.0]))
    assert info.value.objective == pytest.approx(1.0)
    assert info.value.residual.shape == (1,)


@pytest.mark.parametrize("seed", range(10))
def test_linprog_matches_highs(seed):
    rng = np.random.default_rng(seed)
    m, n = 4, 9
    A = rng.normal(size=(m, n))
    b = A @ rng.uniform(0.1, 1.0, size=n)
    c = rng.uniform(0.5, 2.0, size=n)
    ours = lp.linprog(c, A, b)
    ref = optimize.linprog(c, A_eq=A, b_eq=b, bounds=(0, None), method="highs",
                           options=HIGHS_TIGHT)
    assert ref.status == 0
    assert ours.fun == pytest.approx(ref.fun, abs=1e-8)
    np.testing.assert_allclose(A @ ours.x, b, atol=1e-9)


@pytest.mark.parametrize("maximize", [True, False])
def test_transport_extreme_matches_highs(maximize):
    rng = np.random.default_rng(5)
    p, q = rng.dirichlet(np.ones(6)), rng.dirichlet(np.ones(4))
    ours = lp.transport_extreme(p, q, maximize=maximize)
    c = np.outer(np.arange(6), np.arange(4)).ravel()
    A = np.vstack([np.kron(np.eye(6), np.ones(4)), np.kron(np.ones(6), np.eye(4))])
    ref = optimize.linprog(-c if maximize else c, A_eq=A, b_eq=np.concatenate([p, q]),
                           bounds=(0, None), method="highs",
                           options=HIGHS_TIGHT)
    assert ours.fun == pytest.approx(-ref.fun if maximize else ref.fun, abs=1e-10)


def test_transport_identical_marginals_max_is_second_moment():
    p = np.array([0.2, 0.5, 0.3])
    res = lp.transport_extreme(p, p, maximize=True)
    assert res.fun == pytest.approx(p @ np.arange(3) ** 2)
