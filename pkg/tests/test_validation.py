import numpy as np

from backsim import scenario, validation
from backsim.simulation import make_rng

SCEN = scenario.loads("""
name: sweep
periods: 3
paths: 20000
marginals:
  - {type: poisson, mean: 5.0}
  - {type: negative_binomial, mean: 5.0, variance: 30.0}
correlation: [[1.0, 0.7], [0.7, 1.0]]
""")


def test_seed_sweep_pass_rate():
    names = None
    passes = None
    for seed in range(10):
        results = validation.run_checks(SCEN, seed=seed)
        if names is None:
            names = [r.name for r in results]
            passes = np.zeros(len(results), dtype=int)
        passes += [r.passed for r in results]
    assert all(p >= 9 for p in passes), dict(zip(names, passes))


def test_corrupted_weights_fail_marginal_check():
    results = validation.run_checks(SCEN, seed=0, paths=5000, corrupt_weights=True)
    failed = {r.name for r in results if not r.passed}
    assert {"chi_square_marginal[1]", "chi_square_marginal[2]"} <= failed


def test_check_lines():
    r = validation.check_lp_oracle(make_rng(0), pairs=3)
    assert r.passed
    assert r.line().startswith("[PASS] ejd_lp_oracle: statistic=")
    f = validation.check_forward_bound(2.0, 2.0, 1.0, make_rng(1), 100)
    assert f.passed and f.statistic == 0
