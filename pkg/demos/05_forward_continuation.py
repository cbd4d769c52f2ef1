"""
Forward Continuation over several periods
=========================================

Each period repeats the one-period construction with a fresh draw, so
increments are independent and the correlation returns to rho(T) at every
period end while dipping in between.
"""

import numpy as np

from backsim import (Degenerate, SimulationConfig, calibrate, correlation_curve,
                     nb_from_mean_variance, simulate)

marginals = [Degenerate(5.0), nb_from_mean_variance(5.0, 30.0, 1.0)]
times = np.arange(1, 71) / 10
for rho in (0.7, -0.7):
    model = calibrate(marginals, [[1.0, rho], [rho, 1.0]])
    paths = simulate(SimulationConfig(model, periods=7, paths=50_000, seed=2))
    curve = correlation_curve(model, paths, (0, 1), times)
    print(f"rho(T) = {rho:+.1f}")
    for t, th, em in zip(curve.times[4::5], curve.theoretical[4::5], curve.empirical[4::5]):
        print(f"  t={t:.1f}  theory={th:+.4f}  empirical={em:+.4f}")
