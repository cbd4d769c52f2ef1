"""
Backward Simulation on one period
=================================

Terminal counts are drawn from the calibrated joint law; arrival times are
then sorted uniforms on the period.  Correlation decays towards t = 0 as
rho(T) Z(T) / Z(t), linearly for Poisson marginals.
"""

import numpy as np

from backsim import (Degenerate, SimulationConfig, calibrate, correlation_curve,
                     nb_from_mean_variance, simulate)

times = np.linspace(0.1, 1.0, 10)
cases = {
    "NB(3,30) vs NB(30,35)": [nb_from_mean_variance(3.0, 30.0, 1.0),
                              nb_from_mean_variance(30.0, 35.0, 1.0)],
    "Poisson(3) vs Poisson(30)": [Degenerate(3.0), Degenerate(30.0)],
}
for name, marginals in cases.items():
    model = calibrate(marginals, [[1.0, 0.7], [0.7, 1.0]])
    paths = simulate(SimulationConfig(model, periods=1, paths=50_000, seed=1))
    curve = correlation_curve(model, paths, (0, 1), times)
    print(name)
    for t, th, em, se in zip(curve.times, curve.theoretical, curve.empirical, curve.stderr):
        print(f"  t={t:.1f}  theory={th:+.4f}  empirical={em:+.4f} +/- {se:.4f}")

# a single path
p = paths.path(0)
print("path 0 arrivals of coordinate 1:", np.round(p.arrivals[0][:8], 3))
