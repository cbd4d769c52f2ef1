"""
Calibrating to a target correlation matrix
==========================================

Any convex combination of extreme measures keeps the marginals, and its
correlation matrix is the same combination of the extreme correlation
matrices.  Finding the weights is a linear feasibility problem.
"""

import numpy as np

from backsim import (Degenerate, FiniteDiscrete, InfeasibleCalibration, calibrate,
                     nb_from_mean_variance, sample_joint)

marginals = [Degenerate(4.0), nb_from_mean_variance(6.0, 15.0, 1.0),
             FiniteDiscrete.from_atoms([(2.0, 0.5), (8.0, 0.5)])]
target = np.array([[1.0, 0.4, -0.2],
                   [0.4, 1.0, 0.1],
                   [-0.2, 0.1, 1.0]])

model = calibrate(marginals, target)
for e, w in zip(model.structures, model.weights):
    print(f"structure {e}: weight {w:.6f}")
print(f"residual {model.residual():.1e}")
print("pairwise admissible ranges:")
for k, l in ((0, 1), (0, 2), (1, 2)):
    lo, hi = model.ranges[k, l]
    print(f"  ({k + 1},{l + 1}): [{lo:+.4f}, {hi:+.4f}]")

draws = sample_joint(model, np.random.default_rng(0), 200_000)
print("sample correlation:\n", np.round(np.corrcoef(draws.T), 3))

# outside the admissible range the calibration says so and names the pair
try:
    calibrate(marginals[:2], [[1.0, 0.99], [0.99, 1.0]])
except InfeasibleCalibration as exc:
    print("infeasible:", exc)
