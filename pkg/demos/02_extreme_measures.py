"""
Extreme measures
================

For fixed marginals, each monotonicity structure (a binary vector with a
leading zero) fixes which pairs move together and which move apart.  The
joint law attaining that pattern lives on a monotone path through the index
grid and is read directly off the marginal CDFs.
"""

import numpy as np

from backsim import (Degenerate, MixedPoissonDistribution, TruncatedPmf, build_extreme_measure,
                     correlation_matrix, enumerate_structures, nb_from_mean_variance)
from backsim.ejd import product_moment
from backsim.lp import transport_extreme

marginals = [MixedPoissonDistribution(Degenerate(5.0)).truncate(1e-12),
             MixedPoissonDistribution(nb_from_mean_variance(5.0, 30.0, 1.0)).truncate(1e-12)]

for e in enumerate_structures(2):
    m = build_extreme_measure(marginals, e)
    C = correlation_matrix(m)
    print(f"structure {e}: {len(m.probs)} atoms, correlation {C[0, 1]:+.6f}")
    print("  first atoms:", m.support[:5].tolist())

# the closed form agrees with brute-force optimal transport on small supports
p = np.array([0.2, 0.5, 0.3])
q = np.array([0.1, 0.1, 0.4, 0.4])
co, anti = enumerate_structures(2)
pair = [TruncatedPmf.from_probs(p), TruncatedPmf.from_probs(q)]
print("max E[XY]: closed form", product_moment(build_extreme_measure(pair, co)),
      "LP", transport_extreme(p, q, maximize=True).fun)
print("min E[XY]: closed form", product_moment(build_extreme_measure(pair, anti)),
      "LP", transport_extreme(p, q, maximize=False).fun)

# three coordinates: four structures, each a path of at most sum(K+1) - 2 atoms
three = marginals + [MixedPoissonDistribution(Degenerate(2.0)).truncate(1e-12)]
for e in enumerate_structures(3):
    C = correlation_matrix(build_extreme_measure(three, e))
    print(f"structure {e}: C12={C[0, 1]:+.3f} C13={C[0, 2]:+.3f} C23={C[1, 2]:+.3f}")
