"""
Mixed Poisson marginals
=======================

A mixed Poisson count draws its intensity once from a structure
distribution and then counts a Poisson process at that rate.  A gamma
structure gives the negative binomial; a point mass gives the Poisson.
"""

import numpy as np

from backsim import Degenerate, MixedPoissonDistribution, nb_from_mean_variance, thin_pmf

# NB with mean 5 and variance 30 at T = 1: shape 1, rate 0.2
g = nb_from_mean_variance(5.0, 30.0, horizon=1.0)
print(f"gamma structure: shape={g.shape:.4f} rate={g.rate:.4f}")

nb = MixedPoissonDistribution(g, horizon=1.0)
pois = MixedPoissonDistribution(Degenerate(5.0), horizon=1.0)
for name, dist in (("Poisson(5)", pois), ("NB(5, 30)", nb)):
    print(f"{name:10s} mean={dist.mean():.2f} var={dist.variance():.2f} "
          f"P(0)={dist.pmf(0):.4f} q99={dist.quantile(0.99)}")

# truncation keeps the tail mass explicit
p = nb.truncate(1e-12)
print(f"NB truncated at K={p.K}, stored mass {p.probs.sum():.15f}, tail {p.tail_mass:.1e}")

# binomial thinning of the terminal count gives the count at an earlier time
for t in (0.25, 0.5, 1.0):
    q = thin_pmf(p, t)
    print(f"t={t:.2f}: thinned mean={q.mean():.4f} var={q.variance():.4f} "
          f"(direct: var={MixedPoissonDistribution(g, t).variance():.4f})")

x = np.arange(6)
print("NB pmf at 0..5:", np.round(nb.pmf(x), 5))
