"""
How often is a nominated maximum rare?
======================================

Under the contamination model (1-eps) N(0,1) + eps N(delta, tau^2) the
rare class is over-represented among set maxima.  ER(k) is that
over-representation factor.  Quadrature and simulation agree.
"""

import numpy as np

from fscns import RareEventParams, enrichment_ratio, make_rng
from fscns.sampling import draw_ns_max

params = RareEventParams(epsilon=0.05, delta=4.0, tau=1.5)
n = 200_000

print(" k   ER(quad)   ER(sim)")
for k in (1, 2, 3, 5, 8):
    _, comp = draw_ns_max(params, k, make_rng(2025, k), size=n)
    sim = np.mean(comp == 2) / params.epsilon
    print(f"{k:2d}  {enrichment_ratio(params, k):8.4f}  {sim:8.4f}")

# Selection can never do better than "at least one rare unit in the set"
for k in (2, 3, 5, 8):
    bound = (1 - (1 - params.epsilon) ** k) / params.epsilon
    print(f"k={k}: ER={enrichment_ratio(params, k):.3f} <= {bound:.3f}")
