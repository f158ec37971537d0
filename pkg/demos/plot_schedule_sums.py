"""
Weighted sums along a step schedule
===================================

The error analysis bounds sums of the form
``sum_j alpha_j^-1 (s_n - s_{j-1})^-p s_j^-q`` by a power of ``s_n``, with a
logarithm or an extra power when ``max(p, q)`` reaches one. The
normalized sums printed here should level off as ``n`` grows.
"""

import numpy as np

from hsnewton import lemma3_probe, make_schedule

n_list = [1000, 2000, 4000, 10_000]
for sched in [make_schedule("constant", 10_001, alpha=1.0),
              make_schedule("geometric", 10_001, alpha0=1.0, q=0.9999),
              make_schedule("geometric", 10_001, alpha0=1.0, q=0.99)]:
    print(f"\n{sched.kind} {sched.params}")
    for p in (0.0, 0.5, 1.0, 1.5):
        for q in (0.0, 0.5, 1.0, 1.5):
            vals = np.array([row["normalized"] for row in lemma3_probe(sched, p, q, n_list)])
            print(f"  p={p:3.1f} q={q:3.1f}  " + "  ".join(f"{v:9.3g}" for v in vals))

###############################################################################
# For q = 0.99 the step sizes collapse and some normalized sums decay towards
# zero: the bound still holds, it is just no longer attained.
