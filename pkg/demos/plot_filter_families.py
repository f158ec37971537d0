"""
Filter families and their residual functions
============================================

Each regularizing step applies a filter ``g_alpha`` to the normal operator.
The part of a spectral component that survives the step is
``r_alpha(lam) = 1 - lam g_alpha(lam)``. This script evaluates the four
families side by side and certifies the product bounds on a grid.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hsnewton import AssumptionCheckConfig, FilterFamily, check_assumption2, make_schedule

families = [FilterFamily.tikhonov(1), FilterFamily.tikhonov(2), FilterFamily.exponential(),
            FilterFamily.landweber(), FilterFamily.lardy()]
lam = np.linspace(0.0, 1.0, 400)
alpha = 0.1

###############################################################################
# Residual functions at alpha = 0.1. Landweber is the only family that drives
# the top of the spectrum all the way to zero.

fig, ax = plt.subplots()
for fam in families:
    ax.plot(lam, fam.r(alpha, lam), label=fam.name)
ax.set_xlabel("lambda")
ax.set_ylabel("r_alpha(lambda)")
ax.legend()
fig.savefig("filter_residuals.png")

for fam in families:
    err = np.abs(fam.r(alpha, lam) + lam * fam.g(alpha, lam) - 1).max()
    print(f"{fam.name:14s} g(0) = {fam.g(alpha, 0.0):6.2f}   max |r + lam g - 1| = {err:.1e}")

###############################################################################
# Product bounds along three schedules. ``max_V1`` must not exceed one and
# ``b2`` is the empirical constant of the second bound.

schedules = [make_schedule("constant", 51, alpha=1.0), make_schedule("geometric", 51, alpha0=1.0, q=0.5),
             make_schedule("reciprocal_integers", 51, k="linear")]
cfg = AssumptionCheckConfig(n_max=50)
for fam in families:
    for sched in schedules:
        rep = check_assumption2(fam, sched, cfg)
        print(f"{fam.name:14s} {sched.kind:20s} max V1 = {rep.max_V1:.12f}  b2 = {rep.b2_estimate:.3f}")
