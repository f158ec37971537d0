"""
Convergence rates against the noise level
=========================================

With a source condition of smoothness ``mu`` the error in the ``X_r`` norm
should decay like ``delta^((mu - r)/(a + mu))``. This script fits the
log-log slope over seven noise levels and five seeds.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hsnewton import (FilterFamily, SolverConfig, construct_source, make_diagonal_linear, make_schedule,
                      rate_experiment, rescale_to_assumption3b)

K, a, s, mu = 256, 1.0, 0.0, 1.0
problem, _ = rescale_to_assumption3b(make_diagonal_linear(K, a), s, 1.0)
omega = np.arange(1, K + 1) ** -0.5
src, x0 = construct_source(problem, s, mu, omega / np.linalg.norm(omega))
sched = make_schedule("reciprocal_integers", 64, k="linear")

fig, ax = plt.subplots()
for fam in [FilterFamily.tikhonov(1), FilterFamily.exponential(), FilterFamily.landweber(),
            FilterFamily.lardy()]:
    cfg = SolverConfig(fam, sched, x0, s=s)
    reports = rate_experiment(problem, cfg, r_list=(0.0, -a), mu=mu)
    for r, rep in reports.items():
        print(f"{fam.name:14s} r = {r:+.0f}: slope {rep.fitted_slope:.3f} +- {rep.slope_ci:.3f} "
              f"(theory {rep.theory_slope:.3f})")
    d, m = reports[0.0].mean_errors()
    ax.loglog(d, m, "o-", label=fam.name)

d = np.array([1e-5, 1e-2])
ax.loglog(d, 0.5 * d ** 0.5, "k--", label="slope 1/2")
ax.set_xlabel("delta")
ax.set_ylabel("mean error in X_0")
ax.legend()
fig.savefig("rates.png")
