"""
Newton iteration with discrepancy stopping
==========================================

Solve a mildly nonlinear problem from noisy data. The initial guess is
built from a source condition of smoothness ``mu = 1``, and the iteration
stops at the first residual below ``tau * delta``.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hsnewton import (FilterFamily, SolverConfig, construct_source, make_noisy, make_quadratic_perturbed,
                      make_schedule, predicted_stop_index, rescale_to_assumption3b, run)

K, a, s, mu = 256, 1.0, 0.0, 1.0
problem = make_quadratic_perturbed(K, a, gamma=0.05, rho=1.0)
problem, c = rescale_to_assumption3b(problem, s, alpha0=1.0)
print(f"scaling factor c = {c:.4f}, Hölder constant K0 = {problem.K0:.4f}")

omega = np.arange(1, K + 1) ** -0.5
omega /= np.linalg.norm(omega)
src, x0 = construct_source(problem, s, mu, omega)
sched = make_schedule("reciprocal_integers", 64, k="linear")

###############################################################################
# Run all four families at delta = 1e-4 and compare with the a-priori bound
# on the stopping index.

delta = 1e-4
data = make_noisy(problem, delta, seed=0)
bound = predicted_stop_index(sched, a, s, mu, src.omega_norm, 2.0, sched.c0, delta)
fig, ax = plt.subplots()
for fam in [FilterFamily.tikhonov(1), FilterFamily.exponential(), FilterFamily.landweber(),
            FilterFamily.lardy()]:
    cfg = SolverConfig(fam, sched, x0, s=s, tau=2.0, error_norms={"err_0": 0.0})
    res = run(problem, cfg, data)
    ax.semilogy(res.residuals, label=fam.name)
    print(f"{fam.name:14s} n_delta = {res.n_delta:3d} (bound {bound}), stop = {res.stop_reason}, "
          f"error = {res.error('err_0'):.3e}")
ax.axhline(2.0 * delta, color="k", ls="--", label="tau delta")
ax.set_xlabel("n")
ax.set_ylabel("residual")
ax.legend()
fig.savefig("residuals.png")
