"""
Contour integrals of the filter defect
======================================

The defect ``phi_alpha(z) = g_alpha(z) - 1/(alpha + z)`` measures how far a
filter is from a single Tikhonov step. Its absolute integral over a keyhole
contour around ``[0, 1]`` should stay bounded as ``alpha`` shrinks.
"""

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from hsnewton import FilterFamily, check_assumption1, contour_arcs

alphas = [1.0, 0.1, 0.01, 0.001]
families = [FilterFamily.tikhonov(1), FilterFamily.tikhonov(2), FilterFamily.exponential(),
            FilterFamily.landweber(), FilterFamily.lardy()]

###############################################################################
# The contour for alpha = 0.1: a small arc of radius alpha/2 around the
# origin, a large arc of radius R = 1.5 and two rays at angle pi/6.

fig, ax = plt.subplots()
for z, _ in contour_arcs(0.1, 1.5, np.pi / 6, nodes=128):
    ax.plot(z.real, z.imag, ".", ms=2)
ax.plot([0, 1], [0, 0], "k-", lw=3, label="spectrum")
ax.set_aspect("equal")
ax.legend()
fig.savefig("contour.png")

###############################################################################
# Integrals and quadrature refinement. Tikhonov with N = 1 has no defect.
# Lardy with alpha = 1 performs one implicit step, which is the same thing.

for fam in families:
    reps = [check_assumption1(fam, a) for a in alphas]
    vals = "  ".join(f"{r.b1_integral:8.4f}" for r in reps)
    worst = max(r.quadrature_refinement_delta for r in reps)
    print(f"{fam.name:14s} {vals}   refinement {worst:.1e}   b0 {reps[0].b0_estimate:.2f}")
