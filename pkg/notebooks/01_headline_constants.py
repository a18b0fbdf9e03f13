"""
Headline constants of the optimal pointers
==========================================

Walks from the naive flat-weighted estimators to the minimax-optimal
rational pointers and shows how the constants move with the horizon.
Run with ``python3 notebooks/01_headline_constants.py``.
"""

import numpy as np

from homodyne_pointer_lab.optimize import optimize_naive_time, optimize_pointer_x, optimize_pointer_z
from homodyne_pointer_lab.quality import naive_quality_x, naive_quality_z, rational_x_d, rational_z_d
from homodyne_pointer_lab.reproduce import format_table, reproduce

# %% Naive estimators: integrate the photocurrent up to t and rescale.
# The x quality first improves as signal accumulates, then degrades as the
# atom decays; the z quality inherits the same optimal time.
for t in (0.5, 1.0, 2.0, 2.513, 4.0, 8.0):
    print(f"t = {t:5.3f}   sigma^2 = {naive_quality_x(t):8.4f}   sigma~^2 = {naive_quality_z(t):8.4f}")

nx, nz = optimize_naive_time("x"), optimize_naive_time("z")
print(f"\nnaive optimum t* = {nx.argmin:.6f}, sigma sigma~ = {nx.sigma * nz.sigma:.4f}\n")

# %% Rational x pointer: the two diagonal excesses d1 and d2 cross at the
# minimax optimum.  Left of the crossing d1 dominates, right of it d2.
for eps in (0.3, 0.5, 0.604868, 0.7, 1.0):
    d1, d2 = rational_x_d(eps)
    print(f"eps = {eps:8.6f}   d1 = {d1:.6f}   d2 = {d2:.6f}")

# %% Rational z pointer: same picture in delta.
for delta in (1.5, 2.3, 2.700790, 3.2, 5.0):
    d1, d2 = rational_z_d(delta)
    print(f"delta = {delta:8.6f}   d1 = {d1:.6f}   d2 = {d2:.6f}")

# %% The published table at the infinite horizon.
print()
print(format_table(reproduce()))

# %% Finite horizons.  beta = sqrt(1 - e^{-t}) is the fraction of the
# signal collected; the joint product approaches the bound 1 only slowly
# and never reaches it.  For large beta the x optimum sits where d1 = d2,
# and that crossing does not move with beta.  For small beta the optimum
# leaves the crossing: d1 alone has an interior minimum at 1/beta^2 - 1
# that lies above d2, so the minimax point is that minimum.
print("\n    t      beta     eps    delta   sigma   sigma~  product")
for t in (0.5, 1.0, 2.0, 4.0, 8.0, np.inf):
    beta = 1.0 if np.isinf(t) else float(np.sqrt(-np.expm1(-t)))
    ox, oz = optimize_pointer_x(beta), optimize_pointer_z(beta)
    print(
        f"{t:6.1f}  {beta:7.5f}  {ox.argmin:6.4f}  {oz.argmin:6.4f}  "
        f"{ox.sigma:6.4f}  {oz.sigma:6.4f}  {ox.sigma * oz.sigma:7.4f}"
    )
