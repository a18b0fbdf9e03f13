"""
Monte Carlo validation of the endpoint law
==========================================

Two independent samplers are checked against the closed-form density q:
inverse-CDF draws of the endpoint itself, and full homodyne records from
the filtering equation.  The second route is a validation path only, so
the interesting output is how fast its bias shrinks with the step size.

Run with ``python3 notebooks/03_monte_carlo_validation.py`` (about a
minute on one core).
"""

import math

import numpy as np
from scipy import integrate

from homodyne_pointer_lab.endpoint import TimeHorizon, scalar_density_q
from homodyne_pointer_lab.optimize import optimize_pointer_x, optimize_pointer_z
from homodyne_pointer_lab.pushforward import optimal_pointer
from homodyne_pointer_lab.qubit import SIGMA_X, SIGMA_Z, BlochVector
from homodyne_pointer_lab.simulate import (
    SimConfig,
    chi_square_against_q,
    empirical_quality,
    ks_against_q,
    sample_endpoints,
    simulate_filter_paths,
    state_variance,
)

rho = BlochVector(0.6, 0.0, 0.5)
t = 8.0
hz = TimeHorizon(t)

# %% Exact sampler: a million draws, chi-square and KS against q.
exact = sample_endpoints(rho, SimConfig(hz, 10**6, 1))
print(f"exact sampler: chi-square p = {chi_square_against_q(exact.y, hz, rho).pvalue:.3f}, "
      f"KS p = {ks_against_q(exact.y, hz, rho).pvalue:.3f}")

# %% Optimal pointers on the exact samples: unbiased means, and added
# variances that stay within sampling error of the worst case at this
# horizon.
hx, hzp = optimal_pointer("x", hz), optimal_pointer("z", hz)
bounds = {"x": optimize_pointer_x(hz.beta).objective, "z": optimize_pointer_z(hz.beta).objective}
for h, target, ref, name in ((hx, SIGMA_X, rho.px, "x"), (hzp, SIGMA_Z, rho.pz, "z")):
    mean, var = empirical_quality(exact, h, rho, target)
    se = math.sqrt(var / len(exact))
    v = h(exact.y)
    var_se = math.sqrt(np.mean((v - v.mean()) ** 4) - var**2) / math.sqrt(len(v))
    added = var - state_variance(rho, target)
    print(f"{name} pointer: mean {mean:.4f} +- {se:.4f} (target {ref}), "
          f"added variance {added:.4f} +- {var_se:.4f} (worst case {bounds[name]:.4f})")

# %% Filtered records: weak error against step size.  The exact moments of
# q serve as the reference; the deviation should shrink roughly in
# proportion to dt.
moments = [integrate.quad(lambda y, k=k: y**k * scalar_density_q(y, hz, rho), -np.inf, np.inf)[0] for k in (1, 2)]
print("\n   dt      n    E[Y] - ref      E[Y^2] - ref     KS p")
for dt in (4e-2, 2e-2, 1e-2):
    n = 200_000
    s = simulate_filter_paths(rho, SimConfig(hz, n, 7, "filter_paths", dt))
    m1, m2 = s.y.mean(), (s.y**2).mean()
    se1, se2 = s.y.std() / math.sqrt(n), (s.y**2).std() / math.sqrt(n)
    print(f"{dt:6.0e} {n:7d}  {m1 - moments[0]:+.4f}+-{se1:.4f}  {m2 - moments[1]:+.4f}+-{se2:.4f}  "
          f"{ks_against_q(s.y, hz, rho).pvalue:.2e}")

# %% At the default step the bias is far below the sampling error of any
# test run here.
s = simulate_filter_paths(rho, SimConfig(hz, 20_000, 8, "filter_paths", 1e-3))
print(f"\ndt = 1e-3, n = 2e4: KS p = {ks_against_q(s.y, hz, rho).pvalue:.3f}, "
      f"max Bloch norm {s.max_bloch_norm.max():.12f}, rejected steps {s.rejected_steps}")
