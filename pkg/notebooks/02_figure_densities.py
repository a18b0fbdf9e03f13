"""
Densities of the endpoint and of the two optimal pointers
=========================================================

Writes the figure data (513-node CSV grids) for the endpoint density q and
the push-forward densities r and s of the optimal pointers, for the six
named input states, and prints a few shape statistics for each.

Run with ``python3 notebooks/02_figure_densities.py [outdir]``; the
default output directory is ``figure_data``.
"""

import sys
from pathlib import Path

import numpy as np

from homodyne_pointer_lab.cli import PRESETS
from homodyne_pointer_lab.endpoint import TimeHorizon
from homodyne_pointer_lab.io import write_csv
from homodyne_pointer_lab.pushforward import figure_grid, optimal_pointer, pushforward_expectation

out = Path(sys.argv[1] if len(sys.argv) > 1 else "figure_data")
out.mkdir(parents=True, exist_ok=True)
hz = TimeHorizon.infinite()

# %% The endpoint density q.  The ground state gives the standard normal;
# the x eigenstates are mirror images of each other.
for name in ("minus_x", "trace", "plus_x", "up_z", "down_z"):
    grid = figure_grid("endpoint", PRESETS[name], hz)
    write_csv(out / f"endpoint_{name}.csv", {"x": grid.axis, "density": grid.values})
    mean = grid.integral(grid.axis)
    print(f"endpoint  {name:8s} mass {grid.integral():.6f}  mean {mean:+.4f}")

# %% The x pointer pushes q forward to r on [-C1/(2 sqrt eps), C1/(2 sqrt eps)].
# Both ends carry an integrable inverse-square-root singularity, which the
# midpoint grid straddles at half a cell.
hx = optimal_pointer("x", hz)
print(f"\nx pointer support: [{-hx.peak:.4f}, {hx.peak:.4f}]")
for name in ("minus_x", "trace", "plus_x"):
    rho = PRESETS[name]
    grid = figure_grid("pointer_x", rho, hz, pointer=hx)
    write_csv(out / f"pointer_x_{name}.csv", {"x": grid.axis, "density": grid.values})
    mean = pushforward_expectation(lambda x: x, hx, hz, rho)
    print(f"pointer_x {name:8s} mass {grid.integral():.6f}  mean {mean:+.6f}  (target {rho.px:+.1f})")

# %% The z pointer pushes q forward to s on [D3 + D2/delta, D3].  Values above
# 1 carry positive probability even for the excited state: the price of
# unbiasedness in every state at once.
hzp = optimal_pointer("z", hz)
lo, hi = hzp.support
print(f"\nz pointer support: [{lo:.4f}, {hi:.4f}]")
for name in ("up_z", "trace", "down_z"):
    rho = PRESETS[name]
    grid = figure_grid("pointer_z", rho, hz, pointer=hzp)
    write_csv(out / f"pointer_z_{name}.csv", {"x": grid.axis, "density": grid.values})
    mean = pushforward_expectation(lambda x: x, hzp, hz, rho)
    above = pushforward_expectation(lambda x: float(x > 1.0), hzp, hz, rho)
    print(
        f"pointer_z {name:8s} mass {grid.integral():.6f}  mean {mean:+.6f}  "
        f"(target {rho.pz:+.1f})  P(x > 1) {above:.4f}"
    )

print(f"\nwrote {len(list(out.glob('*.csv')))} grids to {out}/")
