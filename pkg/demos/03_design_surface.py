"""
Apex height over the design space
=================================

Brute-force sweep of spring constant and damping ratio for the narrow and
broad damping ranges.  The best cell is the reference a learned design is
measured against.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from pogo_codesign import DesignGrid, DesignParams, DesignSpace, SimConfig, command_for, sweep
from pogo_codesign.experiment import TUNED_DELTA_T
from pogo_codesign.sweep import argmax_design, target_band

command = command_for(DesignParams(), TUNED_DELTA_T)

###########################################################################
# A 30 x 30 grid keeps this quick; the CLI defaults to 60 x 60.

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
for ax, name in zip(axes, ("narrow", "broad")):
    grid = DesignGrid.for_space(DesignSpace.named(name), 30, 30)
    surface = sweep(grid, command, SimConfig())
    alpha, zeta, h = argmax_design(surface)
    band = target_band(surface, 0.01, 0.05)
    print(f"{name}: best alpha {alpha:.0f} N/m, zeta {zeta:.4f}, apex {1000 * h:.2f} mm; "
          f"{len(band)} cells within 5 % of 10 mm")
    im = ax.pcolormesh(grid.zetas, grid.alphas, 1000 * surface.heights, shading="auto")
    ax.plot(zeta, alpha, "r*", ms=12)
    ax.set_title(f"{name} damping range")
    ax.set_xlabel("damping ratio")
    ax.set_ylabel("spring constant [N/m]")
    fig.colorbar(im, ax=ax, label="apex [mm]")
fig.tight_layout()
fig.savefig("design_surface.png", dpi=120)
