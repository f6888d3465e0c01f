"""
Stutter jump of the nominal pogo stick
======================================

The actuator first drops through its full stroke, pauses, and then pushes
back up.  With the right pause the first push produces a small hop, and the
landing compresses the spring before the main push.
"""

###########################################################################
# Build the nominal design and the tuned command.

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from pogo_codesign import DesignParams, SimConfig, apex_height, command_for, simulate
from pogo_codesign.experiment import TUNED_DELTA_T

params = DesignParams()
command = command_for(params, TUNED_DELTA_T)
traj = simulate(params, command, SimConfig(dt=1e-4, t_f=1.0))

print(f"spring {params.alpha:.0f} N/m, damping ratio {params.zeta}")
print(f"apex {1000 * apex_height(traj):.2f} mm")
for t, kind in traj.events[:6]:
    print(f"  {t:8.5f} s  {kind}")

###########################################################################
# Rod height and actuator position.  The small first flight is visible
# just before the main jump.

fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(7, 5))
ax1.plot(traj.t, 1000 * traj.x)
ax1.axhline(0.0, color="k", lw=0.5)
ax1.set_ylabel("rod height [mm]")
ax2.plot(traj.t, 1000 * traj.x_a)
ax2.set_ylabel("actuator [mm]")
ax2.set_xlabel("time [s]")
fig.tight_layout()
fig.savefig("stutter_jump.png", dpi=120)

###########################################################################
# Without the pause the two pushes run back to back and the jump is lower.

for pause in (0.0, 0.04, TUNED_DELTA_T, 0.12):
    h = apex_height(simulate(params, command_for(params, pause)))
    print(f"pause {pause:5.3f} s -> apex {1000 * h:6.2f} mm")
