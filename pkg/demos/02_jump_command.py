"""
The jump command as a shaped step
=================================

Two bang-bang moves of the actuator, written either piecewise or as a step
convolved with six impulses.  Both descriptions agree sample for sample.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pogo_codesign import accel_at, actuator_kinematics, convolution_check, make_command

###########################################################################
# Full strokes down and up, separated by a short pause.

cmd = make_command(delta_1=0.008, delta_t=0.077, delta_2=0.008)
print("impulse times [s]:", np.round(cmd.sequence.times, 5))
print("amplitudes:       ", cmd.sequence.amplitudes)
print(f"peak speed {cmd.peak_speed:.5f} m/s (limit 1.0 m/s)")
print("convolution matches:", convolution_check(cmd, 1e-4))

###########################################################################
# Acceleration, velocity and position of the actuator.

t = np.linspace(0.0, cmd.duration + 0.02, 2000)
acc = [accel_at(cmd, ti) for ti in t]
pos, vel = np.array([actuator_kinematics(cmd, ti) for ti in t]).T

fig, axes = plt.subplots(3, 1, sharex=True, figsize=(6, 6))
axes[0].step(t, acc, where="post")
axes[0].set_ylabel("accel [m/s$^2$]")
axes[1].plot(t, vel)
axes[1].set_ylabel("velocity [m/s]")
axes[2].plot(t, 1000 * pos)
axes[2].set_ylabel("position [mm]")
axes[2].set_xlabel("time [s]")
fig.tight_layout()
fig.savefig("jump_command.png", dpi=120)

###########################################################################
# A broken impulse sequence is caught.

import dataclasses
from pogo_codesign.command import ImpulseSequence

bad = dataclasses.replace(cmd, sequence=ImpulseSequence((-0.5, 2, -1, 1, -2, 1),
                                                        cmd.sequence.times))
print("perturbed sequence matches:", convolution_check(bad, 1e-4))
