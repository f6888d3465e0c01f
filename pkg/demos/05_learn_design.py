"""
Learning a spring and damper
============================

Each episode the agent proposes a design, the pogo stick jumps once with the
fixed command, and the apex height is the reward.  A single short run is
shown here; ``pogo-codesign train`` runs the full multi-seed experiment.
"""

import numpy as np

from pogo_codesign import DesignEnv, DesignSpace, RewardCase, SimConfig, Td3Config, train_run
from pogo_codesign import DesignParams, command_for
from pogo_codesign.experiment import MAX_HEIGHT_REWARD_SCALE, TUNED_DELTA_T

command = command_for(DesignParams(), TUNED_DELTA_T)

###########################################################################
# Maximum height in the narrow damping range.

env = DesignEnv(DesignSpace.narrow(), command, SimConfig(), RewardCase.max_height())
cfg = Td3Config(seed=0, reward_scale=MAX_HEIGHT_REWARD_SCALE)
log = train_run(env, cfg, episodes=1000)

alpha, zeta = log.final_design()
print(f"max height: alpha {alpha:.0f} N/m, zeta {zeta:.5f}, apex {1000 * log.rows[-1]['apex']:.2f} mm")

###########################################################################
# Aim for a 10 mm jump instead.

env = DesignEnv(DesignSpace.narrow(), command, SimConfig(), RewardCase.specified_height(0.01))
log = train_run(env, Td3Config(seed=0), episodes=1000)
alpha, zeta = log.final_design()
print(f"10 mm target: alpha {alpha:.0f} N/m, zeta {zeta:.5f}, "
      f"apex {1000 * log.rows[-1]['apex']:.2f} mm")
print("last 20 apex heights [mm]:", np.round(1000 * log.column("apex")[-20:], 2))
