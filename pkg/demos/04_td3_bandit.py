"""
TD3 on a bandit with a known answer
===================================

Before trusting the learner on the pogo stick, check it on a one-step
problem whose best action is known: reward ``1 - |a - (0.3, -0.2)|^2``.
"""

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from pogo_codesign import QuadraticBandit, Td3Config, train_run

env = QuadraticBandit()
log = train_run(env, Td3Config(seed=0), episodes=1000)

final = log.agent.select_action(env.reset())
print("learned action", np.round(final, 4), "optimum", env.optimum)

###########################################################################
# The first 100 episodes are random; afterwards the actor takes over.

fig, ax = plt.subplots(figsize=(6, 3))
ax.plot(log.column("a_alpha"), ".", ms=2, label="a1")
ax.plot(log.column("a_zeta"), ".", ms=2, label="a2")
ax.axhline(0.3, color="k", lw=0.5)
ax.axhline(-0.2, color="k", lw=0.5)
ax.set_xlabel("episode")
ax.legend()
fig.tight_layout()
fig.savefig("td3_bandit.png", dpi=120)
