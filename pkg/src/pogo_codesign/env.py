"""One-decision environment: the action is the mechanical design.

Each episode the agent proposes offsets to the nominal spring constant and
damping ratio, the jumper is simulated once with the fixed command, and the
episode ends.  Observations are channel sums over the simulated trajectory.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Tuple

import numpy as np

from .command import JumpCommand
from .errors import EmptyTrajectory, InvalidTarget
from .sim import (ALPHA_NOMINAL, ZETA_BROAD, ZETA_NARROW, DesignParams, SimConfig,
                  Trajectory, apex_height, simulate)

TARGET_HEIGHT = 0.01
OFFSET_FRACTION = 0.9


@dataclass(frozen=True)
class DesignSpace:
    """Admissible offsets ``[-0.9, 0.9] x nominal`` for spring constant and damping."""

    alpha_nom: float = ALPHA_NOMINAL
    zeta_nom: float = ZETA_NARROW
    name: str = "narrow"

    @classmethod
    def narrow(cls) -> "DesignSpace":
        return cls(ALPHA_NOMINAL, ZETA_NARROW, "narrow")

    @classmethod
    def broad(cls) -> "DesignSpace":
        return cls(ALPHA_NOMINAL, ZETA_BROAD, "broad")

    @classmethod
    def named(cls, name: str) -> "DesignSpace":
        if name == "narrow":
            return cls.narrow()
        if name == "broad":
            return cls.broad()
        raise ValueError(f"unknown design space {name!r}")

    @property
    def bounds(self) -> np.ndarray:
        return np.array([OFFSET_FRACTION * self.alpha_nom, OFFSET_FRACTION * self.zeta_nom])

    @property
    def alpha_range(self) -> Tuple[float, float]:
        return ((1 - OFFSET_FRACTION) * self.alpha_nom, (1 + OFFSET_FRACTION) * self.alpha_nom)

    @property
    def zeta_range(self) -> Tuple[float, float]:
        return ((1 - OFFSET_FRACTION) * self.zeta_nom, (1 + OFFSET_FRACTION) * self.zeta_nom)


@dataclass(frozen=True)
class Observation:
    sum_x: float = 0.0
    sum_x_dot: float = 0.0
    sum_x_a: float = 0.0
    sum_x_a_dot: float = 0.0

    def as_array(self) -> np.ndarray:
        return np.array([self.sum_x, self.sum_x_dot, self.sum_x_a, self.sum_x_a_dot])


@dataclass(frozen=True)
class RewardCase:
    """``kind`` is ``"max_height"`` or ``"specified_height"`` (with ``x_s``)."""

    kind: str = "max_height"
    x_s: Optional[float] = None

    def __post_init__(self):
        if self.kind not in ("max_height", "specified_height"):
            raise ValueError(f"unknown reward case {self.kind!r}")
        if self.kind == "specified_height" and not (self.x_s is not None and self.x_s > 0):
            raise InvalidTarget(f"target height must be positive, got {self.x_s!r}")

    @classmethod
    def max_height(cls) -> "RewardCase":
        return cls("max_height")

    @classmethod
    def specified_height(cls, x_s: float = TARGET_HEIGHT) -> "RewardCase":
        return cls("specified_height", x_s)


@dataclass(frozen=True)
class EpisodeResult:
    observation: Observation
    reward: float
    apex: float
    design: Tuple[float, float]
    done: bool = True


def action_to_design(action, space: DesignSpace) -> Tuple[float, float]:
    """Nominal-plus-offset design, clamped to ``[0.1, 1.9] x nominal``."""
    a_alpha, a_zeta = (float(a) for a in action)
    lo_a, hi_a = space.alpha_range
    lo_z, hi_z = space.zeta_range
    alpha = min(max(space.alpha_nom + a_alpha, lo_a), hi_a)
    zeta = min(max(space.zeta_nom + a_zeta, lo_z), hi_z)
    return alpha, zeta


def observe(traj: Trajectory) -> Observation:
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    return Observation(float(np.sum(traj.x)), float(np.sum(traj.x_dot)),
                       float(np.sum(traj.x_a)), float(np.sum(traj.x_a_dot)))


def reward_max_height(traj: Trajectory) -> float:
    return apex_height(traj)


def specified_height_reward(height: float, x_s: float) -> float:
    """``1 / (|height - x_s| / x_s + 1)``; equals 1 only on target."""
    if not x_s > 0:
        raise InvalidTarget(f"target height must be positive, got {x_s!r}")
    return 1.0 / (abs(height - x_s) / x_s + 1.0)


def reward_specified_height(traj: Trajectory, x_s: float = TARGET_HEIGHT) -> float:
    return specified_height_reward(apex_height(traj), x_s)


def reset(space: DesignSpace | None = None) -> Observation:
    return Observation()


def episode(action, space: DesignSpace, command: JumpCommand, sim: SimConfig,
            reward_case: RewardCase, base: DesignParams = DesignParams()) -> EpisodeResult:
    alpha, zeta = action_to_design(action, space)
    traj = simulate(base.with_design(alpha, zeta), command, sim)
    apex = apex_height(traj)
    if reward_case.kind == "max_height":
        reward = apex
    else:
        reward = specified_height_reward(apex, reward_case.x_s)
    return EpisodeResult(observe(traj), reward, apex, (alpha, zeta), True)


class DesignEnv:
    """Gym-style wrapper around :func:`episode` for the learner.

    ``step`` returns the observation divided by the number of samples, i.e.
    per-sample channel means, so the network inputs do not scale with the
    horizon.
    """

    obs_dim = 4
    action_dim = 2

    def __init__(self, space: DesignSpace, command: JumpCommand, sim: SimConfig = SimConfig(),
                 reward_case: RewardCase = RewardCase(), base: DesignParams = DesignParams()):
        self.space = space
        self.command = command
        self.sim = sim
        self.reward_case = reward_case
        self.base = base
        self.action_bounds = space.bounds

    def reset(self) -> np.ndarray:
        return reset(self.space).as_array()

    def step(self, action):
        result = episode(action, self.space, self.command, self.sim, self.reward_case, self.base)
        obs = result.observation.as_array() / (self.sim.n_steps + 1)
        info = {"apex": result.apex, "alpha": result.design[0], "zeta": result.design[1]}
        return obs, result.reward, True, info


class QuadraticBandit:
    """Verification bandit with a known optimum.

    Reward is ``1 - |a - optimum|^2`` over the box ``[-1, 1]^2``; the
    observation is always zero.
    """

    obs_dim = 4
    action_dim = 2

    def __init__(self, optimum=(0.3, -0.2)):
        self.optimum = np.asarray(optimum, dtype=float)
        self.action_bounds = np.ones(2)

    def reset(self) -> np.ndarray:
        return np.zeros(self.obs_dim)

    def step(self, action):
        a = np.asarray(action, dtype=float)
        reward = 1.0 - float(np.sum((a - self.optimum) ** 2))
        return np.zeros(self.obs_dim), reward, True, {"alpha": a[0], "zeta": a[1], "apex": np.nan}
