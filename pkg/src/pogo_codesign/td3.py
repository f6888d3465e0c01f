"""Twin Delayed Deep Deterministic policy gradient (TD3) on numpy networks.

Networks work in normalized action units ``u in [-1, 1]^d``; the environment
action is ``bounds * u``.  Exploration noise is not used after the random
rollout phase, target-policy smoothing noise is.

All randomness of a run comes from one ``numpy.random.Generator`` seeded from
``Td3Config.seed``.  Draws happen in program order: network initialization,
then per episode the rollout action (rollout phase only), the batch indices
and the target-policy noise.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .errors import BufferUnderflow
from .nn import Adam, Mlp

LOG_FIELDS = ("seed", "episode", "a_alpha", "a_zeta", "alpha", "zeta", "apex", "reward",
              "critic_loss", "actor_loss")


@dataclass(frozen=True)
class Td3Config:
    learning_rate: float = 1e-3
    learning_starts: int = 100
    batch_size: int = 100
    tau: float = 0.005
    discount: float = 0.99
    train_freq: int = 1
    gradient_steps: int = 1
    policy_delay: int = 2
    target_policy_noise: float = 0.2
    target_noise_clip: float = 0.5
    hidden: tuple = (256, 256)
    buffer_capacity: int = 1000
    actor_final_scale: float = 1e-3
    reward_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        positive = ("learning_rate", "batch_size", "tau", "train_freq", "gradient_steps",
                    "policy_delay", "buffer_capacity")
        for name in positive:
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.discount <= 1:
            raise ValueError("discount must be in [0, 1]")
        if self.learning_starts < 0 or self.target_policy_noise < 0 or self.target_noise_clip < 0:
            raise ValueError("learning_starts and noise settings must be non-negative")
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))


class ReplayBuffer:
    """Fixed-capacity FIFO of transitions, sampled uniformly with replacement."""

    def __init__(self, capacity: int, obs_dim: int, action_dim: int):
        self.capacity = int(capacity)
        self.obs = np.zeros((capacity, obs_dim))
        self.actions = np.zeros((capacity, action_dim))
        self.rewards = np.zeros(capacity)
        self.next_obs = np.zeros((capacity, obs_dim))
        self.dones = np.zeros(capacity)
        self.pos = 0
        self.size = 0

    def __len__(self) -> int:
        return self.size

    def add(self, obs, action, reward, next_obs, done) -> None:
        i = self.pos
        self.obs[i] = obs
        self.actions[i] = action
        self.rewards[i] = reward
        self.next_obs[i] = next_obs
        self.dones[i] = float(done)
        self.pos = (i + 1) % self.capacity
        self.size = min(self.size + 1, self.capacity)

    def sample(self, batch_size: int, rng: np.random.Generator) -> Dict[str, np.ndarray]:
        if self.size < batch_size:
            raise BufferUnderflow(f"{self.size} transitions stored, batch needs {batch_size}")
        idx = rng.integers(0, self.size, size=batch_size)
        return {"obs": self.obs[idx], "actions": self.actions[idx], "rewards": self.rewards[idx],
                "next_obs": self.next_obs[idx], "dones": self.dones[idx]}


class Td3Agent:
    """Actor, twin critics, their targets and optimizers.

    Stored and sampled actions are normalized (``u = a / bounds``).
    """

    def __init__(self, obs_dim: int, action_bounds, config: Td3Config = Td3Config(),
                 rng: Optional[np.random.Generator] = None):
        self.config = config
        self.bounds = np.asarray(action_bounds, dtype=float)
        self.action_dim = self.bounds.size
        self.obs_dim = obs_dim
        self.rng = np.random.default_rng(config.seed) if rng is None else rng
        hidden = config.hidden
        self.actor = Mlp((obs_dim, *hidden, self.action_dim), "tanh", self.rng,
                         final_scale=config.actor_final_scale)
        self.critic1 = Mlp((obs_dim + self.action_dim, *hidden, 1), "identity", self.rng)
        self.critic2 = Mlp((obs_dim + self.action_dim, *hidden, 1), "identity", self.rng)
        self.actor_target = self.actor.copy()
        self.critic1_target = self.critic1.copy()
        self.critic2_target = self.critic2.copy()
        lr = config.learning_rate
        self.actor_opt = Adam(self.actor.params, lr)
        self.critic1_opt = Adam(self.critic1.params, lr)
        self.critic2_opt = Adam(self.critic2.params, lr)
        self.n_updates = 0
        self.n_actor_updates = 0

    def policy(self, obs) -> np.ndarray:
        """Normalized deterministic action(s)."""
        return self.actor(obs)

    def select_action(self, obs) -> np.ndarray:
        """Environment-unit action ``bounds * tanh(actor(obs))``, no exploration noise."""
        return self.bounds * self.policy(obs)[0]

    def random_action(self) -> np.ndarray:
        return self.rng.uniform(-self.bounds, self.bounds)

    def critic_value(self, obs, action_normalized, which: int = 1) -> np.ndarray:
        net = self.critic1 if which == 1 else self.critic2
        x = np.concatenate([np.atleast_2d(obs), np.atleast_2d(action_normalized)], axis=1)
        return net(x)[:, 0]

    def smoothed_target_actions(self, next_obs) -> np.ndarray:
        cfg = self.config
        a = self.actor_target(next_obs)
        noise = self.rng.normal(0.0, cfg.target_policy_noise, size=a.shape)
        noise = np.clip(noise, -cfg.target_noise_clip, cfg.target_noise_clip)
        return np.clip(a + noise, -1.0, 1.0)

    def td_target(self, batch: Dict[str, np.ndarray]) -> np.ndarray:
        """Clipped double-Q target with target-policy smoothing."""
        next_obs = np.atleast_2d(batch["next_obs"])
        a_next = self.smoothed_target_actions(next_obs)
        x = np.concatenate([next_obs, a_next], axis=1)
        q = np.minimum(self.critic1_target(x)[:, 0], self.critic2_target(x)[:, 0])
        return batch["rewards"] + self.config.discount * (1.0 - batch["dones"]) * q

    def train_step(self, buffer: ReplayBuffer) -> Dict[str, float]:
        cfg = self.config
        batch = buffer.sample(cfg.batch_size, self.rng)
        y = self.td_target(batch)
        x = np.concatenate([batch["obs"], batch["actions"]], axis=1)
        n = len(y)

        critic_loss = 0.0
        for net, opt in ((self.critic1, self.critic1_opt), (self.critic2, self.critic2_opt)):
            q, cache = net.forward(x, return_cache=True)
            err = q[:, 0] - y
            critic_loss += float(np.mean(err ** 2))
            grads, _ = net.backward(cache, (2.0 / n) * err[:, None])
            opt.step(grads)
        self.n_updates += 1

        actor_loss = math.nan
        if self.n_updates % cfg.policy_delay == 0:
            obs = batch["obs"]
            u, a_cache = self.actor.forward(obs, return_cache=True)
            q, c_cache = self.critic1.forward(np.concatenate([obs, u], axis=1),
                                              return_cache=True)
            actor_loss = -float(np.mean(q))
            _, dx = self.critic1.backward(c_cache, np.full_like(q, -1.0 / n))
            grads, _ = self.actor.backward(a_cache, dx[:, self.obs_dim:])
            self.actor_opt.step(grads)
            self.n_actor_updates += 1
            for target, online in ((self.actor_target, self.actor),
                                   (self.critic1_target, self.critic1),
                                   (self.critic2_target, self.critic2)):
                target.soft_update_from(online, cfg.tau)
        return {"critic_loss": critic_loss, "actor_loss": actor_loss}


@dataclass
class TrainingLog:
    """Per-episode record of one training run."""

    seed: int
    rows: List[Dict[str, float]] = field(default_factory=list)
    agent: Optional[Td3Agent] = field(default=None, repr=False, compare=False)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    def final_design(self):
        last = self.rows[-1]
        return last["alpha"], last["zeta"]

    def write_csv(self, path, header_comment: str | None = None) -> None:
        with open(path, "w", newline="") as fh:
            if header_comment:
                fh.write(f"# {header_comment}\n")
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(LOG_FIELDS)
            for r in self.rows:
                w.writerow([r["seed"], r["episode"]] +
                           [format_float(r[k]) for k in LOG_FIELDS[2:]])

    @classmethod
    def read_csv(cls, path) -> "TrainingLog":
        with open(path) as fh:
            lines = [ln for ln in fh if not ln.startswith("#")]
        reader = csv.DictReader(lines)
        rows = []
        for r in reader:
            row = {k: float(r[k]) for k in LOG_FIELDS}
            row["seed"] = int(r["seed"])
            row["episode"] = int(r["episode"])
            rows.append(row)
        seed = rows[0]["seed"] if rows else 0
        return cls(seed, rows)


def format_float(x: float) -> str:
    """17 significant digits: round-trips every double."""
    return f"{float(x):.17g}"


def train_run(env, config: Td3Config = Td3Config(), episodes: int = 1000,
              agent: Optional[Td3Agent] = None) -> TrainingLog:
    """Train one agent on a one-step environment for ``episodes`` episodes.

    The first ``config.learning_starts`` episodes use uniformly random actions;
    afterwards the actor picks the action and one training step follows every
    episode.
    """
    if agent is None:
        agent = Td3Agent(env.obs_dim, env.action_bounds, config)
    buffer = ReplayBuffer(config.buffer_capacity, env.obs_dim, agent.action_dim)
    log = TrainingLog(config.seed, agent=agent)
    for ep in range(episodes):
        obs = env.reset()
        if ep < config.learning_starts:
            action = agent.random_action()
        else:
            action = agent.select_action(obs)
        next_obs, reward, done, info = env.step(action)
        buffer.add(obs, action / agent.bounds, config.reward_scale * reward, next_obs, done)

        losses = {"critic_loss": math.nan, "actor_loss": math.nan}
        if ep >= config.learning_starts and (ep + 1) % config.train_freq == 0:
            if len(buffer) >= config.batch_size:
                for _ in range(config.gradient_steps):
                    losses = agent.train_step(buffer)
        log.rows.append({"seed": config.seed, "episode": ep, "a_alpha": float(action[0]),
                         "a_zeta": float(action[1]), "alpha": float(info["alpha"]),
                         "zeta": float(info["zeta"]), "apex": float(info["apex"]),
                         "reward": float(reward), **losses})
    return log

