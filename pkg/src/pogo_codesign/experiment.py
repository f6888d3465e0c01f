"""End-to-end experiments: multi-seed training, aggregation and reports.

A run directory looks like::

    <out_dir>/
        manifest.json        config, config hash, command fingerprint, seed status
        logs/seed_0000.csv   per-episode training log of one seed
        aggregate.csv        per-episode mean/std across seeds
        final_designs.csv    last-episode design of every seed
        summary.csv          final mean/std of the design (and its apex)

Every CSV starts with a ``# config_hash=... fingerprint=...`` comment line.
"""
from __future__ import annotations

import hashlib
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Sequence

import numpy as np

from .command import JumpCommand, make_command
from .env import DesignEnv, DesignSpace, RewardCase, TARGET_HEIGHT, specified_height_reward
from .errors import ConfigError, FingerprintMismatch, PogoError
from .sim import DesignParams, SimConfig, apex_height, simulate
from .sweep import PerformanceSurface, argmax_design, fingerprint
from .td3 import Td3Config, TrainingLog, format_float, train_run

log = logging.getLogger(__name__)

# Pause found by tune_delay on the nominal narrow design (0..0.5 s, 1 ms grid).
TUNED_DELTA_T = 0.077

# Rewards fed to the learner are multiplied by this; apex in metres -> centimetres.
MAX_HEIGHT_REWARD_SCALE = 100.0

# Published learned designs (mean, std), listed beside ours in reports.
REFERENCE_DESIGNS = {
    ("narrow", "max_height"): {"alpha": (3.62e3, 3.82e1), "zeta": (3.37e-4, 2.11e-3)},
    ("narrow", "specified_height"): {"alpha": (7.74e3, 1.24e3), "zeta": (4.55e-3, 6.49e-3)},
    ("broad", "max_height"): {"alpha": (3.55e3, 4.86e1), "zeta": (7.53e-3, 8.86e-6)},
    ("broad", "specified_height"): {"alpha": (7.07e3, 2.16e2), "zeta": (7.54e-3, 3.27e-5)},
}


def default_command() -> Dict[str, float]:
    return {"delta_1": 0.008, "delta_2": 0.008, "delta_t": TUNED_DELTA_T,
            "accel_mag": 10.0, "x_a_0": 0.008}


def _default_td3() -> Dict[str, object]:
    cfg = asdict(Td3Config())
    cfg.pop("seed")
    cfg.pop("learning_starts")  # set from ``rollout``
    cfg["hidden"] = list(cfg["hidden"])
    cfg["reward_scale"] = None  # None: chosen from the reward case
    return cfg


@dataclass
class ExperimentConfig:
    space: str = "narrow"
    reward: str = "max_height"
    x_s: float = TARGET_HEIGHT
    episodes: int = 1000
    rollout: int = 100
    seeds: List[int] = field(default_factory=lambda: list(range(10)))
    command: Dict[str, float] = field(default_factory=default_command)
    sim: Dict[str, float] = field(default_factory=lambda: {"dt": 1e-4, "t_f": 2.0})
    td3: Dict[str, object] = field(default_factory=_default_td3)
    out_dir: str = "runs/experiment"
    workers: int = 1

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.space not in ("narrow", "broad"):
            raise ConfigError(f"space must be narrow or broad, got {self.space!r}")
        if self.reward not in ("max_height", "specified_height"):
            raise ConfigError(f"reward must be max_height or specified_height, got {self.reward!r}")
        if not self.x_s > 0:
            raise ConfigError("x_s must be positive")
        if self.episodes < 0 or not 0 <= self.rollout:
            raise ConfigError("episodes and rollout must be non-negative")
        if self.rollout > self.episodes:
            raise ConfigError("rollout cannot exceed episodes")
        if not self.seeds or len(set(self.seeds)) != len(self.seeds):
            raise ConfigError("seeds must be a non-empty list without duplicates")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        unknown = set(self.td3) - {f.name for f in fields(Td3Config)}
        if unknown:
            raise ConfigError(f"unknown td3 keys {sorted(unknown)}")
        if self.td3.get("learning_starts", self.rollout) != self.rollout:
            raise ConfigError("td3.learning_starts must equal rollout (or be omitted)")
        try:
            self.make_command()
            self.sim_config()
        except (ValueError, TypeError, KeyError, PogoError) as exc:
            raise ConfigError(f"invalid command or sim settings: {exc}") from exc

    @classmethod
    def from_dict(cls, data: Dict) -> "ExperimentConfig":
        names = {f.name for f in fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        base = cls()
        merged = {}
        for name in names:
            value = data.get(name, getattr(base, name))
            if name in ("command", "sim", "td3") and name in data:
                value = {**getattr(base, name), **data[name]}
            merged[name] = value
        merged["seeds"] = [int(s) for s in merged["seeds"]]
        return cls(**merged)

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))

    def to_dict(self) -> Dict:
        return asdict(self)

    def with_overrides(self, **overrides) -> "ExperimentConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    @property
    def design_space(self) -> DesignSpace:
        return DesignSpace.named(self.space)

    @property
    def reward_case(self) -> RewardCase:
        if self.reward == "max_height":
            return RewardCase.max_height()
        return RewardCase.specified_height(self.x_s)

    def make_command(self) -> JumpCommand:
        c = self.command
        return make_command(c["delta_1"], c["delta_t"], c["delta_2"], c["accel_mag"],
                            c.get("x_a_0"))

    def sim_config(self) -> SimConfig:
        return SimConfig(float(self.sim["dt"]), float(self.sim["t_f"]))

    def td3_config(self, seed: int) -> Td3Config:
        cfg = dict(self.td3)
        if cfg.get("reward_scale") is None:
            cfg["reward_scale"] = (MAX_HEIGHT_REWARD_SCALE if self.reward == "max_height"
                                   else 1.0)
        cfg["learning_starts"] = self.rollout
        cfg["hidden"] = tuple(cfg["hidden"])
        return Td3Config(**cfg, seed=seed)

    def config_hash(self) -> str:
        """Hash of everything that affects results (not ``out_dir`` or ``workers``)."""
        d = self.to_dict()
        d.pop("out_dir")
        d.pop("workers")
        text = json.dumps(d, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()[:16]

    def fingerprint(self) -> str:
        return fingerprint(self.make_command(), self.sim_config())


@dataclass
class AggregateStats:
    seeds: List[int]
    episodes: np.ndarray
    mean: Dict[str, np.ndarray]
    std: Dict[str, np.ndarray]
    final_alpha: np.ndarray
    final_zeta: np.ndarray

    @property
    def final_mean(self):
        return float(np.mean(self.final_alpha)), float(np.mean(self.final_zeta))

    @property
    def final_std(self):
        return float(np.std(self.final_alpha)), float(np.std(self.final_zeta))


AGG_CHANNELS = ("apex", "reward", "alpha", "zeta")


def aggregate(logs: Sequence[TrainingLog]) -> AggregateStats:
    """Per-episode mean and (population) std across seeds."""
    if not logs:
        raise ValueError("no logs to aggregate")
    n = min(len(lg) for lg in logs)
    mean, std = {}, {}
    for ch in AGG_CHANNELS:
        stack = np.array([lg.column(ch)[:n] for lg in logs])
        mean[ch] = stack.mean(axis=0)
        std[ch] = stack.std(axis=0)
    finals = np.array([lg.final_design() for lg in logs]) if n else np.empty((0, 2))
    return AggregateStats([lg.seed for lg in logs], np.arange(n), mean, std,
                          finals[:, 0], finals[:, 1])


def _header(config: ExperimentConfig) -> str:
    return f"config_hash={config.config_hash()} fingerprint={config.fingerprint()}"


def run_seed(config: ExperimentConfig, seed: int) -> TrainingLog:
    env = DesignEnv(config.design_space, config.make_command(), config.sim_config(),
                    config.reward_case)
    return train_run(env, config.td3_config(seed), config.episodes)


def _run_seed_job(args):
    config, seed = args
    try:
        return seed, run_seed(config, seed), None
    except Exception as exc:  # recorded in the manifest, run continues
        return seed, None, f"{type(exc).__name__}: {exc}"


def mean_design_apex(config: ExperimentConfig, alpha: float, zeta: float) -> float:
    params = DesignParams().with_design(alpha, zeta)
    return apex_height(simulate(params, config.make_command(), config.sim_config()))


def run_experiment(config: ExperimentConfig, plots: bool = True) -> AggregateStats:
    """Train every seed, then write logs, aggregates, summary and plots."""
    out = Path(config.out_dir)
    (out / "logs").mkdir(parents=True, exist_ok=True)
    header = _header(config)
    jobs = [(config, s) for s in config.seeds]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            results = list(pool.map(_run_seed_job, jobs))
    else:
        results = [_run_seed_job(j) for j in jobs]

    logs, status = [], {}
    for seed, lg, err in results:
        if lg is None:
            log.error("seed %d failed: %s", seed, err)
            status[str(seed)] = {"complete": False, "error": err}
            continue
        lg.write_csv(out / "logs" / f"seed_{seed:04d}.csv", header)
        logs.append(lg)
        status[str(seed)] = {"complete": True}

    manifest = {"config": config.to_dict(), "config_hash": config.config_hash(),
                "fingerprint": config.fingerprint(), "seeds": status,
                "complete": all(v["complete"] for v in status.values())}
    if not logs:
        _write_json(out / "manifest.json", manifest)
        raise RuntimeError("every seed failed; see manifest.json")

    stats = aggregate(logs)
    write_aggregate_csv(stats, out / "aggregate.csv", header)
    write_final_designs_csv(logs, out / "final_designs.csv", header)
    summary = summarize(config, stats)
    write_summary_csv(summary, out / "summary.csv", header)
    manifest["summary"] = summary
    _write_json(out / "manifest.json", manifest)
    if plots:
        from .plotting import plot_run
        plot_run(out)
    return stats


def summarize(config: ExperimentConfig, stats: AggregateStats) -> Dict[str, float]:
    if len(stats.final_alpha) == 0:
        return {}
    (ma, mz), (sa, sz) = stats.final_mean, stats.final_std
    apex = mean_design_apex(config, ma, mz)
    return {"alpha_mean": ma, "alpha_std": sa, "zeta_mean": mz, "zeta_std": sz,
            "alpha_rel_std": sa / ma, "zeta_rel_std": sz / mz, "mean_design_apex": apex}


def _write_json(path, data) -> None:
    with open(path, "w") as fh:
        json.dump(data, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _comment(fh, header: Optional[str]) -> None:
    if header:
        fh.write(f"# {header}\n")


def write_aggregate_csv(stats: AggregateStats, path, header: Optional[str] = None) -> None:
    cols = [f"{ch}_{kind}" for ch in AGG_CHANNELS for kind in ("mean", "std")]
    with open(path, "w") as fh:
        _comment(fh, header)
        fh.write(",".join(["episode", *cols]) + "\n")
        for i in stats.episodes:
            vals = []
            for ch in AGG_CHANNELS:
                vals += [format_float(stats.mean[ch][i]), format_float(stats.std[ch][i])]
            fh.write(",".join([str(int(i)), *vals]) + "\n")


def read_csv_table(path) -> Dict[str, np.ndarray]:
    """Read one of our CSV files into float columns, skipping ``#`` lines."""
    with open(path) as fh:
        lines = [ln.strip() for ln in fh if ln.strip() and not ln.startswith("#")]
    names = lines[0].split(",")
    data = np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]]).reshape(-1, len(names))
    return {n: data[:, i] for i, n in enumerate(names)}


def read_header(path) -> Dict[str, str]:
    with open(path) as fh:
        first = fh.readline()
    if not first.startswith("#"):
        return {}
    return dict(item.split("=", 1) for item in first[1:].split())


def write_final_designs_csv(logs: Sequence[TrainingLog], path, header=None) -> None:
    with open(path, "w") as fh:
        _comment(fh, header)
        fh.write("seed,alpha,zeta,apex,reward\n")
        for lg in logs:
            r = lg.rows[-1]
            fh.write(f"{lg.seed},{format_float(r['alpha'])},{format_float(r['zeta'])},"
                     f"{format_float(r['apex'])},{format_float(r['reward'])}\n")


def write_summary_csv(summary: Dict[str, float], path, header=None) -> None:
    with open(path, "w") as fh:
        _comment(fh, header)
        fh.write("quantity,value\n")
        for k in sorted(summary):
            fh.write(f"{k},{format_float(summary[k])}\n")


def load_run(run_dir) -> tuple:
    """``(config, logs)`` of a finished run directory."""
    run_dir = Path(run_dir)
    with open(run_dir / "manifest.json") as fh:
        manifest = json.load(fh)
    config = ExperimentConfig.from_dict(manifest["config"])
    logs = [TrainingLog.read_csv(p) for p in sorted((run_dir / "logs").glob("seed_*.csv"))]
    return config, logs, manifest


def report(surface_paths: Sequence, run_dirs: Sequence) -> List[Dict[str, object]]:
    """Compare finished runs with the sweep oracle of their design space.

    Returns one row per run; raises :class:`FingerprintMismatch` when a run
    and the surface of its space were produced with different commands or
    integrator settings.
    """
    surfaces = {}
    for p in surface_paths:
        surf = PerformanceSurface.read_csv(p)
        surfaces[_space_of(surf)] = surf
    rows = []
    for rd in run_dirs:
        config, logs, manifest = load_run(rd)
        surf = surfaces.get(config.space)
        if surf is None:
            raise ValueError(f"no surface for space {config.space!r}")
        if surf.fingerprint != manifest["fingerprint"]:
            raise FingerprintMismatch(
                f"run {rd} ({manifest['fingerprint']}) vs surface ({surf.fingerprint})")
        rows.append(compare_with_oracle(config, aggregate(logs), surf))
    return rows


def compare_with_oracle(config: ExperimentConfig, stats: AggregateStats,
                        surface: PerformanceSurface) -> Dict[str, object]:
    summary = summarize(config, stats)
    _, _, best = argmax_design(surface)
    apex = summary["mean_design_apex"]
    ref = REFERENCE_DESIGNS[(config.space, config.reward)]
    row = {"space": config.space, "reward": config.reward, "seeds": len(stats.seeds),
           **summary, "oracle_max": best, "height_ratio": apex / best,
           "reference_alpha_mean": ref["alpha"][0], "reference_alpha_std": ref["alpha"][1],
           "reference_zeta_mean": ref["zeta"][0], "reference_zeta_std": ref["zeta"][1]}
    if config.reward == "specified_height":
        row["abs_error"], row["rel_error"] = target_error(apex, config.x_s)
        row["reward_of_mean"] = specified_height_reward(apex, config.x_s)
    return row


def target_error(apex: float, x_s: float):
    """Absolute and relative miss of the target height."""
    err = abs(apex - x_s)
    return err, err / x_s


def _space_of(surface: PerformanceSurface) -> str:
    for name in ("narrow", "broad"):
        lo, hi = DesignSpace.named(name).zeta_range
        if math.isclose(surface.grid.zeta_min, lo) and math.isclose(surface.grid.zeta_max, hi):
            return name
    raise ValueError("surface grid does not match a known design space")


def format_report(rows: Sequence[Dict[str, object]]) -> str:
    lines = []
    for r in rows:
        lines.append(f"[{r['space']} / {r['reward']}] seeds={r['seeds']}")
        lines.append(f"  learned alpha {r['alpha_mean']:.4g} +- {r['alpha_std']:.3g}"
                     f"   (reference {r['reference_alpha_mean']:.3g} +- "
                     f"{r['reference_alpha_std']:.3g})")
        lines.append(f"  learned zeta  {r['zeta_mean']:.4g} +- {r['zeta_std']:.3g}"
                     f"   (reference {r['reference_zeta_mean']:.3g} +- "
                     f"{r['reference_zeta_std']:.3g})")
        lines.append(f"  mean-design apex {r['mean_design_apex']:.5g} m, oracle max "
                     f"{r['oracle_max']:.5g} m, ratio {r['height_ratio']:.4f}")
        if "abs_error" in r:
            lines.append(f"  target error {r['abs_error']:.3g} m ({100 * r['rel_error']:.2f} %)")
    return "\n".join(lines) + "\n"


def write_report_csv(rows: Sequence[Dict[str, object]], path) -> None:
    keys = sorted({k for r in rows for k in r})
    with open(path, "w") as fh:
        fh.write(",".join(keys) + "\n")
        for r in rows:
            vals = [format_float(r[k]) if isinstance(r.get(k), float) else str(r.get(k, ""))
                    for k in keys]
            fh.write(",".join(vals) + "\n")


def write_trajectory_csv(traj, path, header: Optional[str] = None) -> None:
    with open(path, "w") as fh:
        _comment(fh, header)
        for t, kind in traj.events:
            fh.write(f"# event {format_float(t)} {kind}\n")
        fh.write("t,x,x_dot,x_a,x_a_dot\n")
        for row in zip(traj.t, traj.x, traj.x_dot, traj.x_a, traj.x_a_dot):
            fh.write(",".join(format_float(v) for v in row) + "\n")
