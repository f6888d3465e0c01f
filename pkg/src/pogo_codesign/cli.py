"""Command-line entry point: ``pogo-codesign <subcommand> [options]``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from .command import tune_delay
from .errors import PogoError
from .experiment import (ExperimentConfig, format_report, report, run_experiment,
                         write_report_csv, write_trajectory_csv)
from .sim import DesignParams, simulate, apex_height
from .sweep import DesignGrid, sweep

REWARD_FLAGS = {"max": "max_height", "target": "specified_height"}


def _load_config(args) -> ExperimentConfig:
    config = ExperimentConfig.load(args.config) if args.config else ExperimentConfig()
    overrides = {}
    if getattr(args, "space", None):
        overrides["space"] = args.space
    if getattr(args, "reward", None):
        overrides["reward"] = REWARD_FLAGS[args.reward]
    if getattr(args, "episodes", None) is not None:
        overrides["episodes"] = args.episodes
    if getattr(args, "seeds", None) is not None:
        overrides["seeds"] = list(range(args.seeds))
    if getattr(args, "seed", None) is not None:
        overrides["seeds"] = [args.seed]
    if getattr(args, "out_dir", None):
        overrides["out_dir"] = args.out_dir
    if getattr(args, "workers", None) is not None:
        overrides["workers"] = args.workers
    data = config.to_dict()
    data.update(overrides)
    return ExperimentConfig.from_dict(data)


def cmd_simulate(args) -> int:
    config = _load_config(args)
    space = config.design_space
    alpha = space.alpha_nom if args.alpha is None else args.alpha
    zeta = space.zeta_nom if args.zeta is None else args.zeta
    traj = simulate(DesignParams().with_design(alpha, zeta), config.make_command(),
                    config.sim_config())
    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    write_trajectory_csv(traj, out, f"fingerprint={config.fingerprint()} alpha={alpha!r} "
                                    f"zeta={zeta!r}")
    print(f"apex {apex_height(traj):.6g} m -> {out}")
    return 0


def cmd_tune(args) -> int:
    config = _load_config(args)
    grid = np.round(np.arange(args.start, args.stop + 0.5 * args.step, args.step), 9)
    params = DesignParams().with_design(config.design_space.alpha_nom,
                                        config.design_space.zeta_nom)
    delta_t, apex = tune_delay(params, config.sim_config(), grid)
    command = {**config.command, "delta_t": float(delta_t)}
    print(json.dumps({"command": command, "apex": apex}, indent=2))
    if args.out:
        data = config.to_dict()
        data["command"] = command
        data.pop("out_dir")
        data.pop("workers")
        Path(args.out).write_text(json.dumps(data, indent=2, sort_keys=True) + "\n")
    return 0


def cmd_sweep(args) -> int:
    config = _load_config(args)
    grid = DesignGrid.for_space(config.design_space, args.n, args.n)
    surf = sweep(grid, config.make_command(), config.sim_config(), workers=config.workers)
    out = Path(args.out or f"{config.out_dir}/surface_{config.space}.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    surf.write_csv(out)
    i, j = np.unravel_index(np.argmax(surf.heights), surf.heights.shape)
    print(f"max apex {surf.heights[i, j]:.6g} m at alpha={grid.alphas[i]:.6g}, "
          f"zeta={grid.zetas[j]:.6g} -> {out}")
    return 0


def cmd_train(args) -> int:
    config = _load_config(args)
    stats = run_experiment(config, plots=not args.no_plots)
    (ma, mz), (sa, sz) = stats.final_mean, stats.final_std
    print(f"{config.space}/{config.reward}: alpha {ma:.6g} +- {sa:.3g}, "
          f"zeta {mz:.6g} +- {sz:.3g} -> {config.out_dir}")
    return 0


def cmd_report(args) -> int:
    rows = report(args.surfaces, args.runs)
    text = format_report(rows)
    print(text, end="")
    if args.out:
        write_report_csv(rows, args.out)
    return 0


def cmd_plot(args) -> int:
    from . import plotting
    for run in args.run or []:
        for p in plotting.plot_run(run):
            print(p)
    for s in args.surface or []:
        print(plotting.plot_surface(s))
    for t in args.trajectory or []:
        print(plotting.plot_trajectory(t))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pogo-codesign", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, train=False):
        p.add_argument("--config", help="JSON experiment config")
        p.add_argument("--space", choices=["narrow", "broad"])
        p.add_argument("--out-dir")
        p.add_argument("--workers", type=int)
        if train:
            p.add_argument("--reward", choices=sorted(REWARD_FLAGS))
            p.add_argument("--episodes", type=int)
            g = p.add_mutually_exclusive_group()
            g.add_argument("--seed", type=int, help="train a single seed")
            g.add_argument("--seeds", type=int, help="train seeds 0..N-1")

    p = sub.add_parser("simulate", help="simulate one design, write a trajectory CSV")
    common(p)
    p.add_argument("--alpha", type=float)
    p.add_argument("--zeta", type=float)
    p.add_argument("--out", default="trajectory.csv")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("tune-command", help="choose the pause of the jump command")
    common(p)
    p.add_argument("--start", type=float, default=0.0)
    p.add_argument("--stop", type=float, default=0.5)
    p.add_argument("--step", type=float, default=0.001)
    p.add_argument("--out", help="write a config file with the tuned command")
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("sweep", help="apex-height surface over the design space")
    common(p)
    p.add_argument("--n", type=int, default=60, help="points per axis")
    p.add_argument("--out")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("train", help="multi-seed design learning")
    common(p, train=True)
    p.add_argument("--no-plots", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("report", help="compare runs with sweep surfaces")
    p.add_argument("--surfaces", nargs="+", required=True)
    p.add_argument("--runs", nargs="+", required=True)
    p.add_argument("--out")
    p.set_defaults(func=cmd_report)

    p = sub.add_parser("plot", help="render SVG figures from CSV artifacts")
    p.add_argument("--run", nargs="*")
    p.add_argument("--surface", nargs="*")
    p.add_argument("--trajectory", nargs="*")
    p.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PogoError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
