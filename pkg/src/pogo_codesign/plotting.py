"""Static SVG figures rendered only from the CSV artifacts of a run or sweep."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .experiment import read_csv_table  # noqa: E402
from .sweep import PerformanceSurface  # noqa: E402

plt.rcParams["svg.hashsalt"] = "pogo-codesign"

_CURVES = {
    "apex": ("Height reached during training", "apex height [m]"),
    "reward": ("Reward received during training", "reward"),
    "alpha": ("Spring constant selected during training", "spring constant [N/m]"),
    "zeta": ("Damping ratio selected during training", "damping ratio"),
}


def _save(fig, path) -> None:
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)


def plot_run(run_dir) -> list:
    """Mean +- 1 std learning curves from ``aggregate.csv``."""
    run_dir = Path(run_dir)
    table = read_csv_table(run_dir / "aggregate.csv")
    out = run_dir / "plots"
    out.mkdir(exist_ok=True)
    ep = table["episode"]
    written = []
    for ch, (title, ylabel) in _CURVES.items():
        mean, std = table[f"{ch}_mean"], table[f"{ch}_std"]
        fig, ax = plt.subplots(figsize=(6, 3.5))
        ax.plot(ep, mean, lw=1.2)
        ax.fill_between(ep, mean - std, mean + std, alpha=0.3, lw=0)
        ax.set_xlabel("episode")
        ax.set_ylabel(ylabel)
        ax.set_title(title)
        fig.tight_layout()
        path = out / f"{ch}_vs_episode.svg"
        _save(fig, path)
        written.append(path)
    return written


def plot_surface(csv_path, svg_path=None) -> Path:
    surf = PerformanceSurface.read_csv(csv_path)
    svg_path = Path(svg_path) if svg_path else Path(csv_path).with_suffix(".svg")
    g = surf.grid
    fig, ax = plt.subplots(figsize=(6, 4.5))
    mesh = ax.pcolormesh(g.zetas, g.alphas, surf.heights * 1e3, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="apex height [mm]")
    i, j = np.unravel_index(np.argmax(surf.heights), surf.heights.shape)
    ax.plot(g.zetas[j], g.alphas[i], "w*", ms=10)
    ax.set_xlabel("damping ratio")
    ax.set_ylabel("spring constant [N/m]")
    ax.set_title("Jumping performance over the design space")
    fig.tight_layout()
    _save(fig, svg_path)
    return svg_path


def plot_trajectory(csv_path, svg_path=None) -> Path:
    table = read_csv_table(csv_path)
    svg_path = Path(svg_path) if svg_path else Path(csv_path).with_suffix(".svg")
    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(6, 5), sharex=True)
    ax1.plot(table["t"], table["x"] * 1e3)
    ax1.set_ylabel("rod height [mm]")
    ax2.plot(table["t"], table["x_a"] * 1e3)
    ax2.set_ylabel("actuator position [mm]")
    ax2.set_xlabel("time [s]")
    fig.tight_layout()
    _save(fig, svg_path)
    return svg_path
