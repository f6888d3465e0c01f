"""Brute-force apex-height surfaces over the (spring constant, damping) plane."""
from __future__ import annotations

import hashlib
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from typing import List, Tuple

import numpy as np

from .command import JumpCommand
from .env import DesignSpace
from .errors import NonFiniteState
from .sim import DesignParams, SimConfig, apex_height, simulate
from .td3 import format_float


@dataclass(frozen=True)
class DesignGrid:
    """Linearly spaced (spring constant, damping ratio) grid.

    An axis with a single point must have ``min == max``; it is used for
    spot checks of one design.
    """

    alpha_min: float
    alpha_max: float
    n_alpha: int
    zeta_min: float
    zeta_max: float
    n_zeta: int

    def __post_init__(self):
        for lo, hi, n in ((self.alpha_min, self.alpha_max, self.n_alpha),
                          (self.zeta_min, self.zeta_max, self.n_zeta)):
            if n < 1:
                raise ValueError("need at least one point per axis")
            if n == 1 and lo != hi:
                raise ValueError("a single-point axis needs min == max")
            if n > 1 and not lo < hi:
                raise ValueError("grid ranges must satisfy min < max")

    @classmethod
    def for_space(cls, space: DesignSpace, n_alpha: int = 60, n_zeta: int = 60) -> "DesignGrid":
        return cls(*space.alpha_range, n_alpha, *space.zeta_range, n_zeta)

    @classmethod
    def single(cls, alpha: float, zeta: float) -> "DesignGrid":
        return cls(alpha, alpha, 1, zeta, zeta, 1)

    @property
    def alphas(self) -> np.ndarray:
        return np.linspace(self.alpha_min, self.alpha_max, self.n_alpha)

    @property
    def zetas(self) -> np.ndarray:
        return np.linspace(self.zeta_min, self.zeta_max, self.n_zeta)


@dataclass
class PerformanceSurface:
    """Apex heights, ``heights[i, j]`` at ``(alphas[i], zetas[j])``."""

    grid: DesignGrid
    heights: np.ndarray
    fingerprint: str

    def write_csv(self, path) -> None:
        g = self.grid
        with open(path, "w") as fh:
            fh.write(f"# fingerprint={self.fingerprint}\n")
            fh.write(f"# grid={json.dumps(asdict(g), sort_keys=True)}\n")
            fh.write("alpha,zeta,apex_height\n")
            for i, a in enumerate(g.alphas):
                for j, z in enumerate(g.zetas):
                    fh.write(f"{format_float(a)},{format_float(z)},"
                             f"{format_float(self.heights[i, j])}\n")

    @classmethod
    def read_csv(cls, path) -> "PerformanceSurface":
        meta = {}
        rows = []
        with open(path) as fh:
            for line in fh:
                if line.startswith("#"):
                    key, _, value = line[1:].strip().partition("=")
                    meta[key] = value
                elif line.startswith("alpha"):
                    continue
                elif line.strip():
                    rows.append([float(v) for v in line.split(",")])
        grid = DesignGrid(**json.loads(meta["grid"]))
        heights = np.array(rows)[:, 2].reshape(grid.n_alpha, grid.n_zeta)
        return cls(grid, heights, meta["fingerprint"])


def fingerprint(command: JumpCommand, sim: SimConfig, base: DesignParams = DesignParams()) -> str:
    """Short hash binding results to the command, integrator and fixed hardware."""
    payload = {
        "command": {"accel_mag": command.accel_mag, "delta_1": command.delta_1,
                    "delta_2": command.delta_2, "delta_t": command.delta_t,
                    "x_a_0": command.x_a_0, "amplitudes": list(command.sequence.amplitudes),
                    "times": list(command.sequence.times)},
        "sim": {"dt": sim.dt, "t_f": sim.t_f},
        "base": {k: v for k, v in asdict(base).items() if k not in ("alpha", "zeta")},
    }
    text = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _row(args) -> List[float]:
    alpha, zetas, command, sim, base = args
    out = []
    for zeta in zetas:
        try:
            out.append(apex_height(simulate(base.with_design(alpha, zeta), command, sim)))
        except NonFiniteState as exc:
            raise NonFiniteState(f"sweep cell alpha={alpha!r}, zeta={zeta!r}: {exc}") from exc
    return out


def sweep(grid: DesignGrid, command: JumpCommand, sim: SimConfig = SimConfig(),
          base: DesignParams = DesignParams(), workers: int = 1) -> PerformanceSurface:
    """Simulate every grid cell; rows are returned in grid order for any ``workers``."""
    jobs = [(float(a), [float(z) for z in grid.zetas], command, sim, base) for a in grid.alphas]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            rows = list(pool.map(_row, jobs))
    else:
        rows = [_row(job) for job in jobs]
    return PerformanceSurface(grid, np.array(rows), fingerprint(command, sim, base))


def argmax_design(surface: PerformanceSurface) -> Tuple[float, float, float]:
    """Best cell; ties go to the smaller damping ratio, then the smaller spring constant."""
    h = surface.heights
    best = np.max(h)
    ii, jj = np.nonzero(h == best)
    order = np.lexsort((ii, jj))
    i, j = int(ii[order[0]]), int(jj[order[0]])
    return float(surface.grid.alphas[i]), float(surface.grid.zetas[j]), float(best)


def target_band(surface: PerformanceSurface, x_s: float, tol: float):
    """Cells whose apex is within relative ``tol`` of ``x_s``, as ``(alpha, zeta, h)``."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    g = surface.grid
    ii, jj = np.nonzero(np.abs(surface.heights - x_s) <= tol * x_s)
    return [(float(g.alphas[i]), float(g.zetas[j]), float(surface.heights[i, j]))
            for i, j in zip(ii, jj)]
