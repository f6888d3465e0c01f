"""Bang-bang jumping command built as a step convolved with six impulses.

The actuator first moves ``delta_1`` down the rod with a minimum-time
bang-bang profile, waits ``delta_t`` and then moves ``delta_2`` back up.
Written as input shaping, the acceleration is a step of height ``accel_mag``
convolved with impulses of fixed amplitudes ``[-1, 2, -1, 1, -2, 1]``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence, Tuple

import numpy as np

from . import _kernels
from .errors import SaturationViolation, StrokeViolation
from .sim import ACCEL_MAX, STROKE_MAX, VEL_MAX, DesignParams, SimConfig, apex_height, simulate

JUMP_AMPLITUDES = (-1.0, 2.0, -1.0, 1.0, -2.0, 1.0)


@dataclass(frozen=True)
class ImpulseSequence:
    amplitudes: Tuple[float, ...]
    times: Tuple[float, ...]

    def __post_init__(self):
        if len(self.amplitudes) != len(self.times):
            raise ValueError("amplitudes and times differ in length")
        if self.times and self.times[0] != 0.0:
            raise ValueError("first impulse must be at t = 0")
        if any(b < a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("impulse times must be nondecreasing")


def bang_bang_duration(delta: float, accel_mag: float) -> float:
    """Time to move ``delta`` from rest to rest at constant ``accel_mag``."""
    return 2.0 * math.sqrt(delta / accel_mag)


def times_from_geometry(delta_1: float, delta_t: float, delta_2: float,
                        accel_mag: float = ACCEL_MAX, *, stroke_max: float = STROKE_MAX,
                        vel_max: float = VEL_MAX) -> ImpulseSequence:
    """Impulse times for two bang-bang moves separated by a pause.

    Raises
    ------
    StrokeViolation
        If either move is longer than the stroke or not positive.
    SaturationViolation
        If the peak speed ``sqrt(accel_mag * delta)`` exceeds ``vel_max``.
    """
    if not accel_mag > 0:
        raise ValueError("accel_mag must be positive")
    if delta_t < 0:
        raise ValueError("delta_t must be non-negative")
    for name, delta in (("delta_1", delta_1), ("delta_2", delta_2)):
        if not 0 < delta <= stroke_max:
            raise StrokeViolation(f"{name}={delta} outside (0, {stroke_max}]")
        t_move = bang_bang_duration(delta, accel_mag)
        peak = accel_mag * t_move / 2.0
        if peak > vel_max:
            raise SaturationViolation(f"{name} peak speed {peak:.6g} m/s exceeds {vel_max} m/s")
    t1 = bang_bang_duration(delta_1, accel_mag)
    t2 = bang_bang_duration(delta_2, accel_mag)
    times = (0.0, t1 / 2.0, t1, t1 + delta_t, t1 + delta_t + t2 / 2.0, t1 + delta_t + t2)
    return ImpulseSequence(JUMP_AMPLITUDES, times)


@dataclass(frozen=True)
class JumpCommand:
    """Fixed actuator acceleration profile.

    The piecewise profile is derived from the stroke geometry
    (``delta_1``, ``delta_t``, ``delta_2``, ``accel_mag``); ``sequence`` is the
    equivalent impulse-sequence description and is what
    :func:`convolution_check` compares against.  Positions are measured from
    the bottom of the stroke, so ``x_a_0 = stroke_max`` starts at the top.
    """

    accel_mag: float
    sequence: ImpulseSequence
    delta_1: float
    delta_2: float
    delta_t: float
    x_a_0: float

    @cached_property
    def _tables(self):
        a = self.accel_mag
        if a == 0.0:
            zeros = np.zeros(6)
            pos = np.full(6, self.x_a_0)
            return zeros, np.zeros(5), pos, zeros.copy()
        t1 = bang_bang_duration(self.delta_1, a)
        t2 = bang_bang_duration(self.delta_2, a)
        bounds = np.array([0.0, t1 / 2.0, t1, t1 + self.delta_t,
                           t1 + self.delta_t + t2 / 2.0, t1 + self.delta_t + t2])
        accels = np.array([-a, a, 0.0, a, -a])
        x0, d1, d2 = self.x_a_0, self.delta_1, self.delta_2
        pos = np.array([x0, x0 - d1 / 2.0, x0 - d1, x0 - d1, x0 - d1 + d2 / 2.0, x0 - d1 + d2])
        vel = np.array([0.0, -a * t1 / 2.0, 0.0, 0.0, a * t2 / 2.0, 0.0])
        for arr in (bounds, accels, pos, vel):
            arr.flags.writeable = False
        return bounds, accels, pos, vel

    def tables(self):
        """Phase boundaries, phase accelerations, and boundary positions/velocities."""
        return self._tables

    @property
    def duration(self) -> float:
        return float(self._tables[0][-1])

    @property
    def peak_speed(self) -> float:
        return float(np.max(np.abs(self._tables[3])))


def make_command(delta_1: float = STROKE_MAX, delta_t: float = 0.0,
                 delta_2: float = STROKE_MAX, accel_mag: float = ACCEL_MAX,
                 x_a_0: float | None = None, *, stroke_max: float = STROKE_MAX,
                 vel_max: float = VEL_MAX, accel_max: float = ACCEL_MAX) -> JumpCommand:
    """Build and validate a jump command against the actuator limits."""
    if accel_mag > accel_max:
        raise SaturationViolation(f"accel_mag {accel_mag} exceeds limit {accel_max}")
    sequence = times_from_geometry(delta_1, delta_t, delta_2, accel_mag,
                                   stroke_max=stroke_max, vel_max=vel_max)
    if x_a_0 is None:
        x_a_0 = stroke_max
    lowest = x_a_0 - delta_1
    final = lowest + delta_2
    if lowest < 0.0 or x_a_0 > stroke_max or final > stroke_max:
        raise StrokeViolation(
            f"actuator path {x_a_0} -> {lowest} -> {final} leaves [0, {stroke_max}]")
    return JumpCommand(accel_mag, sequence, delta_1, delta_2, delta_t, x_a_0)


def command_for(params: DesignParams, delta_t: float, delta_1: float | None = None,
                delta_2: float | None = None) -> JumpCommand:
    """Full-stroke command using the limits stored in ``params``."""
    d1 = params.stroke_max if delta_1 is None else delta_1
    d2 = params.stroke_max if delta_2 is None else delta_2
    return make_command(d1, delta_t, d2, params.accel_max, stroke_max=params.stroke_max,
                        vel_max=params.vel_max, accel_max=params.accel_max)


def idle_command(x_a_0: float = STROKE_MAX) -> JumpCommand:
    """A command that never moves the actuator."""
    return JumpCommand(0.0, ImpulseSequence((), ()), 0.0, 0.0, 0.0, x_a_0)


def accel_at(cmd: JumpCommand, t: float) -> float:
    """Commanded actuator acceleration; phases are half-open ``[t_i, t_i+1)``."""
    bounds, accels, _, _ = cmd.tables()
    return float(_kernels.command_accel(float(t), bounds, accels))


def actuator_kinematics(cmd: JumpCommand, t: float) -> Tuple[float, float]:
    """Closed-form actuator position and velocity at time ``t``."""
    x, v = _kernels.command_kinematics(float(t), *cmd.tables())
    return float(x), float(v)


def convolution_check(cmd: JumpCommand, dt: float) -> bool:
    """Compare the sampled step-times-impulses convolution with :func:`accel_at`.

    Grid points that coincide (to ``1e-6 dt``) with a switching instant of
    either description are skipped; every other point must match exactly.
    """
    if not dt > 0:
        raise ValueError("dt must be positive")
    seq = cmd.sequence
    switch = np.concatenate([np.asarray(seq.times, float), cmd.tables()[0]])
    horizon = max(switch.max(), 0.0)
    n = int(math.ceil(horizon / dt)) + 20
    grid = np.arange(n) * dt

    impulses = np.zeros(n)
    for amp, t_i in zip(seq.amplitudes, seq.times):
        k = int(np.searchsorted(grid, t_i, side="left"))
        if k < n:
            impulses[k] += amp
    step = np.full(n, cmd.accel_mag)
    shaped = np.convolve(impulses, step)[:n]

    direct = np.array([accel_at(cmd, t) for t in grid])
    near = np.min(np.abs(grid[:, None] - switch[None, :]), axis=1) < 1e-6 * dt
    return bool(np.all(shaped[~near] == direct[~near]))


def tune_delay(params: DesignParams, sim: SimConfig,
               delay_grid: Sequence[float]) -> Tuple[float, float]:
    """Pick the pause that maximizes apex height for ``params``.

    Both moves use the full stroke.  Ties go to the smaller pause.
    """
    delays = sorted(float(d) for d in delay_grid)
    if not delays:
        raise ValueError("delay_grid is empty")
    best = None
    for d in delays:
        h = apex_height(simulate(params, command_for(params, d), sim))
        if best is None or h > best[1]:
            best = (d, h)
    return best
