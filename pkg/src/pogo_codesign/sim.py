"""Vertical pogo-stick dynamics.

The rod rides on a nonlinear spring-damper while it touches the ground and is
ballistic otherwise.  An actuator mass slides along the rod with a prescribed
acceleration profile (see :mod:`pogo_codesign.command`); its reaction drives
the rod.  Spring compression is limited by a rigid, perfectly plastic stop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, List, Optional, Tuple

import numpy as np

from . import _kernels
from .errors import EmptyTrajectory, NonFiniteState

if TYPE_CHECKING:
    from .command import JumpCommand

# Nominal values for the physical jumper.
M_LEG = 0.175
M_ACTUATOR = 1.003
ALPHA_NOMINAL = 5760.0
BETA = 1e8
ZETA_NARROW = 1e-2
ZETA_BROAD = 7.5e-2
GRAVITY = 9.81
STROKE_MAX = 0.008
VEL_MAX = 1.0
ACCEL_MAX = 10.0
COMPRESSION_LIMIT = 0.008


@dataclass(frozen=True)
class DesignParams:
    """Physical configuration of the jumper.

    ``alpha`` and ``zeta`` are the design variables; the rest are fixed by the
    hardware.  ``compression_limit`` is a positive depth, the stop sits at
    ``x = -compression_limit``.
    """

    m_l: float = M_LEG
    m_a: float = M_ACTUATOR
    alpha: float = ALPHA_NOMINAL
    beta: float = BETA
    zeta: float = ZETA_NARROW
    g: float = GRAVITY
    stroke_max: float = STROKE_MAX
    vel_max: float = VEL_MAX
    accel_max: float = ACCEL_MAX
    compression_limit: float = COMPRESSION_LIMIT

    def __post_init__(self):
        positive = ("m_l", "m_a", "alpha", "g", "stroke_max", "vel_max",
                    "accel_max", "compression_limit")
        for name in positive:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        for name in ("beta", "zeta"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be non-negative and finite, got {value!r}")

    @property
    def m_t(self) -> float:
        return self.m_l + self.m_a

    def with_design(self, alpha: float, zeta: float) -> "DesignParams":
        return DesignParams(self.m_l, self.m_a, alpha, self.beta, zeta, self.g,
                            self.stroke_max, self.vel_max, self.accel_max,
                            self.compression_limit)


@dataclass(frozen=True)
class DerivedParams:
    m_t: float
    omega_n: float
    c: float


def damping_coefficient(params: DesignParams) -> float:
    """Viscous coefficient ``c = 2 zeta sqrt(alpha m_t)`` from the damping ratio."""
    return 2.0 * params.zeta * math.sqrt(params.alpha * params.m_t)


def derived(params: DesignParams) -> DerivedParams:
    m_t = params.m_t
    return DerivedParams(m_t=m_t, omega_n=math.sqrt(params.alpha / m_t),
                         c=damping_coefficient(params))


@dataclass(frozen=True)
class PogoState:
    t: float
    x: float
    x_dot: float
    x_a: float
    x_a_dot: float


@dataclass(frozen=True)
class SimConfig:
    dt: float = 1e-4
    t_f: float = 2.0

    def __post_init__(self):
        if not (self.dt > 0 and self.t_f > 0):
            raise ValueError("dt and t_f must be positive")
        n = round(self.t_f / self.dt)
        if n < 1 or abs(n * self.dt - self.t_f) > 1e-9 * self.t_f:
            raise ValueError(f"t_f={self.t_f} is not a whole number of dt={self.dt} steps")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_f / self.dt))


@dataclass
class Trajectory:
    """Uniformly sampled rod and actuator channels of one simulation."""

    dt: float
    t: np.ndarray
    x: np.ndarray
    x_dot: np.ndarray
    x_a: np.ndarray
    x_a_dot: np.ndarray
    events: List[Tuple[float, str]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.t)

    def __getitem__(self, i: int) -> PogoState:
        return PogoState(float(self.t[i]), float(self.x[i]), float(self.x_dot[i]),
                         float(self.x_a[i]), float(self.x_a_dot[i]))

    @property
    def samples(self) -> List[PogoState]:
        return [self[i] for i in range(len(self))]

    def event_times(self, kind: str) -> List[float]:
        return [t for t, k in self.events if k == kind]

    @classmethod
    def from_states(cls, dt: float, states) -> "Trajectory":
        states = list(states)
        cols = np.array([[s.t, s.x, s.x_dot, s.x_a, s.x_a_dot] for s in states],
                        dtype=float).reshape(-1, 5)
        return cls(dt, *(cols[:, j].copy() for j in range(5)))


def contact_indicator(x: float) -> int:
    """-1 while the foot is on (or in) the ground, 0 in flight."""
    return -1 if x <= 0.0 else 0


def rod_acceleration(state: PogoState, x_a_ddot: float, params: DesignParams) -> float:
    return _kernels.rod_accel(state.x, state.x_dot, x_a_ddot, params.m_t, params.m_a,
                              params.alpha, params.beta, damping_coefficient(params),
                              params.g)


def enforce_stop(state: PogoState, params: DesignParams) -> PogoState:
    x, v, hit = _kernels.apply_stop(state.x, state.x_dot, params.compression_limit)
    if not hit:
        return state
    return PogoState(state.t, x, v, state.x_a, state.x_a_dot)


def integrate_step(state: PogoState, command: "JumpCommand", params: DesignParams,
                   dt: float) -> PogoState:
    """Advance one output step of length ``dt``.

    The rod is integrated with classical RK4, split at command switching
    instants and at located touchdown, liftoff and stop crossings.  The
    actuator follows the command's closed form.
    """
    return _step_with_events(state, command, params, dt)[0]


def _step_with_events(state, command, params, dt):
    if not dt > 0:
        raise ValueError("dt must be positive")
    bounds, accels, pos, vel = command.tables()
    ev_t = np.empty(16)
    ev_k = np.empty(16, dtype=np.int8)
    t = state.t + dt
    x, v, n_ev = _kernels.hybrid_step(state.t, t, state.x, state.x_dot, params.m_t,
                                      params.m_a, params.alpha, params.beta,
                                      damping_coefficient(params), params.g,
                                      params.compression_limit, bounds, accels,
                                      ev_t, ev_k, 0)
    if not (math.isfinite(x) and math.isfinite(v)):
        raise NonFiniteState(f"non-finite rod state at t={t:.6g} (x={x}, x_dot={v})")
    xa, xad = _kernels.command_kinematics(t, bounds, accels, pos, vel)
    new = enforce_stop(PogoState(t, x, v, xa, xad), params)
    n_ev = min(n_ev, len(ev_t))
    return new, _decode_events(ev_t[:n_ev], ev_k[:n_ev])


_EVENT_NAMES = {_kernels.EV_LIFTOFF: "liftoff", _kernels.EV_TOUCHDOWN: "touchdown",
                _kernels.EV_STOP: "stop_hit"}


def _decode_events(ev_t, ev_k) -> List[Tuple[float, str]]:
    return [(float(t), _EVENT_NAMES[int(k)]) for t, k in zip(ev_t, ev_k)]


def simulate(params: DesignParams, command: "JumpCommand",
             config: SimConfig = SimConfig(),
             initial: Optional[Tuple[float, float]] = None) -> Trajectory:
    """Integrate the jumper over ``[0, config.t_f]`` with the given command.

    ``initial`` is an optional ``(x, x_dot)`` pair; by default the rod starts at
    rest with the spring just touching the ground.  The actuator always starts
    at the command's initial position.
    """
    x0, v0 = (0.0, 0.0) if initial is None else (float(initial[0]), float(initial[1]))
    bounds, accels, pos, vel = command.tables()
    t, x, xd, xa, xad, ev_t, ev_k, n_ev, status = _kernels.simulate_loop(
        x0, v0, config.n_steps, config.dt, params.m_t, params.m_a, params.alpha,
        params.beta, damping_coefficient(params), params.g, params.compression_limit,
        bounds, accels, pos, vel)
    if status >= 0:
        raise NonFiniteState(
            f"non-finite rod state at step {status} for alpha={params.alpha!r}, "
            f"zeta={params.zeta!r} (dt={config.dt})")
    return Trajectory(config.dt, t, x, xd, xa, xad, _decode_events(ev_t[:n_ev], ev_k[:n_ev]))


def apex_height(traj: Trajectory) -> float:
    """Highest rod position over the whole trajectory."""
    if len(traj) == 0:
        raise EmptyTrajectory("trajectory has no samples")
    return float(np.max(traj.x))


def total_energy(traj: Trajectory, params: DesignParams) -> np.ndarray:
    """Kinetic + gravitational + spring energy of the lumped mass, per sample.

    Only meaningful for an idle actuator; the actuator's own kinetic energy is
    not tracked.
    """
    x = traj.x
    spring = np.where(x <= 0.0, 0.5 * params.alpha * x**2 + 0.25 * params.beta * x**4, 0.0)
    return 0.5 * params.m_t * traj.x_dot**2 + params.m_t * params.g * x + spring
