"""Compiled inner loops shared by the command and simulator modules.

One integrator step from ``t0`` to ``t1`` is split into sub-steps so that no
RK4 stage ever straddles a discontinuity of the right-hand side:

* command switching instants (known in advance),
* touchdown / liftoff (``x`` crossing 0, where the spring-damper switches),
* arrival at the compression stop (``x`` reaching ``-limit``).

Crossings are located by bisection on the sub-step length.  The contact mode
at the start of every step is recovered from the state alone, so stepping one
step at a time reproduces a full run bit for bit.
"""
import numpy as np
from numba import njit

FLIGHT = 0
CONTACT = 1
STUCK = 2

EV_LIFTOFF = 0
EV_TOUCHDOWN = 1
EV_STOP = 2

_BISECT_ITERS = 60
_MAX_SUBSTEPS = 64


@njit(cache=True)
def phase_index(t, bounds):
    """Index of the command phase containing ``t``, or -1 before / 5 after."""
    if t < bounds[0]:
        return -1
    for k in range(5):
        if t < bounds[k + 1]:
            return k
    return 5


@njit(cache=True)
def next_switch(t, bounds):
    """First command boundary strictly after ``t`` (inf when none)."""
    for k in range(6):
        if bounds[k] > t:
            return bounds[k]
    return np.inf


@njit(cache=True)
def command_accel(t, bounds, accels):
    k = phase_index(t, bounds)
    if k < 0 or k > 4:
        return 0.0
    return accels[k]


@njit(cache=True)
def command_kinematics(t, bounds, accels, pos, vel):
    k = phase_index(t, bounds)
    if k < 0:
        return pos[0], 0.0
    if k > 4:
        return pos[5], 0.0
    tau = t - bounds[k]
    return pos[k] + vel[k] * tau + 0.5 * accels[k] * tau * tau, vel[k] + accels[k] * tau


@njit(cache=True)
def mode_accel(x, x_dot, xa_ddot, gamma, m_t, m_a, alpha, beta, c, g):
    spring = alpha * x + beta * (x * x * x) + c * x_dot
    return (gamma / m_t) * spring - (m_a / m_t) * xa_ddot - g


@njit(cache=True)
def rod_accel(x, x_dot, xa_ddot, m_t, m_a, alpha, beta, c, g):
    gamma = -1.0 if x <= 0.0 else 0.0
    return mode_accel(x, x_dot, xa_ddot, gamma, m_t, m_a, alpha, beta, c, g)


@njit(cache=True)
def rk4_fixed(x, v, h, u, gamma, m_t, m_a, alpha, beta, c, g):
    """Classical RK4 with the contact mode and command held fixed."""
    half = 0.5 * h
    k1x = v
    k1v = mode_accel(x, v, u, gamma, m_t, m_a, alpha, beta, c, g)
    k2x = v + half * k1v
    k2v = mode_accel(x + half * k1x, k2x, u, gamma, m_t, m_a, alpha, beta, c, g)
    k3x = v + half * k2v
    k3v = mode_accel(x + half * k2x, k3x, u, gamma, m_t, m_a, alpha, beta, c, g)
    k4x = v + h * k3v
    k4v = mode_accel(x + h * k3x, k4x, u, gamma, m_t, m_a, alpha, beta, c, g)
    x_new = x + (h / 6.0) * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
    v_new = v + (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v)
    return x_new, v_new


@njit(cache=True)
def start_mode(x, v, u, limit, m_t, m_a, alpha, beta, c, g):
    if x > 0.0 or (x == 0.0 and v > 0.0):
        return FLIGHT
    if x <= -limit and v <= 0.0:
        if mode_accel(-limit, 0.0, u, -1.0, m_t, m_a, alpha, beta, c, g) <= 0.0:
            return STUCK
    return CONTACT


@njit(cache=True)
def _locate(x, v, h, u, gamma, level, above, m_t, m_a, alpha, beta, c, g):
    """Sub-step length at which ``x`` reaches ``level``.

    ``above`` says on which side of ``level`` the start lies.  Returns the
    state just past the crossing together with the crossing length.
    """
    lo = 0.0
    hi = h
    xh, vh = rk4_fixed(x, v, hi, u, gamma, m_t, m_a, alpha, beta, c, g)
    for _ in range(_BISECT_ITERS):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        xm, vm = rk4_fixed(x, v, mid, u, gamma, m_t, m_a, alpha, beta, c, g)
        crossed = (xm <= level) if above else (xm > level)
        if crossed:
            hi = mid
            xh = xm
            vh = vm
        else:
            lo = mid
    return hi, xh, vh


@njit(cache=True)
def _record(ev_t, ev_k, n_ev, t, kind):
    if n_ev < ev_t.shape[0]:
        ev_t[n_ev] = t
        ev_k[n_ev] = kind
    return n_ev + 1


@njit(cache=True)
def hybrid_step(t0, t1, x, v, m_t, m_a, alpha, beta, c, g, limit, bounds, accels,
                ev_t, ev_k, n_ev):
    """Advance the rod from ``t0`` to ``t1``; returns ``(x, v, n_ev)``."""
    t = t0
    u = command_accel(t, bounds, accels)
    mode = start_mode(x, v, u, limit, m_t, m_a, alpha, beta, c, g)
    for _ in range(_MAX_SUBSTEPS):
        if t >= t1:
            break
        u = command_accel(t, bounds, accels)
        t_stop = min(t1, next_switch(t, bounds))
        h = t_stop - t
        if mode == STUCK:
            if mode_accel(-limit, 0.0, u, -1.0, m_t, m_a, alpha, beta, c, g) > 0.0:
                mode = CONTACT
                continue
            x = -limit
            v = 0.0
            t = t_stop
            continue
        gamma = -1.0 if mode == CONTACT else 0.0
        xn, vn = rk4_fixed(x, v, h, u, gamma, m_t, m_a, alpha, beta, c, g)
        if not (np.isfinite(xn) and np.isfinite(vn)):
            return xn, vn, n_ev
        if mode == FLIGHT and xn <= 0.0:
            hc, xc, vc = _locate(x, v, h, u, gamma, 0.0, True, m_t, m_a, alpha, beta, c, g)
            t = t_stop if hc >= h else t + hc
            x = 0.0
            v = vc
            mode = CONTACT
            n_ev = _record(ev_t, ev_k, n_ev, t, EV_TOUCHDOWN)
        elif mode == CONTACT and xn > 0.0:
            hc, xc, vc = _locate(x, v, h, u, gamma, 0.0, False, m_t, m_a, alpha, beta, c, g)
            t = t_stop if hc >= h else t + hc
            x = 0.0
            v = vc
            mode = FLIGHT
            n_ev = _record(ev_t, ev_k, n_ev, t, EV_LIFTOFF)
        elif mode == CONTACT and xn < -limit:
            hc, xc, vc = _locate(x, v, h, u, gamma, -limit, True, m_t, m_a, alpha, beta, c, g)
            t = t_stop if hc >= h else t + hc
            x = -limit
            v = max(vc, 0.0)
            mode = STUCK
            n_ev = _record(ev_t, ev_k, n_ev, t, EV_STOP)
        else:
            x = xn
            v = vn
            t = t_stop
    else:
        # substep budget exhausted (chattering at a boundary): finish plainly
        if t < t1:
            gamma = -1.0 if x <= 0.0 else 0.0
            x, v = rk4_fixed(x, v, t1 - t, command_accel(t, bounds, accels), gamma,
                             m_t, m_a, alpha, beta, c, g)
    return x, v, n_ev


@njit(cache=True)
def apply_stop(x, v, limit):
    """Plastic hard stop at x = -limit; returns (x, v, hit)."""
    if x < -limit:
        return -limit, max(v, 0.0), True
    return x, v, False


@njit(cache=True)
def simulate_loop(x0, v0, n_steps, dt, m_t, m_a, alpha, beta, c, g, limit,
                  bounds, accels, pos, vel):
    """Fixed-output-step integration over ``n_steps``.

    Returns ``(t, x, x_dot, x_a, x_a_dot, ev_t, ev_k, n_ev, status)`` where
    ``status`` is the index of the first non-finite sample or -1.
    """
    n = n_steps + 1
    t = np.empty(n)
    x = np.empty(n)
    xd = np.empty(n)
    xa = np.empty(n)
    xad = np.empty(n)
    cap = 2 * n + 16
    ev_t = np.empty(cap)
    ev_k = np.empty(cap, dtype=np.int8)
    n_ev = 0

    xi, vi, hit = apply_stop(x0, v0, limit)
    if hit:
        n_ev = _record(ev_t, ev_k, n_ev, 0.0, EV_STOP)
    t[0] = 0.0
    x[0] = xi
    xd[0] = vi
    xa[0], xad[0] = command_kinematics(0.0, bounds, accels, pos, vel)
    for i in range(n_steps):
        ti = t[i]
        tn = ti + dt
        xn, vn, n_ev = hybrid_step(ti, tn, x[i], xd[i], m_t, m_a, alpha, beta, c, g, limit,
                                   bounds, accels, ev_t, ev_k, n_ev)
        if not (np.isfinite(xn) and np.isfinite(vn)):
            return t, x, xd, xa, xad, ev_t, ev_k, min(n_ev, cap), i + 1
        xn, vn, hit = apply_stop(xn, vn, limit)
        t[i + 1] = tn
        x[i + 1] = xn
        xd[i + 1] = vn
        xa[i + 1], xad[i + 1] = command_kinematics(tn, bounds, accels, pos, vel)
    return t, x, xd, xa, xad, ev_t, ev_k, min(n_ev, cap), -1
