import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import brentq

from pogo_codesign.command import command_for
from pogo_codesign.errors import EmptyTrajectory, NonFiniteState
from pogo_codesign.sim import (DesignParams, PogoState, SimConfig, Trajectory, apex_height,
                               contact_indicator, damping_coefficient, derived, enforce_stop,
                               integrate_step, rod_acceleration, simulate, total_energy)

G = 9.81


def state(x, v=0.0, t=0.0):
    return PogoState(t, x, v, 0.008, 0.0)


@pytest.mark.parametrize("x, expected", [(-0.002, -1), (0.0, -1), (0.01, 0)])
def test_contact_indicator(x, expected):
    assert contact_indicator(x) == expected


def test_design_params_validation():
    with pytest.raises(ValueError):
        DesignParams(alpha=0.0)
    with pytest.raises(ValueError):
        DesignParams(zeta=-0.1)
    with pytest.raises(ValueError):
        DesignParams(compression_limit=float("nan"))
    DesignParams(beta=0.0, zeta=0.0)


def test_damping_coefficient_values():
    p = DesignParams()
    assert damping_coefficient(p.with_design(5760, 0.0)) == 0.0
    assert damping_coefficient(p.with_design(5760, 1e-2)) == pytest.approx(1.6474562209661293, rel=1e-12)
    assert damping_coefficient(p.with_design(5760, 7.5e-2)) == pytest.approx(12.35592165724597, rel=1e-12)


def test_derived_params_consistent():
    p = DesignParams(zeta=0.03)
    d = derived(p)
    assert d.m_t == pytest.approx(1.178)
    assert d.omega_n == pytest.approx(math.sqrt(5760 / 1.178))
    assert d.c == pytest.approx(2 * p.zeta * d.m_t * d.omega_n, rel=1e-14)


class TestRodAcceleration:
    def test_flight_is_ballistic(self):
        p = DesignParams()
        for v in (-1.0, 0.0, 2.5):
            assert rod_acceleration(state(0.05, v), 0.0, p) == pytest.approx(-G, abs=1e-15)

    def test_compressed_spring(self):
        p = DesignParams()
        assert rod_acceleration(state(-0.004), 0.0, p) == pytest.approx(15.18151103565365, rel=1e-12)

    def test_actuator_reaction(self):
        p = DesignParams()
        assert rod_acceleration(state(0.05), 10.0, p) == pytest.approx(-18.32443123938879, rel=1e-12)


class TestEnforceStop:
    def test_downward_velocity_removed(self):
        s = enforce_stop(state(-0.009, -0.3), DesignParams())
        assert (s.x, s.x_dot) == (-0.008, 0.0)

    def test_upward_velocity_kept(self):
        s = enforce_stop(state(-0.009, 0.2), DesignParams())
        assert (s.x, s.x_dot) == (-0.008, 0.2)

    def test_identity_above_stop(self):
        s = state(0.05, -1.0)
        assert enforce_stop(s, DesignParams()) is s


class TestIntegrateStep:
    def test_airborne_constant_acceleration(self, idle):
        s = integrate_step(state(0.5, 1.0), idle, DesignParams(), 1e-4)
        assert s.x_dot == pytest.approx(1.0 - G * 1e-4, abs=1e-15)
        assert s.x == pytest.approx(0.5 + 1e-4 - 0.5 * G * 1e-8, abs=1e-15)
        assert s.t == pytest.approx(1e-4)

    def test_equilibrium_is_held(self, idle):
        p = DesignParams()
        x_eq = brentq(lambda x: p.alpha * x + p.beta * x**3 + p.m_t * p.g, -0.008, 0.0,
                      xtol=1e-18)
        s = state(x_eq)
        for _ in range(1000):
            s = integrate_step(s, idle, p, 1e-4)
        assert abs(s.x - x_eq) < 1e-12
        assert abs(s.x_dot) < 1e-12

    @pytest.mark.parametrize("x, v", [(-0.003, 0.1), (0.002, -0.4), (-0.0005, 0.3)])
    def test_step_halving_consistency(self, x, v, tuned_command):
        p = DesignParams()
        one = integrate_step(state(x, v, 0.03), tuned_command, p, 1e-4)
        two = state(x, v, 0.03)
        for _ in range(2):
            two = integrate_step(two, tuned_command, p, 5e-5)
        assert abs(one.x - two.x) <= 1e-9
        assert abs(one.x_dot - two.x_dot) <= 1e-9

    def test_actuator_follows_command(self, tuned_command):
        from pogo_codesign.command import actuator_kinematics
        s = integrate_step(state(0.0, 0.0, 0.01), tuned_command, DesignParams(), 1e-4)
        assert (s.x_a, s.x_a_dot) == actuator_kinematics(tuned_command, s.t)

    def test_non_finite_raises(self, idle):
        stiff = DesignParams(alpha=1e16)
        with pytest.raises(NonFiniteState):
            s = state(-0.001)
            for _ in range(200):
                s = integrate_step(s, idle, stiff, 0.01)

    def test_stepping_matches_simulate_bitwise(self, tuned_command):
        p = DesignParams()
        traj = simulate(p, tuned_command, SimConfig(1e-4, 0.3))
        s = traj[0]
        for i in range(1, len(traj)):
            s = integrate_step(s, tuned_command, p, 1e-4)
            assert (s.t, s.x, s.x_dot) == (traj.t[i], traj.x[i], traj.x_dot[i])
            assert (s.x_a, s.x_a_dot) == (traj.x_a[i], traj.x_a_dot[i])


class TestSimulate:
    def test_statics_with_idle_actuator(self, idle):
        p = DesignParams(zeta=0.0)
        x_eq = brentq(lambda x: p.alpha * x + p.beta * x**3 + p.m_t * p.g, -0.008, 0.0,
                      xtol=1e-18)
        traj = simulate(p, idle, SimConfig(1e-4, 2.0), initial=(x_eq, 0.0))
        assert abs(apex_height(traj) - x_eq) < 1e-9
        assert traj.events == []

    def test_ballistic_apex(self, idle):
        v0 = 0.6
        traj = simulate(DesignParams(), idle, SimConfig(1e-4, 0.2), initial=(0.0, v0))
        touchdown = traj.event_times("touchdown")[0]
        first_flight = traj.x[traj.t < touchdown]
        assert np.max(first_flight) == pytest.approx(v0**2 / (2 * G), rel=5e-3)
        assert touchdown == pytest.approx(2 * v0 / G, rel=1e-6)

    def test_stutter_jump(self, nominal, tuned_command):
        traj = simulate(nominal, tuned_command)
        lift = traj.event_times("liftoff")
        touch = traj.event_times("touchdown")
        assert len(lift) >= 2
        t_apex = traj.t[np.argmax(traj.x)]
        # main hop is the second flight phase
        assert lift[1] < t_apex < touch[1]
        small_hop = traj.x[(traj.t > lift[0]) & (traj.t < touch[0])].max()
        assert small_hop < apex_height(traj)

    def test_uniform_samples_and_event_range(self, nominal, tuned_command):
        cfg = SimConfig(1e-4, 2.0)
        traj = simulate(nominal, tuned_command, cfg)
        assert len(traj) == 20001
        assert np.all(np.diff(traj.t) > 0)
        assert np.allclose(np.diff(traj.t), 1e-4, rtol=0, atol=1e-12)
        times = [t for t, _ in traj.events]
        assert times == sorted(times)
        assert all(0.0 <= t <= cfg.t_f for t in times)

    def test_deterministic(self, nominal, tuned_command):
        a = simulate(nominal, tuned_command)
        b = simulate(nominal, tuned_command)
        for ch in ("t", "x", "x_dot", "x_a", "x_a_dot"):
            assert np.array_equal(getattr(a, ch), getattr(b, ch))
        assert a.events == b.events

    def test_non_finite_identifies_design(self, idle):
        with pytest.raises(NonFiniteState, match="alpha"):
            simulate(DesignParams(alpha=1e16), idle, SimConfig(0.01, 2.0), initial=(-0.001, 0.0))

    def test_sim_config_whole_steps(self):
        with pytest.raises(ValueError):
            SimConfig(1e-4, 2.00005001)
        assert SimConfig(1e-4, 2.0).n_steps == 20000


class TestApexHeight:
    def test_max_of_samples(self):
        traj = Trajectory.from_states(1e-4, [state(x, t=i * 1e-4) for i, x in
                                             enumerate([0, 0.004, 0.009, 0.003])])
        assert apex_height(traj) == 0.009

    def test_no_jump(self):
        traj = Trajectory.from_states(1e-4, [state(x) for x in [-0.001, -0.003, -0.0005]])
        assert apex_height(traj) == -0.0005

    def test_empty(self):
        with pytest.raises(EmptyTrajectory):
            apex_height(Trajectory.from_states(1e-4, []))


# --- invariants --------------------------------------------------------------

def test_flight_matches_parabola(idle):
    x0, v0 = 1.0, 1.0
    traj = simulate(DesignParams(), idle, SimConfig(1e-4, 0.5), initial=(x0, v0))
    exact = x0 + v0 * traj.t - 0.5 * G * traj.t**2
    assert np.max(np.abs(traj.x - exact)) <= 1e-8


def test_energy_conserved_without_damping(idle):
    p = DesignParams(zeta=0.0)
    h = 0.01
    traj = simulate(p, idle, SimConfig(1e-4, 2.0), initial=(h, 0.0))
    assert traj.event_times("stop_hit") == []
    assert len(traj.event_times("touchdown")) >= 3
    e = total_energy(traj, p)
    e0 = p.m_t * p.g * h
    assert e[0] == pytest.approx(e0)
    assert np.max(np.abs(e - e0)) / e0 < 1e-3


designs = st.tuples(st.floats(576.0, 10944.0), st.floats(1e-3, 0.1425))


@settings(max_examples=25, deadline=None)
@given(designs, st.floats(0.0, 0.2))
def test_stop_never_penetrated(design, delay):
    p = DesignParams().with_design(*design)
    traj = simulate(p, command_for(p, round(delay, 4)), SimConfig(1e-4, 0.8))
    assert np.all(traj.x >= -p.compression_limit)


@pytest.mark.parametrize("alpha, zeta", [(5760.0, 0.01), (576.0, 0.019), (3000.0, 0.05),
                                         (10944.0, 0.001)])
def test_step_halving_apex(alpha, zeta, tuned_command):
    p = DesignParams().with_design(alpha, zeta)
    coarse = apex_height(simulate(p, tuned_command, SimConfig(1e-4, 2.0)))
    fine = apex_height(simulate(p, tuned_command, SimConfig(5e-5, 2.0)))
    assert abs(coarse - fine) < 1e-7
