import math

import numpy as np
import pytest

from minisocial.dynamics import (
    AgentState,
    DriveType,
    KinodynamicConfig,
    MotionCommand,
    clamp_command,
    integrate,
    wrap_angle,
)
from minisocial.rng import stream

DT = 0.1


def rest(psi=0.0):
    return AgentState(px=0.0, py=0.0, psi=psi)


class TestClamp:
    def test_acceleration_limited_from_rest(self):
        cfg = KinodynamicConfig(v_max=1.0, v_pref=1.0, a_max=1.0)
        out = clamp_command(rest(), MotionCommand(v_cmd=10.0), cfg, DT)
        assert out.v_cmd == pytest.approx(0.1)

    def test_current_command_is_fixed_point(self):
        cfg = KinodynamicConfig()
        state = AgentState(px=0, py=0, psi=0, vx=0.5, vy=0.0, omega=0.3)
        out = clamp_command(state, MotionCommand(v_cmd=0.5, omega_cmd=0.3), cfg, DT)
        assert out.v_cmd == pytest.approx(0.5)
        assert out.omega_cmd == pytest.approx(0.3)

    def test_velocity_limited(self):
        cfg = KinodynamicConfig(v_max=1.0, v_pref=1.0, a_max=50.0)
        state = AgentState(px=0, py=0, psi=0, vx=1.0, vy=0.0)
        out = clamp_command(state, MotionCommand(v_cmd=2.0), cfg, DT)
        assert out.v_cmd == pytest.approx(1.0)

    def test_idempotent(self):
        cfg = KinodynamicConfig()
        rng = stream(1, "clamp")
        for _ in range(300):
            psi = rng.uniform(-math.pi, math.pi)
            v = rng.uniform(-2, 2)
            state = AgentState(
                px=0, py=0, psi=psi,
                vx=v * math.cos(psi), vy=v * math.sin(psi),
                omega=rng.uniform(-2, 2),
            )
            want = MotionCommand(v_cmd=rng.uniform(-5, 5), omega_cmd=rng.uniform(-5, 5))
            once = clamp_command(state, want, cfg, DT)
            twice = clamp_command(state, once, cfg, DT)
            assert twice == once

    def test_omni_per_axis(self):
        cfg = KinodynamicConfig(drive_type=DriveType.OMNI, v_max=1.0, a_max=1.0)
        out = clamp_command(rest(), MotionCommand(v_vec=(5.0, -5.0)), cfg, DT)
        assert out.v_vec == pytest.approx((0.1, -0.1))

    def test_ackermann_no_turn_in_place(self):
        cfg = KinodynamicConfig(drive_type=DriveType.ACKERMANN)
        out = clamp_command(rest(), MotionCommand(v_cmd=0.0, omega_cmd=1.0), cfg, DT)
        assert out.omega_cmd == 0.0

    def test_ackermann_curvature_cap(self):
        cfg = KinodynamicConfig(drive_type=DriveType.ACKERMANN, wheelbase=0.5, max_steering=0.5)
        state = AgentState(px=0, py=0, psi=0, vx=1.0, vy=0.0, omega=1.5)
        out = clamp_command(state, MotionCommand(v_cmd=1.0, omega_cmd=2.0), cfg, DT)
        cap = 1.0 * math.tan(0.5) / 0.5
        assert abs(out.omega_cmd) <= cap + 1e-12


class TestIntegrate:
    def test_straight_line(self):
        cfg = KinodynamicConfig()
        out = integrate(rest(), MotionCommand(v_cmd=1.0, omega_cmd=0.0), cfg, 1.0)
        assert (out.px, out.py) == pytest.approx((1.0, 0.0))
        assert out.psi == 0.0

    def test_spin_in_place(self):
        cfg = KinodynamicConfig(omega_max=4.0)
        out = integrate(rest(), MotionCommand(v_cmd=0.0, omega_cmd=math.pi), cfg, 1.0)
        assert (out.px, out.py) == pytest.approx((0.0, 0.0))
        assert out.psi == pytest.approx(math.pi)

    def test_quarter_turn_midpoint_rule(self):
        # One-step midpoint rule lands at (cos(pi/4), sin(pi/4)).
        cfg = KinodynamicConfig(omega_max=2.0)
        out = integrate(rest(), MotionCommand(v_cmd=1.0, omega_cmd=math.pi / 2), cfg, 1.0)
        assert (out.px, out.py) == pytest.approx(
            (math.cos(math.pi / 4), math.sin(math.pi / 4))
        )

    def test_arc_matches_fine_euler_at_design_timestep(self):
        # Same quarter-circle arc taken in dt=0.1 steps vs 1000-substep Euler.
        cfg = KinodynamicConfig(omega_max=2.0)
        cmd = MotionCommand(v_cmd=1.0, omega_cmd=math.pi / 2)
        state = rest()
        for _ in range(10):
            state = integrate(state, cmd, cfg, DT)
        # forward-Euler oracle
        x = y = psi = 0.0
        h = 1.0 / 1000
        for _ in range(1000):
            x += math.cos(psi) * h
            y += math.sin(psi) * h
            psi += math.pi / 2 * h
        assert math.hypot(state.px - x, state.py - y) <= 2e-2

    def test_zero_command_fixed_point(self):
        cfg = KinodynamicConfig()
        state = AgentState(px=1.5, py=-2.0, psi=0.7)
        out = integrate(state, MotionCommand(), cfg, DT)
        assert (out.px, out.py, out.psi) == (1.5, -2.0, 0.7)
        assert out.speed == 0.0

    def test_speed_matches_velocity_norm(self):
        cfg = KinodynamicConfig()
        out = integrate(rest(0.3), MotionCommand(v_cmd=1.2, omega_cmd=0.5), cfg, DT)
        assert out.speed == pytest.approx(math.hypot(out.vx, out.vy), abs=1e-9)
        assert out.speed == pytest.approx(1.2)

    def test_omni_heading_tracks_velocity(self):
        cfg = KinodynamicConfig(drive_type=DriveType.OMNI)
        out = integrate(rest(), MotionCommand(v_vec=(0.0, 1.0)), cfg, DT)
        assert out.psi == pytest.approx(math.pi / 2)
        still = integrate(rest(0.4), MotionCommand(v_vec=(0.0, 0.0)), cfg, DT)
        assert still.psi == 0.4  # unchanged below the 1e-3 m/s threshold


class TestProperties:
    def test_random_sequences_respect_limits(self):
        cfg = KinodynamicConfig()
        rng = stream(7, "limits")
        for _ in range(200):
            state = rest(rng.uniform(-math.pi, math.pi))
            for _ in range(20):
                want = MotionCommand(
                    v_cmd=rng.uniform(-10, 10), omega_cmd=rng.uniform(-10, 10)
                )
                cmd = clamp_command(state, want, cfg, DT)
                new = integrate(state, cmd, cfg, DT)
                assert new.speed <= cfg.v_max + 1e-9
                assert abs(new.speed - state.speed) <= cfg.a_max * DT + 1e-9
                assert abs(new.omega) <= cfg.omega_max + 1e-9
                assert abs(new.omega - state.omega) <= cfg.alpha_max * DT + 1e-9
                state = new

    def test_half_step_refinement_bound(self):
        cfg = KinodynamicConfig()
        rng = stream(11, "halfstep")
        c_bound = cfg.v_max * cfg.omega_max
        worst = 0.0
        for _ in range(500):
            state = AgentState(px=0, py=0, psi=rng.uniform(-math.pi, math.pi))
            cmd = MotionCommand(
                v_cmd=rng.uniform(-cfg.v_max, cfg.v_max),
                omega_cmd=rng.uniform(-cfg.omega_max, cfg.omega_max),
            )
            one = integrate(state, cmd, cfg, DT)
            half = integrate(integrate(state, cmd, cfg, DT / 2), cmd, cfg, DT / 2)
            err = math.hypot(one.px - half.px, one.py - half.py)
            worst = max(worst, err / DT**2)
        assert worst <= c_bound

    def test_wrap_angle_range(self):
        for a in np.linspace(-20, 20, 401):
            w = wrap_angle(float(a))
            assert -math.pi < w <= math.pi


class TestConfig:
    def test_invariants(self):
        with pytest.raises(ValueError):
            KinodynamicConfig(v_max=-1.0)
        with pytest.raises(ValueError):
            KinodynamicConfig(v_pref=3.0, v_max=2.0)
        with pytest.raises(ValueError):
            KinodynamicConfig(radius=0.0)
