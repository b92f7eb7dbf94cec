"""Robot kinodynamic models: drive types, command clamping, time integration.

All functions are pure over value types. Headings use the midpoint rule
(second-order accurate) rather than forward Euler.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum


class DriveType(Enum):
    DIFF_DRIVE = "diff_drive"
    OMNI = "omni"
    ACKERMANN = "ackermann"


@dataclass(frozen=True)
class KinodynamicConfig:
    """Motion limits defining feasible commands.

    Defaults match a common indoor service robot. `wheelbase` and
    `max_steering` apply to Ackermann only (bicycle reduction with curvature
    limit |omega| <= |v| * tan(max_steering) / wheelbase).
    """

    drive_type: DriveType = DriveType.DIFF_DRIVE
    v_max: float = 2.0
    v_pref: float = 1.0
    a_max: float = 2.0
    omega_max: float = 2.0
    alpha_max: float = 4.0
    radius: float = 0.3
    wheelbase: float = 0.5
    max_steering: float = 0.5

    def __post_init__(self):
        for name in ("v_max", "v_pref", "a_max", "omega_max", "alpha_max", "radius"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if self.v_pref > self.v_max:
            raise ValueError("v_pref must not exceed v_max")


@dataclass(frozen=True)
class AgentState:
    """Per-agent state: world pose, velocity, turn rate, goal distance.

    `omega` is the current turn rate, needed to bound angular acceleration.
    `d_goal` is the remaining route-polyline length; the integrator leaves it
    to the caller (it depends on the route).
    """

    px: float
    py: float
    psi: float
    vx: float = 0.0
    vy: float = 0.0
    omega: float = 0.0
    d_goal: float = 0.0
    route_progress: int = 0

    @property
    def speed(self) -> float:
        return math.hypot(self.vx, self.vy)

    @property
    def forward_speed(self) -> float:
        """Velocity component along the heading (signed)."""
        return self.vx * math.cos(self.psi) + self.vy * math.sin(self.psi)


@dataclass(frozen=True)
class MotionCommand:
    """Local-planner output. DiffDrive/Ackermann use (v_cmd, omega_cmd);
    Omni uses v_vec."""

    v_cmd: float = 0.0
    omega_cmd: float = 0.0
    v_vec: tuple[float, float] | None = None


def wrap_angle(a: float) -> float:
    """Normalize to (-pi, pi]."""
    a = math.fmod(a, 2.0 * math.pi)
    if a > math.pi:
        a -= 2.0 * math.pi
    elif a <= -math.pi:
        a += 2.0 * math.pi
    return a


def _clamp(x: float, lo: float, hi: float) -> float:
    return min(hi, max(lo, x))


def clamp_command(
    state: AgentState, desired: MotionCommand, cfg: KinodynamicConfig, dt: float
) -> MotionCommand:
    """Clamp a desired command into the feasible set. Never rejects.

    Bounds: |v| <= v_max, |omega| <= omega_max, accelerations a_max /
    alpha_max against the agent's current motion. Omni applies speed and
    acceleration limits per axis. Idempotent.
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")

    if cfg.drive_type is DriveType.OMNI:
        want = desired.v_vec if desired.v_vec is not None else (desired.v_cmd, 0.0)
        out = []
        for axis, prev in zip(want, (state.vx, state.vy)):
            v = _clamp(axis, -cfg.v_max, cfg.v_max)
            v = _clamp(v, prev - cfg.a_max * dt, prev + cfg.a_max * dt)
            out.append(v)
        return MotionCommand(v_vec=(out[0], out[1]))

    v_prev = state.forward_speed
    v = _clamp(desired.v_cmd, -cfg.v_max, cfg.v_max)
    v = _clamp(v, v_prev - cfg.a_max * dt, v_prev + cfg.a_max * dt)

    omega = _clamp(desired.omega_cmd, -cfg.omega_max, cfg.omega_max)
    omega = _clamp(
        omega, state.omega - cfg.alpha_max * dt, state.omega + cfg.alpha_max * dt
    )
    if cfg.drive_type is DriveType.ACKERMANN:
        # No turning in place: curvature bounded by the steering limit.
        omega_cap = abs(v) * math.tan(cfg.max_steering) / cfg.wheelbase
        omega = _clamp(omega, -omega_cap, omega_cap)
    return MotionCommand(v_cmd=v, omega_cmd=omega)


def integrate(
    state: AgentState, cmd: MotionCommand, cfg: KinodynamicConfig, dt: float
) -> AgentState:
    """Advance one step under an already-clamped command.

    DiffDrive/Ackermann follow a constant-curvature arc evaluated at the
    midpoint heading; Omni translates and points the heading along the
    velocity when moving faster than 1e-3 m/s.
    """
    if cfg.drive_type is DriveType.OMNI:
        vx, vy = cmd.v_vec if cmd.v_vec is not None else (0.0, 0.0)
        psi = state.psi
        if math.hypot(vx, vy) > 1e-3:
            psi = math.atan2(vy, vx)
        return replace(
            state,
            px=state.px + vx * dt,
            py=state.py + vy * dt,
            psi=wrap_angle(psi),
            vx=vx,
            vy=vy,
            omega=0.0,
        )

    psi_mid = state.psi + 0.5 * cmd.omega_cmd * dt
    psi_new = wrap_angle(state.psi + cmd.omega_cmd * dt)
    vx = cmd.v_cmd * math.cos(psi_new)
    vy = cmd.v_cmd * math.sin(psi_new)
    return replace(
        state,
        px=state.px + cmd.v_cmd * dt * math.cos(psi_mid),
        py=state.py + cmd.v_cmd * dt * math.sin(psi_mid),
        psi=psi_new,
        vx=vx,
        vy=vy,
        omega=cmd.omega_cmd,
    )
