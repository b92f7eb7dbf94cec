"""Sampling-based local planner: turns high-level GO/STOP actions into
feasible motion commands.

GO rolls out constant-curvature arc candidates toward the current
intermediate waypoint, drops the ones blocked by walls or other agents, and
picks the best-scoring survivor; STOP decelerates as hard as the limits
allow. Deterministic: identical inputs yield identical commands.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from enum import Enum

import numpy as np

from .dynamics import AgentState, DriveType, KinodynamicConfig, MotionCommand, clamp_command, wrap_angle
from .geometry import NavGraph, Route, VectorMap


class Action(Enum):
    GO = "GO"
    STOP = "STOP"


@dataclass(frozen=True)
class PlannerParams:
    num_candidates: int = 21
    horizon: float = 1.0  # seconds
    w_align: float = 1.0
    w_clear: float = 0.5
    waypoint_radius: float = 0.5
    safety_margin: float = 0.05

    def horizon_steps(self, dt: float) -> int:
        return max(1, round(self.horizon / dt))


@dataclass
class CandidateTrajectory:
    command: MotionCommand
    predicted_poses: list[tuple[float, float, float]]  # (x, y, psi) per horizon step
    clearance: float  # min distance to any wall / other-agent surface, >= 0
    goal_alignment: float


class WallSet:
    """Wall segments packed into arrays for vectorized clearance queries."""

    def __init__(self, vmap: VectorMap):
        n = len(vmap.segments)
        self.a = np.zeros((n, 2))
        self.d = np.zeros((n, 2))
        for i, s in enumerate(vmap.segments):
            self.a[i] = (s.a.x, s.a.y)
            self.d[i] = (s.b.x - s.a.x, s.b.y - s.a.y)
        self.len2 = np.maximum(np.einsum("ij,ij->i", self.d, self.d), 1e-18)

    def min_distance(self, points: np.ndarray) -> np.ndarray:
        """Min distance from each point (M,2) to any segment; +inf if none."""
        if self.a.shape[0] == 0:
            return np.full(points.shape[0], np.inf)
        rel = points[:, None, :] - self.a[None, :, :]  # (M,S,2)
        t = np.clip(np.einsum("msj,sj->ms", rel, self.d) / self.len2, 0.0, 1.0)
        closest = self.a[None, :, :] + t[:, :, None] * self.d[None, :, :]
        dist = np.linalg.norm(points[:, None, :] - closest, axis=2)
        return dist.min(axis=1)


def _walls(vmap: VectorMap | WallSet) -> WallSet:
    return vmap if isinstance(vmap, WallSet) else WallSet(vmap)


def is_blocked(traj: CandidateTrajectory, radius: float, safety_margin: float = 0.05) -> bool:
    return traj.clearance < radius + safety_margin


def _stop_command(state: AgentState, cfg: KinodynamicConfig, dt: float) -> MotionCommand:
    if cfg.drive_type is DriveType.OMNI:
        decay = lambda v: v - math.copysign(min(abs(v), cfg.a_max * dt), v)
        return MotionCommand(v_vec=(decay(state.vx), decay(state.vy)))
    v = state.forward_speed
    v_next = v - math.copysign(min(abs(v), cfg.a_max * dt), v)
    w = state.omega
    w_next = w - math.copysign(min(abs(w), cfg.alpha_max * dt), w)
    return MotionCommand(v_cmd=v_next, omega_cmd=w_next)


def _candidate_arrays(
    state: AgentState,
    goal: tuple[float, float],
    walls: WallSet,
    others: list[AgentState],
    other_radii: list[float],
    cfg: KinodynamicConfig,
    dt: float,
    params: PlannerParams,
):
    """Vectorized arc rollout: (v, omegas, xs, ys, psis, clearance, align).

    Candidates share one forward speed (acceleration-limited ramp toward
    v_pref) and span the reachable turn-rate window. Other agents are
    treated as static discs at their snapshot positions.
    """
    h = params.horizon_steps(dt)
    n = params.num_candidates

    v_prev = state.forward_speed
    v = min(v_prev + cfg.a_max * dt, max(v_prev - cfg.a_max * dt, cfg.v_pref))
    v = min(cfg.v_max, max(-cfg.v_max, v))

    lo = max(-cfg.omega_max, state.omega - cfg.alpha_max * dt)
    hi = min(cfg.omega_max, state.omega + cfg.alpha_max * dt)
    if cfg.drive_type is DriveType.ACKERMANN:
        cap = abs(v) * math.tan(cfg.max_steering) / cfg.wheelbase
        lo, hi = max(lo, -cap), min(hi, cap)
    if lo > hi:
        lo = hi = min(hi, max(lo, 0.0))
    omegas = np.linspace(lo, hi, n)

    # Arc rollout at constant (v, omega), midpoint-heading increments.
    steps = np.arange(1, h + 1)
    psi_mid = state.psi + omegas[:, None] * (steps[None, :] - 0.5) * dt  # (N,H)
    xs = state.px + np.cumsum(v * dt * np.cos(psi_mid), axis=1)
    ys = state.py + np.cumsum(v * dt * np.sin(psi_mid), axis=1)
    psis = state.psi + omegas[:, None] * steps[None, :] * dt

    points = np.stack([xs.ravel(), ys.ravel()], axis=1)  # (N*H, 2)
    clearance = walls.min_distance(points)
    if others:
        op = np.array([(o.px, o.py) for o in others])
        orad = np.array(other_radii)
        diff = points[:, None, :] - op[None, :, :]
        d_others = np.sqrt((diff * diff).sum(axis=2)) - orad[None, :]
        clearance = np.minimum(clearance, d_others.min(axis=1))
    clearance = np.maximum(clearance.reshape(n, h).min(axis=1), 0.0)

    # Alignment: heading error to the goal at the horizon end.
    gx, gy = goal
    bearing = np.arctan2(gy - ys[:, -1], gx - xs[:, -1])
    align = np.cos(bearing - psis[:, -1])
    return v, omegas, xs, ys, psis, clearance, align


def sample_candidates(
    state: AgentState,
    goal: tuple[float, float],
    walls: VectorMap | WallSet,
    others: list[AgentState],
    other_radii: list[float],
    cfg: KinodynamicConfig,
    dt: float,
    params: PlannerParams,
) -> list[CandidateTrajectory]:
    """The candidate set as inspectable objects (tests, debugging)."""
    v, omegas, xs, ys, psis, clearance, align = _candidate_arrays(
        state, goal, _walls(walls), others, other_radii, cfg, dt, params
    )
    out = []
    for i in range(len(omegas)):
        poses = [
            (xs[i, t], ys[i, t], wrap_angle(psis[i, t])) for t in range(xs.shape[1])
        ]
        out.append(
            CandidateTrajectory(
                command=MotionCommand(v_cmd=v, omega_cmd=float(omegas[i])),
                predicted_poses=poses,
                clearance=float(clearance[i]),
                goal_alignment=float(align[i]),
            )
        )
    return out


def plan_step(
    agent: AgentState,
    action: Action,
    route: Route,
    graph: NavGraph,
    vmap: VectorMap | WallSet,
    others: list[AgentState],
    cfg: KinodynamicConfig,
    dt: float,
    params: PlannerParams = PlannerParams(),
    other_radii: list[float] | None = None,
) -> MotionCommand:
    """One planning step. STOP (or an all-blocked GO) brakes; GO picks the
    best unblocked arc by w_align * alignment + w_clear * min(clearance, 1).
    Ties prefer smaller |omega|. The result is always clamp-feasible.
    """
    if action is Action.STOP:
        return clamp_command(agent, _stop_command(agent, cfg, dt), cfg, dt)

    if other_radii is None:
        other_radii = [cfg.radius] * len(others)
    target = graph.position(route.node_ids[agent.route_progress])
    v, omegas, _xs, _ys, _psis, clearance, align = _candidate_arrays(
        agent, (target.x, target.y), _walls(vmap), others, other_radii, cfg, dt, params
    )

    unblocked = clearance >= cfg.radius + params.safety_margin
    if not unblocked.any():
        return clamp_command(agent, _stop_command(agent, cfg, dt), cfg, dt)
    score = params.w_align * align + params.w_clear * np.minimum(clearance, 1.0)
    # Best score; ties prefer smaller |omega|, then smaller omega.
    order = np.lexsort((omegas, np.abs(omegas), -score))
    best = next(i for i in order if unblocked[i])

    cmd = MotionCommand(v_cmd=v, omega_cmd=float(omegas[best]))
    if cfg.drive_type is DriveType.OMNI:
        heading = agent.psi + cmd.omega_cmd * dt * 0.5
        cmd = MotionCommand(
            v_vec=(cmd.v_cmd * math.cos(heading), cmd.v_cmd * math.sin(heading))
        )
    return clamp_command(agent, cmd, cfg, dt)


def route_goal_distance(
    px: float, py: float, route: Route, graph: NavGraph, progress: int
) -> float:
    """Remaining polyline length: current position to the target node, then
    node to node through the end of the route."""
    nodes = route.node_ids
    progress = min(progress, len(nodes) - 1)
    target = graph.position(nodes[progress])
    total = math.hypot(target.x - px, target.y - py)
    for i, j in zip(nodes[progress:], nodes[progress + 1 :]):
        total += graph.position(i).dist(graph.position(j))
    return total


def advance_waypoint(
    agent: AgentState,
    route: Route,
    graph: NavGraph,
    waypoint_radius: float = 0.5,
) -> AgentState:
    """Advance route progress when within waypoint_radius of the current
    target (saturating at the final node) and refresh d_goal."""
    nodes = route.node_ids
    progress = min(agent.route_progress, len(nodes) - 1)
    target = graph.position(nodes[progress])
    if progress < len(nodes) - 1 and math.hypot(target.x - agent.px, target.y - agent.py) <= waypoint_radius:
        progress += 1
    d_goal = route_goal_distance(agent.px, agent.py, route, graph, progress)
    return replace(agent, route_progress=progress, d_goal=d_goal)
