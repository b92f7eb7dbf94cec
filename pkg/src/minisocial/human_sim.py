"""Simulated pedestrians driven by a social forces model.

Goal attraction relaxes the walker toward its preferred velocity over tau
seconds; agents and walls repel exponentially. Parameters default to the
canonical published values for the model. All forces in a step are computed
from the pre-step snapshot, so the update is order-independent.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from .geometry import Segment, VectorMap, distance_point_segment, Vec2


@dataclass(frozen=True)
class SocialForceParams:
    tau: float = 0.5  # relaxation time, s
    agent_strength: float = 2.1  # A
    agent_range: float = 0.3  # B, m
    wall_strength: float = 10.0  # A_w
    wall_range: float = 0.2  # B_w, m
    v_pref: float = 1.34  # m/s
    max_speed_factor: float = 1.3
    goal_hold_radius: float = 0.5  # m


@dataclass(frozen=True)
class HumanState:
    """Holonomic point-mass disc walker."""

    px: float
    py: float
    vx: float = 0.0
    vy: float = 0.0
    goal_x: float = 0.0
    goal_y: float = 0.0
    v_pref: float = 1.34
    radius: float = 0.25
    route_progress: int = 0

    def __post_init__(self):
        if self.v_pref <= 0 or self.radius <= 0:
            raise ValueError("v_pref and radius must be > 0")


Neighbor = tuple[tuple[float, float], tuple[float, float], float]  # position, velocity, radius


def social_force(
    h: HumanState,
    neighbors: list[Neighbor],
    walls: list[Segment],
    params: SocialForceParams = SocialForceParams(),
) -> tuple[float, float]:
    """Net force (unit mass) on one walker from the pre-step snapshot.

    F = (v_pref * e_goal - v) / tau
        + sum A * exp((r_ij - d_ij) / B) * n_ij        over neighbors
        + sum A_w * exp((r - d_iw) / B_w) * n_iw       over walls
    """
    gx, gy = h.goal_x - h.px, h.goal_y - h.py
    dist = math.hypot(gx, gy)
    if dist > 1e-9:
        ex, ey = gx / dist, gy / dist
    else:
        ex = ey = 0.0
    fx = (h.v_pref * ex - h.vx) / params.tau
    fy = (h.v_pref * ey - h.vy) / params.tau

    for (nx, ny), _vel, nr in neighbors:
        dx, dy = h.px - nx, h.py - ny
        d = math.hypot(dx, dy)
        if d < 1e-9:
            continue  # coincident centers: direction undefined
        mag = params.agent_strength * math.exp((h.radius + nr - d) / params.agent_range)
        fx += mag * dx / d
        fy += mag * dy / d

    p = Vec2(h.px, h.py)
    for wall in walls:
        d = distance_point_segment(p, wall)
        if d < 1e-9:
            continue
        # Direction away from the closest wall point.
        seg = wall.b - wall.a
        t = min(1.0, max(0.0, (p - wall.a).dot(seg) / seg.dot(seg)))
        closest = wall.a + seg.scaled(t)
        mag = params.wall_strength * math.exp((h.radius - d) / params.wall_range)
        fx += mag * (p.x - closest.x) / d
        fy += mag * (p.y - closest.y) / d
    return fx, fy


def step_humans(
    humans: list[HumanState],
    agents: list[Neighbor],
    vmap: VectorMap | None,
    dt: float,
    params: SocialForceParams = SocialForceParams(),
) -> list[HumanState]:
    """Semi-implicit Euler over the snapshot: v' = cap(v + F dt), p' = p + v' dt.

    Walkers within goal_hold_radius of their goal hold position. An empty
    list is a no-op (returns []).
    """
    if dt <= 0:
        raise ValueError("dt must be > 0")
    if not humans:
        return []
    walls = vmap.segments if vmap is not None else []

    snapshot: list[Neighbor] = [
        ((h.px, h.py), (h.vx, h.vy), h.radius) for h in humans
    ] + list(agents)

    out = []
    for i, h in enumerate(humans):
        if math.hypot(h.goal_x - h.px, h.goal_y - h.py) < params.goal_hold_radius:
            out.append(replace(h, vx=0.0, vy=0.0))
            continue
        neighbors = [snapshot[j] for j in range(len(snapshot)) if j != i]
        fx, fy = social_force(h, neighbors, walls, params)
        vx, vy = h.vx + fx * dt, h.vy + fy * dt
        cap = params.max_speed_factor * h.v_pref
        speed = math.hypot(vx, vy)
        if speed > cap:
            vx, vy = vx * cap / speed, vy * cap / speed
        out.append(
            replace(h, px=h.px + vx * dt, py=h.py + vy * dt, vx=vx, vy=vy)
        )
    return out
