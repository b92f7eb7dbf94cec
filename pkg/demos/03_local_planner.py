# Inside one planning step: the candidate arc fan, which arcs are blocked
# by a wall or another robot, and the selected command. Then a full
# rollout to the goal. Output: demos/out/planner.png

import math
import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from minisocial.dynamics import AgentState, KinodynamicConfig, integrate
from minisocial.geometry import NavGraph, Route, Segment, Vec2, VectorMap
from minisocial.local_planner import (
    Action,
    PlannerParams,
    is_blocked,
    plan_step,
    sample_candidates,
)

cfg = KinodynamicConfig()
params = PlannerParams()
dt = 0.1

vmap = VectorMap("demo", [Segment(Vec2(2.0, -0.6), Vec2(2.0, 2.5))])
nodes = {0: Vec2(0, 0), 1: Vec2(6, 0)}
graph = NavGraph("demo", nodes, [(0, 1)])
route = Route([0, 1])

me = AgentState(px=0.0, py=0.0, psi=0.0, vx=0.8, vy=0.0, route_progress=1)
blocker = AgentState(px=1.2, py=-0.5, psi=math.pi)

candidates = sample_candidates(
    me, (6.0, 0.0), vmap, [blocker], [cfg.radius], cfg, dt, params
)
chosen = plan_step(me, Action.GO, route, graph, vmap, [blocker], cfg, dt, params)
print(f"{sum(is_blocked(c, cfg.radius) for c in candidates)} of "
      f"{len(candidates)} arcs blocked; chosen v={chosen.v_cmd:.2f} "
      f"omega={chosen.omega_cmd:+.2f}")

fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(13, 5))
for seg in vmap.segments:
    ax1.plot([seg.a.x, seg.b.x], [seg.a.y, seg.b.y], "b-", lw=3)
circle = plt.Circle((blocker.px, blocker.py), cfg.radius, color="0.4")
ax1.add_patch(circle)
for cand in candidates:
    xs = [p[0] for p in cand.predicted_poses]
    ys = [p[1] for p in cand.predicted_poses]
    blocked = is_blocked(cand, cfg.radius, params.safety_margin)
    ax1.plot(xs, ys, color="r" if blocked else "g", alpha=0.5, lw=1)
ax1.plot(me.px, me.py, "ko", ms=8)
ax1.set_title("candidate arcs (green = clear, red = blocked)")
ax1.set_aspect("equal")

# Roll the planner to the goal, replanning every step.
state = me
xs, ys = [state.px], [state.py]
for _ in range(120):
    cmd = plan_step(state, Action.GO, route, graph, vmap, [blocker], cfg, dt, params)
    state = integrate(state, cmd, cfg, dt)
    xs.append(state.px)
    ys.append(state.py)
    if math.hypot(state.px - 6.0, state.py) < params.waypoint_radius:
        break
print(f"reached the goal area in {len(xs) - 1} steps")

for seg in vmap.segments:
    ax2.plot([seg.a.x, seg.b.x], [seg.a.y, seg.b.y], "b-", lw=3)
ax2.add_patch(plt.Circle((blocker.px, blocker.py), cfg.radius, color="0.4"))
ax2.plot(xs, ys, "g-", lw=2)
ax2.plot(6.0, 0.0, "r*", ms=14)
ax2.set_title("closed-loop rollout around both obstacles")
ax2.set_aspect("equal")

out = os.path.join(os.path.dirname(__file__), "out", "planner.png")
os.makedirs(os.path.dirname(out), exist_ok=True)
fig.tight_layout()
fig.savefig(out, dpi=110)
print(f"wrote {out}")
