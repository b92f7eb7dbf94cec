# Generate the five social mini-games and draw each map, graph, and a
# sampled set of routes. Output: demos/out/minigames.png

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from minisocial.geometry import find_common_point
from minisocial.rng import stream
from minisocial.scenarios import MiniGameKind, MiniGameScenarioSet

out_dir = os.path.join(os.path.dirname(__file__), "out")
os.makedirs(out_dir, exist_ok=True)

fig, axes = plt.subplots(1, 5, figsize=(25, 5))
rng = stream(7, "gallery")

for ax, kind in zip(axes, MiniGameKind):
    ss = MiniGameScenarioSet(kind)
    k = min(3, ss.max_agents())
    vmap, graph, scenario = ss.sample(k, 0, rng)

    for seg in vmap.segments:
        ax.plot([seg.a.x, seg.b.x], [seg.a.y, seg.b.y], "b-", lw=2)
    for i, j in graph.edges:
        a, b = graph.position(i), graph.position(j)
        ax.plot([a.x, b.x], [a.y, b.y], color="0.8", lw=1)
    for nid, p in graph.nodes.items():
        ax.plot(p.x, p.y, "k.", ms=4)

    for idx, route in enumerate(scenario.agent_routes):
        pts = route.polyline(graph)
        ax.plot(
            [p.x for p in pts], [p.y for p in pts],
            lw=2.5, alpha=0.7, label=f"agent {idx}",
        )
        ax.plot(pts[0].x, pts[0].y, "s", ms=8, color=f"C{idx}")

    common = find_common_point(scenario, graph)
    title = kind.value
    if common is not None:
        ax.plot(common.x, common.y, "r*", ms=16)
        title += "  (constrained)"
    ax.set_title(title)
    ax.set_aspect("equal")

fig.tight_layout()
path = os.path.join(out_dir, "minigames.png")
fig.savefig(path, dpi=110)
print(f"wrote {path}")
