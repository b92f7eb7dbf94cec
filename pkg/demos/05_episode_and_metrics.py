# Run the Only Local baseline on the doorway mini-game, log the episodes,
# and produce the social-compliance metrics table. Also renders every
# agent path from the logs. Output: demos/out/doorway_paths.png

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from minisocial.baselines import OnlyLocalPolicy, evaluate
from minisocial.environment import EnvConfig, SocialNavEnv
from minisocial.metrics import to_text
from minisocial.obs_reward import default_observer, default_rewarder
from minisocial.scenarios import MiniGameKind, MiniGameScenarioSet

ss = MiniGameScenarioSet(MiniGameKind.DOORWAY)


def make_env(k):
    return SocialNavEnv(
        ss, default_observer(), default_rewarder(),
        EnvConfig(num_agents=((0, k),), seed=3, max_steps=800),
    )


rows, logs_by_k = evaluate(
    OnlyLocalPolicy(), make_env, trials=8, k_list=[2, 5], policy_name="only_local"
)
print(to_text(rows))

# Draw the k=5 trajectories: the jam at the gap is easy to spot.
fig, axes = plt.subplots(2, 4, figsize=(22, 10))
for ax, log in zip(axes.flat, logs_by_k[5]):
    for seg in ss.vmap.segments:
        ax.plot([seg.a.x, seg.b.x], [seg.a.y, seg.b.y], "b-", lw=2)
    paths = {}
    collisions = []
    for step in log.steps:
        for rec in step["agents"]:
            paths.setdefault(rec["id"], []).append((rec["x"], rec["y"]))
            if rec["coll"]:
                collisions.append((rec["x"], rec["y"]))
    for aid, path in sorted(paths.items()):
        ax.plot([p[0] for p in path], [p[1] for p in path], lw=1.5, alpha=0.8)
    if collisions:
        ax.plot(
            [c[0] for c in collisions], [c[1] for c in collisions],
            "rx", ms=5, alpha=0.5,
        )
    succ = sum(a["succ"] for a in log.steps[-1]["agents"])
    ax.set_title(f"{log.footer['reason']} at {log.length}, {succ}/5 done")
    ax.set_aspect("equal")

out = os.path.join(os.path.dirname(__file__), "out", "doorway_paths.png")
os.makedirs(os.path.dirname(out), exist_ok=True)
fig.tight_layout()
fig.savefig(out, dpi=100)
print(f"wrote {out}")
