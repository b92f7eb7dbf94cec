# Composing observation and reward stacks: swap components in and out,
# inspect the vector layout, and watch the per-term reward breakdown of a
# single doorway episode.

from minisocial.environment import EnvConfig, SocialNavEnv
from minisocial.local_planner import Action
from minisocial.obs_reward import (
    AgentGoalDist,
    AgentsPose,
    CollisionObservation,
    Observer,
    OtherAgentGoalDist,
    OtherAgentObservables,
    SuccessObservation,
    default_rewarder,
)
from minisocial.scenarios import MiniGameKind, MiniGameScenarioSet

# A compact partially observable stack: neighbors are world-frame offsets,
# their goals stay hidden.
observer = Observer(
    [
        AgentGoalDist(),
        AgentsPose(ignore_theta=True),
        OtherAgentObservables(ignore_theta=True),
        CollisionObservation(),
        SuccessObservation(),
    ],
    k_neighbors=3,
)
print("vector layout:")
for name, width in observer.layout():
    print(f"  {name:28s} x{width}")
print(f"total width: {observer.vector_length()}")

# Uncommenting goal sharing makes the game fully observable and widens
# the vector by exactly K slots:
full = Observer(observer.components + [OtherAgentGoalDist()], k_neighbors=3)
print(f"with other-agent goals: {full.vector_length()} "
      f"(+{full.vector_length() - observer.vector_length()})")

env = SocialNavEnv(
    MiniGameScenarioSet(MiniGameKind.DOORWAY),
    observer,
    default_rewarder(),
    EnvConfig(num_agents=((0, 2),), seed=11),
)
obs = env.reset()
print(f"\nagent 0 first observation: {obs[0].vector.round(2).tolist()}")

totals = {}
while True:
    result = env.step({i: Action.GO for i in sorted(obs)})
    for i, breakdown in result.rewards.items():
        for term, value in breakdown.terms.items():
            totals[term] = totals.get(term, 0.0) + value
    obs = {i: f for i, f in result.observations.items() if not result.terminated[i]}
    if result.done:
        break

print(f"\nepisode over ({result.reason} at step {env.t}); summed terms:")
for term, value in sorted(totals.items()):
    print(f"  {term:12s} {value:12.2f}")
