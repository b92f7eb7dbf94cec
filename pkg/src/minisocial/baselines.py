"""Reference policies, sub-goal reward schemes, and the evaluation harness.

Only Local issues GO every step (pure reactive avoidance). Any Order pays
agents for passing through the scenario's conflict zone; Enforced Order pays
only when the agent's passage rank matches a per-episode random permutation.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from .episode_log import EpisodeLog
from .geometry import find_common_point
from .learner import LearnedPolicy  # noqa: F401  (re-exported: checkpoint loading)
from .local_planner import Action
from .metrics import MetricsRow, compute_metrics
from .obs_reward import (
    CollisionPenalty,
    ExistencePenalty,
    ProximityPenalty,
    RewardContext,
    Rewarder,
    Success,
)
from .rng import stream


def only_local(obs) -> Action:
    """The ablation policy: GO, unconditionally."""
    return Action.GO


class OnlyLocalPolicy:
    deterministic = True

    def act(self, obs, rng=None) -> Action:
        return only_local(obs)


class PolicyKind(Enum):
    ONLY_LOCAL = "only_local"
    SCRIPTED = "scripted"
    LEARNED = "learned"
    EXTERNAL = "external"


@dataclass
class PolicySpec:
    """How to obtain a policy: a named baseline, a scripted act function,
    a learner checkpoint, or an external wire controller."""

    kind: PolicyKind
    checkpoint: str | None = None  # LEARNED
    act_fn: object | None = None  # SCRIPTED: act(obs) -> Action
    learner: object | None = None  # LearnerSpec for training runs

    def resolve(self):
        if self.kind is PolicyKind.ONLY_LOCAL:
            return OnlyLocalPolicy()
        if self.kind is PolicyKind.SCRIPTED:
            if self.act_fn is None:
                raise ValueError("scripted policy needs act_fn")
            return ScriptedPolicy(self.act_fn)
        if self.kind is PolicyKind.LEARNED:
            if self.checkpoint is None:
                raise ValueError("learned policy needs a checkpoint path")
            return LearnedPolicy.load(self.checkpoint)
        raise ValueError("external policies connect via the wire protocol; nothing to resolve")


class ScriptedPolicy:
    deterministic = True

    def __init__(self, act_fn):
        self.act_fn = act_fn

    def act(self, obs, rng=None) -> Action:
        return self.act_fn(obs)


# ---------------------------------------------------------------------------
# Conflict zones and sub-goal rewards


class ZoneState(Enum):
    OUTSIDE = "outside"
    INSIDE = "inside"
    PASSED = "passed"


@dataclass
class ConflictZone:
    """Entry/exit tracking around the scenario's common point.

    Transitions are monotone: outside -> inside -> passed.
    """

    center: tuple[float, float]
    radius: float = 1.0
    states: dict[int, ZoneState] = field(default_factory=dict)

    def update(self, agent_id: int, x: float, y: float) -> bool:
        """Advance one agent's state; True on the transition into PASSED."""
        state = self.states.get(agent_id, ZoneState.OUTSIDE)
        if state is ZoneState.PASSED:
            return False
        cx, cy = self.center
        inside = (x - cx) ** 2 + (y - cy) ** 2 < self.radius**2
        if state is ZoneState.OUTSIDE and inside:
            self.states[agent_id] = ZoneState.INSIDE
            return False
        if state is ZoneState.INSIDE and not inside:
            self.states[agent_id] = ZoneState.PASSED
            return True
        return False


class OrderMode(Enum):
    ANY = "any"
    ENFORCED = "enforced"


class ConflictZoneTracker:
    """Environment hook that turns zone passages into step events.

    In ENFORCED mode a per-episode random permutation assigns each agent a
    required passage rank; the reward term pays only on a match.
    """

    def __init__(self, mode: OrderMode = OrderMode.ANY, radius: float = 1.0):
        self.mode = mode
        self.radius = radius
        self.zone: ConflictZone | None = None
        self.assigned_rank: dict[int, int] = {}
        self._completed = 0

    def reset(self, ctx, snapshot) -> None:
        common = find_common_point(ctx.scenario, ctx.graph)
        self.zone = None
        self.assigned_rank = {}
        self._completed = 0
        if common is None:
            return  # unconstrained episode: no zone, no sub-goal reward
        self.zone = ConflictZone(center=(common.x, common.y), radius=self.radius)
        if self.mode is OrderMode.ENFORCED:
            rng = stream(ctx.seed, f"order/{ctx.episode_index}")
            perm = rng.permutation(ctx.k)
            self.assigned_rank = {int(agent): rank for rank, agent in enumerate(perm)}

    def step(self, prev, curr, events) -> None:
        if self.zone is None:
            return
        for agent_id in sorted(curr):
            view = curr[agent_id]
            if view.is_human:
                continue
            if self.zone.update(agent_id, view.px, view.py):
                events.zone_completions.append((agent_id, self._completed))
                self._completed += 1


class OrderReward:
    """+r_pass on conflict-zone completion; ENFORCED also requires the
    completion rank to match the assigned one."""

    def __init__(self, tracker: ConflictZoneTracker, r_pass: float = 25.0):
        self.tracker = tracker
        self.r_pass = r_pass
        self.name = "subgoal"

    def value(self, ctx: RewardContext) -> float:
        for agent_id, rank in ctx.events.zone_completions:
            if agent_id != ctx.agent_id:
                continue
            if self.tracker.mode is OrderMode.ANY:
                return self.r_pass
            if self.tracker.assigned_rank.get(agent_id) == rank:
                return self.r_pass
            return 0.0
        return 0.0


def cadrl_reward_config(
    success_weight: float = 100.0,
    proximity_threshold: float = 0.2,
    proximity_slope: float = 0.1,
) -> Rewarder:
    """Sparse goal reward, time and collision penalties, and a penalty for
    getting too close to other agents."""
    return Rewarder(
        [
            Success(weight=success_weight),
            ExistencePenalty(),
            CollisionPenalty(),
            ProximityPenalty(threshold=proximity_threshold, slope=proximity_slope),
        ]
    )


# ---------------------------------------------------------------------------
# Episode runner and evaluation protocol


def run_episode(env, policy, episode_index: int | None = None, k: int | None = None) -> EpisodeLog:
    """Drive one episode with a policy object (act(obs) -> Action)."""
    obs = env.reset(episode_index=episode_index, k=k)
    while True:
        actions = {i: policy.act(frame) for i, frame in sorted(obs.items())}
        result = env.step(actions)
        obs = {
            i: frame
            for i, frame in result.observations.items()
            if not result.terminated[i]
        }
        if result.done:
            return env.take_episode_log()


def evaluate(
    policy,
    make_env,
    trials: int,
    k_list: list[int],
    policy_name: str = "policy",
) -> tuple[list[MetricsRow], dict[int, list[EpisodeLog]]]:
    """Seeded evaluation: `trials` episodes per k, deterministic policy mode.

    `make_env(k)` builds a fresh environment for each agent count; episode
    indices 0..trials-1 key the per-episode scenario sampling.
    """
    rows: list[MetricsRow] = []
    logs_by_k: dict[int, list[EpisodeLog]] = {}
    for k in k_list:
        env = make_env(k)
        logs = [run_episode(env, policy, episode_index=t, k=k) for t in range(trials)]
        logs_by_k[k] = logs
        if logs:
            rows.append(compute_metrics(logs, policy=policy_name))
    return rows, logs_by_k
