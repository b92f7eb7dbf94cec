"""Composable Observer and Rewarder stacks, plus running normalization.

An Observer is an ordered list of observation components; it emits a flat
vector (fixed layout for a fixed config) and a named map from
component.field to values. A Rewarder sums its term list into a
RewardBreakdown that keeps the itemized terms for logging.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


# ---------------------------------------------------------------------------
# World snapshots


@dataclass(frozen=True)
class EntityView:
    """One entity (robot agent or human) as the Observer/Rewarder see it."""

    entity_id: int
    px: float
    py: float
    psi: float
    vx: float
    vy: float
    radius: float
    d_goal: float
    collided: bool = False
    succeeded: bool = False
    is_human: bool = False


WorldSnapshot = dict[int, EntityView]


@dataclass
class StepEvents:
    """Events produced by one environment transition."""

    collisions: dict[int, list[int]] = field(default_factory=dict)  # id -> partner ids
    successes: list[int] = field(default_factory=list)  # ids entering success
    stall_terminated: bool = False
    zone_completions: list[tuple[int, int]] = field(default_factory=list)  # (id, rank)


# ---------------------------------------------------------------------------
# Observation components

_ROT = lambda psi, x, y: (
    x * math.cos(psi) + y * math.sin(psi),
    -x * math.sin(psi) + y * math.cos(psi),
)


@dataclass(frozen=True)
class _NeighborContext:
    views: list[EntityView | None]  # length K, None = padding


class AgentsPose:
    """Own world pose: (x, y) plus heading unless ignore_theta."""

    def __init__(self, ignore_theta: bool = False):
        self.ignore_theta = ignore_theta
        self.name = "agents_pose"

    def fields(self, k: int) -> list[tuple[str, int]]:
        out = [("x", 1), ("y", 1)]
        if not self.ignore_theta:
            out.append(("psi", 1))
        return out

    def emit(self, me: EntityView, neighbors: _NeighborContext) -> dict[str, np.ndarray]:
        out = {"x": np.array([me.px]), "y": np.array([me.py])}
        if not self.ignore_theta:
            out["psi"] = np.array([me.psi])
        return out


class AgentGoalDist:
    """Own distance to goal along the remaining route."""

    def __init__(self):
        self.name = "agent_goal_dist"

    def fields(self, k: int) -> list[tuple[str, int]]:
        return [("d_goal", 1)]

    def emit(self, me: EntityView, neighbors: _NeighborContext) -> dict[str, np.ndarray]:
        return {"d_goal": np.array([me.d_goal])}


class AgentVelocity:
    """Own velocity: world frame if ignore_theta, else body frame."""

    def __init__(self, ignore_theta: bool = False):
        self.ignore_theta = ignore_theta
        self.name = "agent_velocity"

    def fields(self, k: int) -> list[tuple[str, int]]:
        return [("vx", 1), ("vy", 1)]

    def emit(self, me: EntityView, neighbors: _NeighborContext) -> dict[str, np.ndarray]:
        if self.ignore_theta:
            vx, vy = me.vx, me.vy
        else:
            vx, vy = _ROT(me.psi, me.vx, me.vy)
        return {"vx": np.array([vx]), "vy": np.array([vy])}


class CollisionObservation:
    def __init__(self):
        self.name = "collision"

    def fields(self, k: int) -> list[tuple[str, int]]:
        return [("flag", 1)]

    def emit(self, me: EntityView, neighbors: _NeighborContext) -> dict[str, np.ndarray]:
        return {"flag": np.array([1.0 if me.collided else 0.0])}


class SuccessObservation:
    def __init__(self):
        self.name = "success"

    def fields(self, k: int) -> list[tuple[str, int]]:
        return [("flag", 1)]

    def emit(self, me: EntityView, neighbors: _NeighborContext) -> dict[str, np.ndarray]:
        return {"flag": np.array([1.0 if me.succeeded else 0.0])}


class OtherAgentObservables:
    """K nearest entities, each transformed into the observer's frame.

    Relative positions are world-frame offsets when ignore_theta, otherwise
    rotated into the observer's local frame. Optional per-slot velocities
    and a per-slot is_human flag. Missing slots are zero.
    """

    def __init__(
        self,
        ignore_theta: bool = False,
        include_velocities: bool = False,
        velocities_ignore_theta: bool = False,
        include_human_flag: bool = False,
    ):
        self.ignore_theta = ignore_theta
        self.include_velocities = include_velocities
        self.velocities_ignore_theta = velocities_ignore_theta
        self.include_human_flag = include_human_flag
        self.name = "other_agents"

    def fields(self, k: int) -> list[tuple[str, int]]:
        out = [("rel_x", k), ("rel_y", k)]
        if not self.ignore_theta:
            out.append(("rel_theta", k))
        if self.include_velocities:
            out += [("vx", k), ("vy", k)]
        if self.include_human_flag:
            out.append(("is_human", k))
        return out

    def slot_width(self) -> int:
        w = 2 + (0 if self.ignore_theta else 1)
        if self.include_velocities:
            w += 2
        if self.include_human_flag:
            w += 1
        return w

    def emit(self, me: EntityView, neighbors: _NeighborContext) -> dict[str, np.ndarray]:
        k = len(neighbors.views)
        rel_x = np.zeros(k)
        rel_y = np.zeros(k)
        rel_theta = np.zeros(k)
        vx = np.zeros(k)
        vy = np.zeros(k)
        human = np.zeros(k)
        for i, view in enumerate(neighbors.views):
            if view is None:
                continue
            dx, dy = view.px - me.px, view.py - me.py
            if self.ignore_theta:
                rel_x[i], rel_y[i] = dx, dy
            else:
                rel_x[i], rel_y[i] = _ROT(me.psi, dx, dy)
                d = view.psi - me.psi
                rel_theta[i] = math.atan2(math.sin(d), math.cos(d))
            if self.include_velocities:
                if self.velocities_ignore_theta:
                    vx[i], vy[i] = view.vx, view.vy
                else:
                    vx[i], vy[i] = _ROT(me.psi, view.vx, view.vy)
            human[i] = 1.0 if view.is_human else 0.0
        out = {"rel_x": rel_x, "rel_y": rel_y}
        if not self.ignore_theta:
            out["rel_theta"] = rel_theta
        if self.include_velocities:
            out["vx"] = vx
            out["vy"] = vy
        if self.include_human_flag:
            out["is_human"] = human
        return out


class OtherAgentGoalDist:
    """Goal distances of the K nearest entities (off by default: goals are
    private in the partially observable setup)."""

    def __init__(self):
        self.name = "other_agent_goal_dist"

    def fields(self, k: int) -> list[tuple[str, int]]:
        return [("d_goal", k)]

    def emit(self, me: EntityView, neighbors: _NeighborContext) -> dict[str, np.ndarray]:
        out = np.zeros(len(neighbors.views))
        for i, view in enumerate(neighbors.views):
            if view is not None:
                out[i] = view.d_goal
        return {"d_goal": out}


@dataclass
class ObservationFrame:
    vector: np.ndarray
    named: dict[str, np.ndarray]


class Observer:
    """Ordered component stack; K is the max observed-neighbor count."""

    def __init__(self, components: list, k_neighbors: int = 9):
        if not components:
            raise ValueError("observer needs at least one component")
        if k_neighbors < 0:
            raise ValueError("k_neighbors must be >= 0")
        self.components = components
        self.k = k_neighbors

    def layout(self) -> list[tuple[str, int]]:
        """(component.field, width) pairs in vector order."""
        out = []
        for comp in self.components:
            for fname, width in comp.fields(self.k):
                out.append((f"{comp.name}.{fname}", width))
        return out

    def vector_length(self) -> int:
        return sum(w for _, w in self.layout())

    def _nearest(self, me: EntityView, snapshot: WorldSnapshot) -> _NeighborContext:
        others = [v for v in snapshot.values() if v.entity_id != me.entity_id]
        others.sort(key=lambda v: (math.hypot(v.px - me.px, v.py - me.py), v.entity_id))
        views: list[EntityView | None] = list(others[: self.k])
        views += [None] * (self.k - len(views))
        return _NeighborContext(views=views)

    def observe(self, agent_id: int, snapshot: WorldSnapshot) -> ObservationFrame:
        me = snapshot[agent_id]
        neighbors = self._nearest(me, snapshot)
        named: dict[str, np.ndarray] = {}
        parts = []
        for comp in self.components:
            emitted = comp.emit(me, neighbors)
            for fname, _ in comp.fields(self.k):
                named[f"{comp.name}.{fname}"] = emitted[fname]
            parts.append(emitted)
        vector = np.concatenate(
            [
                np.concatenate([p[fname] for fname, _ in comp.fields(self.k)])
                for comp, p in zip(self.components, parts)
            ]
        )
        return ObservationFrame(vector=vector, named=named)


def default_observer(
    k_neighbors: int = 9,
    agent_pose_ignore_theta: bool = False,
    agent_velocity_obs: bool = True,
    agent_velocity_ignore_theta: bool = False,
    other_poses_ignore_theta: bool = False,
    other_velocities_obs: bool = True,
    other_velocities_ignore_theta: bool = False,
    other_goal_dist_obs: bool = False,
) -> Observer:
    """The stock component stack: goal distance, own pose/velocity, the K
    nearest others, collision and success flags."""
    components: list = [
        AgentGoalDist(),
        AgentsPose(ignore_theta=agent_pose_ignore_theta),
    ]
    if agent_velocity_obs:
        components.append(AgentVelocity(ignore_theta=agent_velocity_ignore_theta))
    components.append(
        OtherAgentObservables(
            ignore_theta=other_poses_ignore_theta,
            include_velocities=other_velocities_obs,
            velocities_ignore_theta=other_velocities_ignore_theta,
        )
    )
    if other_goal_dist_obs:
        components.append(OtherAgentGoalDist())
    components += [CollisionObservation(), SuccessObservation()]
    return Observer(components, k_neighbors=k_neighbors)


# ---------------------------------------------------------------------------
# Reward terms


@dataclass
class RewardBreakdown:
    total: float
    terms: dict[str, float]


@dataclass(frozen=True)
class RewardContext:
    agent_id: int
    prev: WorldSnapshot
    curr: WorldSnapshot
    events: StepEvents
    global_step: int


class Success:
    """One-shot reward on the transition into success."""

    def __init__(self, weight: float = 100.0):
        self.weight = weight
        self.name = "success"

    def value(self, ctx: RewardContext) -> float:
        return self.weight if ctx.agent_id in ctx.events.successes else 0.0


class ExistencePenalty:
    """-weight for every step the agent has not yet reached its goal."""

    def __init__(self, weight: float = 1.0):
        self.weight = weight
        self.name = "existence"

    def value(self, ctx: RewardContext) -> float:
        prev = ctx.prev[ctx.agent_id]
        return 0.0 if prev.succeeded else -self.weight


class CollisionPenalty:
    """-weight per colliding step."""

    def __init__(self, weight: float = 10.0):
        self.weight = weight
        self.name = "collision"

    def value(self, ctx: RewardContext) -> float:
        return -self.weight if ctx.events.collisions.get(ctx.agent_id) else 0.0


class ProgressReward:
    """Goal-distance delta along the route polyline (positive = closer)."""

    def __init__(self, weight: float = 1.0):
        self.weight = weight
        self.name = "progress"

    def value(self, ctx: RewardContext) -> float:
        return self.weight * (ctx.prev[ctx.agent_id].d_goal - ctx.curr[ctx.agent_id].d_goal)


class StallPenalty:
    """Large penalty on stall termination for agents not at their goal."""

    def __init__(self, penalty: float = -100_000.0, only_not_finished: bool = True):
        self.penalty = penalty
        self.only_not_finished = only_not_finished
        self.name = "stall"

    def value(self, ctx: RewardContext) -> float:
        if not ctx.events.stall_terminated:
            return 0.0
        if self.only_not_finished and ctx.curr[ctx.agent_id].succeeded:
            return 0.0
        return self.penalty


class ProximityPenalty:
    """-slope * (threshold - d) when the nearest other surface is closer
    than threshold."""

    def __init__(self, threshold: float = 0.2, slope: float = 0.1):
        self.threshold = threshold
        self.slope = slope
        self.name = "proximity"

    def value(self, ctx: RewardContext) -> float:
        me = ctx.curr[ctx.agent_id]
        d_min = math.inf
        for other in ctx.curr.values():
            if other.entity_id == me.entity_id:
                continue
            d = math.hypot(other.px - me.px, other.py - me.py) - me.radius - other.radius
            d_min = min(d_min, d)
        if d_min < self.threshold:
            return -self.slope * (self.threshold - d_min)
        return 0.0


class LinearWeightScheduler:
    """Scales a term by min(1, global_step / duration)."""

    def __init__(self, term, duration: int):
        if duration <= 0:
            raise ValueError("duration must be > 0")
        self.term = term
        self.duration = duration
        self.name = term.name

    def value(self, ctx: RewardContext) -> float:
        scale = min(1.0, ctx.global_step / self.duration)
        return scale * self.term.value(ctx)


class Rewarder:
    """Sums its term list; keeps the itemized terms for logging."""

    def __init__(self, terms: list):
        self.terms = terms

    def compute(
        self,
        agent_id: int,
        prev: WorldSnapshot,
        curr: WorldSnapshot,
        events: StepEvents,
        global_step: int,
    ) -> RewardBreakdown:
        ctx = RewardContext(agent_id, prev, curr, events, global_step)
        terms = {}
        for term in self.terms:
            terms[term.name] = terms.get(term.name, 0.0) + term.value(ctx)
        return RewardBreakdown(total=math.fsum(terms.values()), terms=terms)


def default_rewarder(
    success_weight: float = 100.0,
    existence_weight: float = 1.0,
    collision_weight: float = 10.0,
    stall_penalty: float = -100_000.0,
    stall_only_not_finished: bool = True,
) -> Rewarder:
    return Rewarder(
        [
            Success(weight=success_weight),
            ExistencePenalty(weight=existence_weight),
            CollisionPenalty(weight=collision_weight),
            ProgressReward(),
            StallPenalty(penalty=stall_penalty, only_not_finished=stall_only_not_finished),
        ]
    )


# ---------------------------------------------------------------------------
# Running normalization


class RunningMeanStd:
    """Welford accumulator; population variance."""

    def __init__(self, dim: int):
        self.count = 0
        self.mean = np.zeros(dim)
        self.m2 = np.zeros(dim)

    def update(self, x: np.ndarray) -> None:
        self.count += 1
        delta = x - self.mean
        self.mean = self.mean + delta / self.count
        self.m2 = self.m2 + delta * (x - self.mean)

    @property
    def var(self) -> np.ndarray:
        if self.count == 0:
            return np.ones_like(self.mean)
        return self.m2 / self.count

    def state(self) -> dict:
        return {"count": self.count, "mean": self.mean.tolist(), "m2": self.m2.tolist()}

    @classmethod
    def from_state(cls, state: dict) -> "RunningMeanStd":
        out = cls(len(state["mean"]))
        out.count = state["count"]
        out.mean = np.array(state["mean"], dtype=float)
        out.m2 = np.array(state["m2"], dtype=float)
        return out


class ObservationNormalizer:
    """Per-dimension running standardization with +/-clip. Statistics update
    only in training mode; eval freezes them."""

    def __init__(self, dim: int, clip: float = 10.0, training: bool = True):
        self.rms = RunningMeanStd(dim)
        self.clip = clip
        self.training = training

    def __call__(self, vector: np.ndarray) -> np.ndarray:
        if self.training:
            self.rms.update(vector)
        scaled = (vector - self.rms.mean) / np.sqrt(self.rms.var + 1e-8)
        return np.clip(scaled, -self.clip, self.clip)

    def state(self) -> dict:
        return self.rms.state()

    def load_state(self, state: dict) -> None:
        self.rms = RunningMeanStd.from_state(state)


class RewardNormalizer:
    """Scales rewards by the running std of the discounted return."""

    def __init__(self, gamma: float = 0.99, clip: float = 10.0, training: bool = True):
        self.gamma = gamma
        self.clip = clip
        self.training = training
        self.rms = RunningMeanStd(1)
        self.returns: dict[int, float] = {}

    def __call__(self, agent_id: int, reward: float) -> float:
        if self.training:
            ret = self.gamma * self.returns.get(agent_id, 0.0) + reward
            self.returns[agent_id] = ret
            self.rms.update(np.array([ret]))
        scaled = reward / math.sqrt(float(self.rms.var[0]) + 1e-8)
        return float(np.clip(scaled, -self.clip, self.clip))

    def episode_done(self, agent_id: int) -> None:
        self.returns.pop(agent_id, None)

    def state(self) -> dict:
        return self.rms.state()

    def load_state(self, state: dict) -> None:
        self.rms = RunningMeanStd.from_state(state)
