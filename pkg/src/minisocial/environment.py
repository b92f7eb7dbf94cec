"""The episodic multi-agent environment: reset/step lifecycle, simultaneous
transitions, termination rules, and episode logging.

All agents plan against the same pre-step snapshot (simultaneous moves), so
relabeling agents permutes outputs without changing any trajectory. One
instance is single-threaded per step; independent instances share nothing.
"""

from __future__ import annotations

import hashlib
import json
import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .dynamics import AgentState, KinodynamicConfig, MotionCommand, integrate
from .episode_log import EpisodeLog
from .geometry import NavGraph, Route, Scenario, VectorMap
from .human_sim import HumanState, SocialForceParams, step_humans
from .local_planner import (
    Action,
    PlannerParams,
    WallSet,
    advance_waypoint,
    plan_step,
    route_goal_distance,
)
from .obs_reward import (
    EntityView,
    ObservationFrame,
    Observer,
    RewardBreakdown,
    Rewarder,
    StepEvents,
    WorldSnapshot,
)
from .rng import stream


class ConfigurationError(ValueError):
    pass


class ContractError(RuntimeError):
    """Caller broke the step/reset protocol (e.g. action for a dead agent)."""


@dataclass(frozen=True)
class EnvConfig:
    """Episode-control knobs. `num_agents` is a schedule of
    (first_episode_index, k) pairs, strictly increasing from index 0."""

    num_agents: tuple[tuple[int, int], ...] = ((0, 3),)
    max_steps: int = 3000
    dt: float = 0.1
    stall_window: int = 100
    stall_delta: float = 0.5
    collision_terminates: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.max_steps <= 0:
            raise ConfigurationError("max_steps must be > 0")
        if self.stall_delta <= 0:
            raise ConfigurationError("stall_delta must be > 0")
        starts = [e for e, _ in self.num_agents]
        if not starts or starts[0] != 0 or starts != sorted(set(starts)):
            raise ConfigurationError(
                "num_agents schedule must start at episode 0 with strictly increasing indices"
            )

    def k_for_episode(self, episode_index: int) -> int:
        k = self.num_agents[0][1]
        for start, value in self.num_agents:
            if episode_index >= start:
                k = value
        return k


def detect_stall(histories: list[list[tuple[float, float]]], stall_delta: float) -> bool:
    """True iff the summed path length over the window is below stall_delta."""
    total = 0.0
    for positions in histories:
        for (x0, y0), (x1, y1) in zip(positions, list(positions)[1:]):
            total += math.hypot(x1 - x0, y1 - y0)
    return total < stall_delta


class FixedScenarioSet:
    """A single loaded scenario; supports any k up to its route count."""

    def __init__(self, vmap: VectorMap, graph: NavGraph, scenario: Scenario, name: str | None = None):
        scenario.validate(graph)
        self.vmap = vmap
        self.graph = graph
        self.scenario = scenario
        self.name = name if name is not None else vmap.name

    def max_agents(self) -> int:
        return len(self.scenario.agent_routes)

    def sample(self, k: int, num_humans: int, rng) -> tuple[VectorMap, NavGraph, Scenario]:
        if k > len(self.scenario.agent_routes):
            raise ConfigurationError(
                f"scenario {self.name!r} defines {len(self.scenario.agent_routes)} agent routes, need {k}"
            )
        if num_humans > len(self.scenario.human_routes):
            raise ConfigurationError(
                f"scenario {self.name!r} defines {len(self.scenario.human_routes)} human routes, need {num_humans}"
            )
        return self.vmap, self.graph, Scenario(
            map_ref=self.scenario.map_ref,
            graph_ref=self.scenario.graph_ref,
            agent_routes=self.scenario.agent_routes[:k],
            human_routes=self.scenario.human_routes[:num_humans],
        )


@dataclass
class EpisodeContext:
    """What reward trackers see at episode start."""

    episode_index: int
    seed: int
    k: int
    vmap: VectorMap
    graph: NavGraph
    scenario: Scenario


@dataclass
class StepResult:
    observations: dict[int, ObservationFrame]
    rewards: dict[int, RewardBreakdown]
    terminated: dict[int, bool]
    infos: dict[int, dict]
    done: bool
    reason: str | None = None


def _config_hash(payload: dict) -> str:
    canon = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canon.encode()).hexdigest()[:16]


class SocialNavEnv:
    """POSG episodic environment over a scenario set.

    `kinodynamics` may be one config (shared) or a list matching the largest
    k. `trackers` are reward-event hooks (e.g. conflict-zone passage) with
    reset(ctx, snapshot) / step(prev, curr, events) methods.
    """

    def __init__(
        self,
        scenario_set,
        observer: Observer,
        rewarder: Rewarder,
        config: EnvConfig = EnvConfig(),
        kinodynamics: KinodynamicConfig | list[KinodynamicConfig] | None = None,
        planner: PlannerParams = PlannerParams(),
        human_params: SocialForceParams = SocialForceParams(),
        num_humans: int = 0,
        trackers: list | None = None,
        log_enabled: bool = True,
    ):
        self.scenario_set = scenario_set
        self.observer = observer
        self.rewarder = rewarder
        self.config = config
        self.kinodynamics = kinodynamics if kinodynamics is not None else KinodynamicConfig()
        self.planner = planner
        self.human_params = human_params
        self.num_humans = num_humans
        self.trackers = trackers or []
        self.log_enabled = log_enabled

        self.global_step = 0  # lifetime transition count (drives schedulers)
        self._episode_counter = 0
        self._ready = False
        self._log: EpisodeLog | None = None

    # -- lifecycle ----------------------------------------------------------

    def reset(self, episode_index: int | None = None, k: int | None = None) -> dict[int, ObservationFrame]:
        if episode_index is None:
            episode_index = self._episode_counter
        self._episode_counter = episode_index + 1
        self.episode_index = episode_index

        if k is None:
            k = self.config.k_for_episode(episode_index)
        rng = stream(self.config.seed, f"scenario/{episode_index}")
        self.vmap, self.graph, self.scenario = self.scenario_set.sample(
            k, self.num_humans, rng
        )
        self.walls = WallSet(self.vmap)
        self.k = k

        cfgs = self.kinodynamics
        self._cfgs = list(cfgs) if isinstance(cfgs, list) else [cfgs] * k
        if len(self._cfgs) < k:
            raise ConfigurationError(f"{len(self._cfgs)} kinodynamic configs for k={k}")

        self.agents: dict[int, AgentState] = {}
        self.routes: dict[int, Route] = {}
        for i, route in enumerate(self.scenario.agent_routes):
            start = self.graph.position(route.node_ids[0])
            nxt = self.graph.position(route.node_ids[1])
            psi = math.atan2(nxt.y - start.y, nxt.x - start.x)
            d_goal = route_goal_distance(start.x, start.y, route, self.graph, 1)
            self.agents[i] = AgentState(
                px=start.x, py=start.y, psi=psi, d_goal=d_goal, route_progress=1
            )
            self.routes[i] = route

        self.humans: list[HumanState] = []
        self.human_routes = list(self.scenario.human_routes)
        for route in self.human_routes:
            start = self.graph.position(route.node_ids[0])
            goal = self.graph.position(route.node_ids[1])
            self.humans.append(
                HumanState(
                    px=start.x, py=start.y,
                    goal_x=goal.x, goal_y=goal.y,
                    v_pref=self.human_params.v_pref,
                    route_progress=1,
                )
            )

        self.t = 0
        self.succeeded: set[int] = set()
        self.live: set[int] = set(range(k))
        self.done = False
        self.reason: str | None = None
        self._collided_now: dict[int, list[int]] = {}
        self._history = {
            i: deque([(a.px, a.py)], maxlen=self.config.stall_window + 1)
            for i, a in self.agents.items()
        }

        ctx = EpisodeContext(
            episode_index=episode_index, seed=self.config.seed, k=k,
            vmap=self.vmap, graph=self.graph, scenario=self.scenario,
        )
        snapshot = self._snapshot()
        self._last_snapshot = snapshot
        for tracker in self.trackers:
            tracker.reset(ctx, snapshot)

        if self.log_enabled:
            self._log = EpisodeLog(
                header={
                    "scenario": getattr(self.scenario_set, "name", "scenario"),
                    "k": k,
                    "seed": self.config.seed,
                    "config_hash": self._hash_config(),
                }
            )
        else:
            self._log = None
        self._ready = True
        return {i: self.observer.observe(i, snapshot) for i in sorted(self.live)}

    def config_hash(self) -> str:
        """Short digest of the episode-control configuration; stamped into
        log headers and checkpoints."""
        return self._hash_config()

    def _hash_config(self) -> str:
        cfg = self.config
        payload = {
            "num_agents": [list(p) for p in cfg.num_agents],
            "max_steps": cfg.max_steps,
            "dt": cfg.dt,
            "stall_window": cfg.stall_window,
            "stall_delta": cfg.stall_delta,
            "collision_terminates": cfg.collision_terminates,
            "seed": cfg.seed,
            "num_humans": self.num_humans,
            "planner": {
                "num_candidates": self.planner.num_candidates,
                "horizon": self.planner.horizon,
                "w_align": self.planner.w_align,
                "w_clear": self.planner.w_clear,
                "waypoint_radius": self.planner.waypoint_radius,
                "safety_margin": self.planner.safety_margin,
            },
        }
        return _config_hash(payload)

    def _snapshot(self) -> WorldSnapshot:
        snap: WorldSnapshot = {}
        for i in sorted(self.agents):
            a = self.agents[i]
            snap[i] = EntityView(
                entity_id=i, px=a.px, py=a.py, psi=a.psi, vx=a.vx, vy=a.vy,
                radius=self._cfgs[i].radius, d_goal=a.d_goal,
                collided=bool(self._collided_now.get(i)),
                succeeded=i in self.succeeded,
            )
        for j, h in enumerate(self.humans):
            hid = self.k + j
            d_goal = route_goal_distance(
                h.px, h.py, self.human_routes[j], self.graph, h.route_progress
            )
            snap[hid] = EntityView(
                entity_id=hid, px=h.px, py=h.py,
                psi=math.atan2(h.vy, h.vx) if math.hypot(h.vx, h.vy) > 1e-9 else 0.0,
                vx=h.vx, vy=h.vy, radius=h.radius, d_goal=d_goal, is_human=True,
            )
        return snap

    # -- stepping -----------------------------------------------------------

    def step(self, actions: dict[int, Action]) -> StepResult:
        if not self._ready:
            raise ContractError("step() before reset()")
        if self.done:
            raise ContractError("step() after episode termination")
        acting = set(actions)
        if acting != self.live:
            unexpected = sorted(acting - self.live)
            missing = sorted(self.live - acting)
            raise ContractError(
                f"actions mismatch: unexpected={unexpected} missing={missing}"
            )

        dt = self.config.dt
        prev_snapshot = self._last_snapshot
        prev_states = dict(self.agents)

        # Plan everything from the pre-step snapshot, then move everyone.
        commands: dict[int, MotionCommand] = {}
        for i in sorted(self.live):
            if i in self.succeeded:
                continue
            other_radii = [self._cfgs[j].radius for j in sorted(prev_states) if j != i]
            others = [prev_states[j] for j in sorted(prev_states) if j != i]
            for j, h in enumerate(self.humans):
                others.append(AgentState(px=h.px, py=h.py, psi=0.0, vx=h.vx, vy=h.vy))
                other_radii.append(h.radius)
            commands[i] = plan_step(
                prev_states[i], actions[i], self.routes[i], self.graph, self.walls,
                others, self._cfgs[i], dt, self.planner, other_radii,
            )

        for i, cmd in commands.items():
            self.agents[i] = integrate(prev_states[i], cmd, self._cfgs[i], dt)

        if self.humans:
            agent_discs = [
                ((a.px, a.py), (a.vx, a.vy), self._cfgs[i].radius)
                for i, a in sorted(self.agents.items())
            ]
            self.humans = step_humans(
                self.humans, agent_discs, self.vmap, dt, self.human_params
            )

        for i in sorted(self.live - self.succeeded):
            self.agents[i] = advance_waypoint(
                self.agents[i], self.routes[i], self.graph, self.planner.waypoint_radius
            )
        for j, h in enumerate(self.humans):
            route = self.human_routes[j]
            target = self.graph.position(route.node_ids[h.route_progress])
            if (
                h.route_progress < len(route.node_ids) - 1
                and math.hypot(target.x - h.px, target.y - h.py) <= self.planner.waypoint_radius
            ):
                progress = h.route_progress + 1
                goal = self.graph.position(route.node_ids[progress])
                self.humans[j] = replace(
                    h, route_progress=progress, goal_x=goal.x, goal_y=goal.y
                )

        collisions = self._detect_collisions()
        self._collided_now = collisions

        new_successes = []
        for i in sorted(self.live - self.succeeded):
            a = self.agents[i]
            route = self.routes[i]
            if a.route_progress == len(route.node_ids) - 1 and a.d_goal < self.planner.waypoint_radius:
                self.succeeded.add(i)
                new_successes.append(i)
                # Freeze: success means the agent parks as a static obstacle.
                self.agents[i] = replace(a, vx=0.0, vy=0.0, omega=0.0)

        self.t += 1
        for i, a in self.agents.items():
            self._history[i].append((a.px, a.py))

        stall = False
        if self.t >= self.config.stall_window and len(self.succeeded) < self.k:
            stall = detect_stall(
                [list(h) for _, h in sorted(self._history.items())],
                self.config.stall_delta,
            )

        events = StepEvents(
            collisions=collisions,
            successes=new_successes,
            stall_terminated=stall,
        )
        new_snapshot = self._snapshot()
        self._last_snapshot = new_snapshot
        for tracker in self.trackers:
            tracker.step(prev_snapshot, new_snapshot, events)

        self.global_step += 1
        rewards = {
            i: self.rewarder.compute(i, prev_snapshot, new_snapshot, events, self.global_step)
            for i in sorted(self.live)
        }

        any_collision = any(collisions.values())
        reason = None
        if len(self.succeeded) == self.k:
            reason = "all_succeeded"
        elif stall:
            reason = "stall"
        elif self.config.collision_terminates and any_collision:
            reason = "collision"
        elif self.t >= self.config.max_steps:
            reason = "max_steps"
        self.done = reason is not None
        self.reason = reason

        terminated = {
            i: self.done or i in self.succeeded for i in sorted(self.live)
        }
        infos = {
            i: {
                "collision": bool(collisions.get(i)),
                "success": i in self.succeeded,
                "d_goal": self.agents[i].d_goal,
            }
            for i in sorted(self.live)
        }
        observations = {i: self.observer.observe(i, new_snapshot) for i in sorted(self.live)}

        if self._log is not None:
            self._append_log(actions, rewards, collisions)
            if self.done:
                self._log.close(reason)

        result = StepResult(
            observations=observations,
            rewards=rewards,
            terminated=terminated,
            infos=infos,
            done=self.done,
            reason=reason,
        )
        self.live = {i for i in self.live if not terminated[i]}
        return result

    def _detect_collisions(self) -> dict[int, list[int]]:
        """Agent collisions with agents, humans, and walls. Symmetric."""
        hits: dict[int, set[int]] = {i: set() for i in self.agents}
        entities = [
            (i, self.agents[i].px, self.agents[i].py, self._cfgs[i].radius)
            for i in sorted(self.agents)
        ] + [
            (self.k + j, h.px, h.py, h.radius) for j, h in enumerate(self.humans)
        ]
        for a in range(len(entities)):
            ia, xa, ya, ra = entities[a]
            for b in range(a + 1, len(entities)):
                ib, xb, yb, rb = entities[b]
                if math.hypot(xb - xa, yb - ya) < ra + rb:
                    if ia in hits:
                        hits[ia].add(ib)
                    if ib in hits:
                        hits[ib].add(ia)
        if self.walls.a.shape[0]:
            points = np.array([(x, y) for _, x, y, _ in entities[: len(self.agents)]])
            dist = self.walls.min_distance(points)
            for idx, (i, _, _, r) in enumerate(entities[: len(self.agents)]):
                if dist[idx] < r:
                    hits[i].add(-1)
        return {i: sorted(s) for i, s in hits.items() if s}

    def _append_log(self, actions, rewards, collisions) -> None:
        agents = []
        for i in sorted(self.agents):
            a = self.agents[i]
            agents.append(
                {
                    "id": i,
                    "x": a.px,
                    "y": a.py,
                    "psi": a.psi,
                    "v": a.speed,
                    "action": actions[i].value if i in actions else Action.STOP.value,
                    "reward": rewards[i].total if i in rewards else 0.0,
                    "coll": collisions.get(i, []),
                    "succ": i in self.succeeded,
                }
            )
        humans = [
            {"id": self.k + j, "x": h.px, "y": h.py}
            for j, h in enumerate(self.humans)
        ]
        self._log.append_step(self.t - 1, agents, humans)

    def abort(self, reason: str) -> None:
        """End the episode from outside (e.g. a dropped controller
        connection); the log closes with the given reason."""
        self.done = True
        self.reason = reason
        if self._log is not None and self._log.footer is None:
            self._log.close(reason)

    def take_episode_log(self) -> EpisodeLog:
        if self._log is None:
            raise ContractError("logging disabled")
        if self._log.footer is None:
            raise ContractError("episode still running")
        log = self._log
        self._log = None
        return log
