import numpy as np
import pytest

from minisocial.baselines import (
    ConflictZone,
    ConflictZoneTracker,
    OnlyLocalPolicy,
    OrderMode,
    OrderReward,
    ZoneState,
    cadrl_reward_config,
    evaluate,
    only_local,
    run_episode,
)
from minisocial.environment import EnvConfig, SocialNavEnv
from minisocial.local_planner import Action
from minisocial.obs_reward import (
    EntityView,
    ObservationFrame,
    RewardContext,
    StepEvents,
)
from minisocial.rng import stream
from minisocial.scenarios import MiniGameKind, MiniGameScenarioSet
from minisocial.obs_reward import default_observer, default_rewarder


def frame():
    return ObservationFrame(vector=np.zeros(3), named={})


def view(entity_id, px=0.0, py=0.0):
    return EntityView(
        entity_id=entity_id, px=px, py=py, psi=0.0, vx=0.0, vy=0.0,
        radius=0.3, d_goal=1.0,
    )


class TestOnlyLocal:
    def test_always_go(self):
        rng = stream(0, "obs")
        policy = OnlyLocalPolicy()
        for _ in range(1000):
            obs = ObservationFrame(vector=rng.normal(size=7), named={})
            assert only_local(obs) is Action.GO
            assert policy.act(obs) is Action.GO


class TestPolicySpec:
    def test_resolution(self, tmp_path):
        from minisocial.baselines import PolicyKind, PolicySpec, ScriptedPolicy
        from minisocial.learner import LearnedPolicy, LearnerSpec, init_params
        from minisocial.rng import stream as rng_stream

        assert isinstance(
            PolicySpec(kind=PolicyKind.ONLY_LOCAL).resolve(), OnlyLocalPolicy
        )
        scripted = PolicySpec(
            kind=PolicyKind.SCRIPTED, act_fn=lambda obs: Action.STOP
        ).resolve()
        assert isinstance(scripted, ScriptedPolicy)
        assert scripted.act(None) is Action.STOP

        path = tmp_path / "ckpt.json"
        LearnedPolicy(init_params(4, LearnerSpec(), rng_stream(0, "i"))).save(str(path))
        learned = PolicySpec(kind=PolicyKind.LEARNED, checkpoint=str(path)).resolve()
        assert isinstance(learned, LearnedPolicy)

        with pytest.raises(ValueError):
            PolicySpec(kind=PolicyKind.LEARNED).resolve()
        with pytest.raises(ValueError):
            PolicySpec(kind=PolicyKind.EXTERNAL).resolve()


class TestConflictZone:
    def test_outside_inside_passed(self):
        zone = ConflictZone(center=(0.0, 0.0), radius=1.0)
        assert not zone.update(0, 5.0, 0.0)
        assert zone.states.get(0, ZoneState.OUTSIDE) is ZoneState.OUTSIDE
        assert not zone.update(0, 0.5, 0.0)  # entering is not completion
        assert zone.states[0] is ZoneState.INSIDE
        assert zone.update(0, 2.0, 0.0)  # exit completes
        assert zone.states[0] is ZoneState.PASSED

    def test_never_regresses(self):
        rng = stream(2, "zone")
        zone = ConflictZone(center=(0.0, 0.0), radius=1.0)
        rank = {ZoneState.OUTSIDE: 0, ZoneState.INSIDE: 1, ZoneState.PASSED: 2}
        prev = 0
        for _ in range(500):
            zone.update(0, float(rng.uniform(-2, 2)), float(rng.uniform(-2, 2)))
            cur = rank[zone.states.get(0, ZoneState.OUTSIDE)]
            assert cur >= prev
            prev = cur

    def test_skips_when_unconstrained(self):
        tracker = ConflictZoneTracker()

        class Ctx:
            episode_index, seed, k = 0, 0, 2

        from minisocial.geometry import NavGraph, Route, Scenario, Vec2

        nodes = {0: Vec2(0, 0), 1: Vec2(1, 0), 2: Vec2(0, 1), 3: Vec2(1, 1)}
        ctx = Ctx()
        ctx.graph = NavGraph("g", nodes, [(0, 1), (2, 3)])
        ctx.scenario = Scenario("m", "g", [Route([0, 1]), Route([2, 3])])
        tracker.reset(ctx, {})
        assert tracker.zone is None
        tracker.step({}, {0: view(0)}, StepEvents())  # no-op


class TestOrderRewards:
    def make(self, mode, ranks=None):
        tracker = ConflictZoneTracker(mode=mode)
        tracker.zone = ConflictZone(center=(0.0, 0.0), radius=1.0)
        tracker.assigned_rank = ranks or {}
        return tracker, OrderReward(tracker)

    def reward_for(self, term, agent_id, completions):
        ctx = RewardContext(
            agent_id=agent_id, prev={}, curr={},
            events=StepEvents(zone_completions=completions), global_step=1,
        )
        return term.value(ctx)

    def test_any_order_sole_agent(self):
        _, term = self.make(OrderMode.ANY)
        assert self.reward_for(term, 0, [(0, 0)]) == 25.0

    def test_enforced_rank_match(self):
        _, term = self.make(OrderMode.ENFORCED, ranks={0: 0, 1: 1})
        assert self.reward_for(term, 0, [(0, 0)]) == 25.0

    def test_enforced_rank_mismatch_both_lose(self):
        # agent 1 (assigned rank 1) passes first; agent 0 passes second
        _, term = self.make(OrderMode.ENFORCED, ranks={0: 0, 1: 1})
        assert self.reward_for(term, 1, [(1, 0)]) == 0.0
        assert self.reward_for(term, 0, [(0, 1)]) == 0.0

    def test_no_completion_no_reward(self):
        _, term = self.make(OrderMode.ANY)
        assert self.reward_for(term, 0, []) == 0.0

    def test_enforced_never_exceeds_any(self):
        rng = stream(4, "order")
        for _ in range(100):
            k = int(rng.integers(1, 5))
            order = [int(x) for x in rng.permutation(k)]
            ranks = {int(a): r for r, a in enumerate(rng.permutation(k))}
            completions = [(agent, pos) for pos, agent in enumerate(order)]
            _, any_term = self.make(OrderMode.ANY)
            _, enf_term = self.make(OrderMode.ENFORCED, ranks=ranks)
            total_any = sum(self.reward_for(any_term, a, completions) for a in range(k))
            total_enf = sum(self.reward_for(enf_term, a, completions) for a in range(k))
            assert total_enf <= total_any

    def test_tracker_emits_ranked_completions(self):
        tracker = ConflictZoneTracker(mode=OrderMode.ANY)
        tracker.zone = ConflictZone(center=(0.0, 0.0), radius=1.0)
        events = StepEvents()
        tracker.step({}, {0: view(0, px=0.2), 1: view(1, px=5.0)}, events)
        assert events.zone_completions == []
        events = StepEvents()
        tracker.step({}, {0: view(0, px=3.0), 1: view(1, px=0.3)}, events)
        assert events.zone_completions == [(0, 0)]
        events = StepEvents()
        tracker.step({}, {0: view(0, px=3.0), 1: view(1, px=4.0)}, events)
        assert events.zone_completions == [(1, 1)]


class TestCadrlConfig:
    def test_terms(self):
        rewarder = cadrl_reward_config()
        prev = {0: view(0), 1: view(1, px=1.6)}
        curr_far = {0: view(0), 1: view(1, px=1.6)}
        r = rewarder.compute(0, prev, curr_far, StepEvents(), 1)
        assert r.terms["proximity"] == 0.0
        curr_near = {0: view(0), 1: view(1, px=0.7)}
        r = rewarder.compute(0, prev, curr_near, StepEvents(), 1)
        assert r.terms["proximity"] == pytest.approx(-0.01)
        r = rewarder.compute(0, prev, curr_near, StepEvents(collisions={0: [1]}), 1)
        assert r.terms["collision"] == -10.0


class TestEvaluate:
    def make_env_factory(self, max_steps=40):
        ss = MiniGameScenarioSet(MiniGameKind.OPEN)

        def make_env(k):
            return SocialNavEnv(
                ss, default_observer(), default_rewarder(),
                EnvConfig(num_agents=((0, k),), seed=100, max_steps=max_steps),
            )

        return make_env

    def test_zero_trials_empty(self):
        rows, logs = evaluate(OnlyLocalPolicy(), self.make_env_factory(), 0, [2])
        assert rows == [] and logs == {2: []}

    def test_identical_seeds_identical_tables(self):
        rows1, _ = evaluate(OnlyLocalPolicy(), self.make_env_factory(), 2, [2])
        rows2, _ = evaluate(OnlyLocalPolicy(), self.make_env_factory(), 2, [2])
        assert rows1 == rows2

    def test_episode_counts(self):
        rows, logs = evaluate(OnlyLocalPolicy(), self.make_env_factory(), 3, [2, 3])
        assert [r.trials for r in rows] == [3, 3]
        assert sum(len(v) for v in logs.values()) == 6

    def test_run_episode_returns_closed_log(self):
        env = self.make_env_factory()(2)
        log = run_episode(env, OnlyLocalPolicy(), episode_index=0, k=2)
        assert log.footer is not None
        log.validate()
