import numpy as np
import pytest

from minisocial.environment import EnvConfig, SocialNavEnv
from minisocial.learner import (
    ACTIONS,
    Batch,
    LearnedPolicy,
    LearnerSpec,
    TrainingDiverged,
    forward,
    init_params,
    loss_and_grad,
    numeric_grad,
    train,
)
from minisocial.local_planner import Action
from minisocial.obs_reward import ObservationFrame, default_observer, default_rewarder
from minisocial.rng import stream
from minisocial.scenarios import MiniGameKind, MiniGameScenarioSet

SPEC = LearnerSpec()


def frozen_batch(n=64, dim=9, seed=21):
    """Random but fixed batch with mixed clipped/unclipped samples."""
    rng = stream(seed, "batch")
    params = init_params(dim, SPEC, stream(seed, "init"))
    obs = rng.normal(size=(n, dim))
    actions = rng.integers(0, len(ACTIONS), size=n)
    logp, _, _ = forward(params, obs)
    # perturb old log-probs so ratios spread across the clip boundary
    logp_old = logp[np.arange(n), actions] + rng.normal(0, 0.3, size=n)
    advantages = rng.normal(size=n)
    returns = rng.normal(size=n)
    batch = Batch(
        obs=obs, actions=actions, logp_old=logp_old,
        advantages=advantages, returns=returns,
    )
    return params, batch


def small_env(k=2, max_steps=60, seed=5):
    ss = MiniGameScenarioSet(MiniGameKind.OPEN)
    return SocialNavEnv(
        ss, default_observer(), default_rewarder(),
        EnvConfig(num_agents=((0, k),), seed=seed, max_steps=max_steps),
        log_enabled=False,
    )


class TestGradients:
    def test_analytic_matches_finite_differences(self):
        params, batch = frozen_batch()
        _, grads = loss_and_grad(params, batch, SPEC)
        total = good = 0
        for name in sorted(params):
            numeric = numeric_grad(params, batch, SPEC, name)
            analytic = grads[name]
            denom = np.maximum(np.maximum(np.abs(numeric), np.abs(analytic)), 1e-6)
            rel = np.abs(analytic - numeric) / denom
            good += int((rel <= 1e-3).sum())
            total += rel.size
        assert good / total >= 0.95

    def test_clipping_exercised(self):
        params, batch = frozen_batch()
        logp, _, _ = forward(params, batch.obs)
        ratio = np.exp(logp[np.arange(len(batch.actions)), batch.actions] - batch.logp_old)
        assert (ratio > 1.2).any() and (ratio < 0.8).any()

    def test_loss_decreases_under_adam(self):
        from minisocial.learner import Adam

        params, batch = frozen_batch()
        optimizer = Adam(params, 1e-3)
        first, _ = loss_and_grad(params, batch, SPEC)
        for _ in range(50):
            _, grads = loss_and_grad(params, batch, SPEC)
            optimizer.step(params, grads)
        last, _ = loss_and_grad(params, batch, SPEC)
        assert last < first


class TestPolicy:
    def test_forward_shapes_and_probs(self):
        params = init_params(6, SPEC, stream(0, "init"))
        x = stream(1, "x").normal(size=(5, 6))
        logp, values, _ = forward(params, x)
        assert logp.shape == (5, 2) and values.shape == (5,)
        assert np.allclose(np.exp(logp).sum(axis=1), 1.0)

    def test_argmax_deterministic(self):
        params = init_params(4, SPEC, stream(3, "init"))
        policy = LearnedPolicy(params, deterministic=True)
        obs = ObservationFrame(vector=np.array([0.1, -0.2, 0.3, 0.0]), named={})
        assert policy.act(obs) == policy.act(obs)

    def test_checkpoint_round_trip(self, tmp_path):
        params = init_params(4, SPEC, stream(3, "init"))
        policy = LearnedPolicy(params)
        path = tmp_path / "ckpt.json"
        policy.save(str(path), config_hash="abc")
        loaded = LearnedPolicy.load(str(path))
        for k in params:
            assert np.array_equal(loaded.params[k], params[k])
        obs = ObservationFrame(vector=np.array([0.5, 0.1, -0.4, 2.0]), named={})
        assert loaded.act(obs) == policy.act(obs)

    def test_checkpoint_version_guard(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text('{"format_version": 99, "arrays": {}}')
        with pytest.raises(ValueError, match="version"):
            LearnedPolicy.load(str(path))


class TestTrain:
    def test_zero_steps_returns_initial_policy(self):
        env = small_env()
        result = train(env, total_steps=0, seed=1, baseline_return=0.0)
        assert result.batches == 0 and result.samples == 0
        obs = env.reset()
        action = result.policy.act(next(iter(obs.values())))
        assert action in (Action.GO, Action.STOP)

    def test_deterministic_checkpoints(self, tmp_path):
        spec = LearnerSpec(batch_episodes=2)
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        train(
            small_env(), total_steps=150, spec=spec, seed=9,
            checkpoint_path=str(p1), baseline_return=0.0,
        )
        train(
            small_env(), total_steps=150, spec=spec, seed=9,
            checkpoint_path=str(p2), baseline_return=0.0,
        )
        assert p1.read_bytes() == p2.read_bytes()

    def test_training_changes_params(self):
        spec = LearnerSpec(batch_episodes=2)
        result = train(small_env(), total_steps=150, spec=spec, seed=9, baseline_return=0.0)
        fresh = init_params(
            small_env().observer.vector_length(), spec, stream(9, "learner_init")
        )
        assert any(
            not np.array_equal(result.policy.params[k], fresh[k]) for k in fresh
        )

    def test_divergence_detector_aborts(self):
        # Near-zero baseline puts the abort threshold just below zero; the
        # per-step existence penalties keep every batch under it, so the
        # detector must trip at exactly 20 consecutive batches.
        env = small_env(max_steps=5)
        spec = LearnerSpec(batch_episodes=1)
        with pytest.raises(TrainingDiverged):
            train(env, total_steps=100_000, spec=spec, seed=2, baseline_return=0.001)

    def test_spec_invariants(self):
        with pytest.raises(ValueError):
            LearnerSpec(learning_rate=0.0)
        with pytest.raises(ValueError):
            LearnerSpec(batch_episodes=0)
