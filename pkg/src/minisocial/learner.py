"""On-policy policy-gradient learner for the discrete GO/STOP space.

One small feed-forward network (shared trunk, policy and value heads) is
shared by all agents. Updates maximize the clipped surrogate objective over
batches of whole episodes with normalized advantages. Gradients are
hand-derived (see loss_and_grad), which keeps the finite-difference check
honest. Everything is seeded and deterministic.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .local_planner import Action
from .obs_reward import ObservationFrame, ObservationNormalizer, RewardNormalizer
from .rng import stream

CHECKPOINT_VERSION = 1


class TrainingDiverged(RuntimeError):
    pass


@dataclass(frozen=True)
class LearnerSpec:
    learning_rate: float = 3e-4
    gamma: float = 0.99
    gae_lambda: float = 0.95
    clip: float = 0.2
    entropy_coef: float = 0.01
    value_coef: float = 0.5
    batch_episodes: int = 8
    n_epochs: int = 10
    minibatch_size: int = 256
    hidden_sizes: tuple[int, int] = (64, 64)
    # Initial GO-vs-STOP logit bias: start near the reactive baseline
    # (mostly GO) so early batches already contain goal-reaching episodes
    # instead of mutual-stall soup.
    go_bias_init: float = 0.5

    def __post_init__(self):
        for name in (
            "learning_rate", "gamma", "clip", "value_coef",
            "batch_episodes", "n_epochs", "minibatch_size",
        ):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")


# -- network ----------------------------------------------------------------

ACTIONS = [Action.GO, Action.STOP]  # logits order


def init_params(obs_dim: int, spec: LearnerSpec, rng: np.random.Generator) -> dict[str, np.ndarray]:
    h1, h2 = spec.hidden_sizes

    def layer(n_in, n_out, scale):
        w = rng.normal(0.0, 1.0, size=(n_in, n_out)) * scale / math.sqrt(n_in)
        return w, np.zeros(n_out)

    params = {}
    params["w1"], params["b1"] = layer(obs_dim, h1, 1.0)
    params["w2"], params["b2"] = layer(h1, h2, 1.0)
    params["wp"], params["bp"] = layer(h2, len(ACTIONS), 0.01)
    params["bp"] = np.array([spec.go_bias_init, -spec.go_bias_init])
    params["wv"], params["bv"] = layer(h2, 1, 1.0)
    return params


def forward(params: dict, x: np.ndarray) -> tuple[np.ndarray, np.ndarray, tuple]:
    """Returns (log-probs (N,2), values (N,), cache for backprop)."""
    a1 = np.tanh(x @ params["w1"] + params["b1"])
    a2 = np.tanh(a1 @ params["w2"] + params["b2"])
    logits = a2 @ params["wp"] + params["bp"]
    values = (a2 @ params["wv"] + params["bv"])[:, 0]
    logits = logits - logits.max(axis=1, keepdims=True)
    logz = np.log(np.exp(logits).sum(axis=1, keepdims=True))
    logp = logits - logz
    return logp, values, (x, a1, a2)


@dataclass
class Batch:
    obs: np.ndarray  # (N, D)
    actions: np.ndarray  # (N,) int indices into ACTIONS
    logp_old: np.ndarray  # (N,)
    advantages: np.ndarray  # (N,)
    returns: np.ndarray  # (N,)


def loss_and_grad(params: dict, batch: Batch, spec: LearnerSpec) -> tuple[float, dict]:
    """Surrogate loss and its analytic gradient.

    loss = -clip_objective + value_coef * value_mse - entropy_coef * entropy
    """
    n = batch.obs.shape[0]
    logp, values, (x, a1, a2) = forward(params, batch.obs)
    probs = np.exp(logp)
    idx = np.arange(n)
    logp_a = logp[idx, batch.actions]

    ratio = np.exp(logp_a - batch.logp_old)
    clipped = np.clip(ratio, 1.0 - spec.clip, 1.0 + spec.clip)
    unclipped_term = ratio * batch.advantages
    clipped_term = clipped * batch.advantages
    objective = np.minimum(unclipped_term, clipped_term)

    entropy = -(probs * logp).sum(axis=1)
    v_err = values - batch.returns

    loss = (
        -objective.mean()
        + spec.value_coef * np.mean(v_err**2)
        - spec.entropy_coef * entropy.mean()
    )

    # Gradient wrt ratio flows only where the unclipped branch is active.
    use_ratio = unclipped_term <= clipped_term
    dobj_dlogp_a = np.where(use_ratio, ratio * batch.advantages, 0.0)
    dlogits = -(1.0 / n) * dobj_dlogp_a[:, None] * (
        np.eye(len(ACTIONS))[batch.actions] - probs
    )
    # Entropy: dH/dlogit_m = -p_m (logp_m + H)
    dlogits += (spec.entropy_coef / n) * probs * (logp + entropy[:, None])
    dvalues = (2.0 * spec.value_coef / n) * v_err

    grads = {}
    da2 = dlogits @ params["wp"].T + dvalues[:, None] @ params["wv"].T
    grads["wp"] = a2.T @ dlogits
    grads["bp"] = dlogits.sum(axis=0)
    grads["wv"] = a2.T @ dvalues[:, None]
    grads["bv"] = np.array([dvalues.sum()])

    dz2 = da2 * (1.0 - a2**2)
    grads["w2"] = a1.T @ dz2
    grads["b2"] = dz2.sum(axis=0)
    da1 = dz2 @ params["w2"].T
    dz1 = da1 * (1.0 - a1**2)
    grads["w1"] = x.T @ dz1
    grads["b1"] = dz1.sum(axis=0)
    return float(loss), grads


def numeric_grad(params: dict, batch: Batch, spec: LearnerSpec, name: str, eps: float = 1e-6) -> np.ndarray:
    """Central finite differences for one parameter array (oracle side)."""
    base = params[name]
    out = np.zeros_like(base)
    flat = base.ravel()
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        lp, _ = loss_and_grad(params, batch, spec)
        flat[i] = orig - eps
        lm, _ = loss_and_grad(params, batch, spec)
        flat[i] = orig
        out.ravel()[i] = (lp - lm) / (2 * eps)
    return out


class Adam:
    def __init__(self, params: dict, lr: float, beta1=0.9, beta2=0.999, eps=1e-8):
        self.lr = lr
        self.beta1, self.beta2, self.eps = beta1, beta2, eps
        self.m = {k: np.zeros_like(v) for k, v in params.items()}
        self.v = {k: np.zeros_like(v) for k, v in params.items()}
        self.t = 0

    def step(self, params: dict, grads: dict) -> None:
        self.t += 1
        b1t = 1.0 - self.beta1**self.t
        b2t = 1.0 - self.beta2**self.t
        for k in params:
            self.m[k] = self.beta1 * self.m[k] + (1 - self.beta1) * grads[k]
            self.v[k] = self.beta2 * self.v[k] + (1 - self.beta2) * grads[k] ** 2
            params[k] -= self.lr * (self.m[k] / b1t) / (np.sqrt(self.v[k] / b2t) + self.eps)


# -- policy -----------------------------------------------------------------


class LearnedPolicy:
    """Feed-forward GO/STOP policy with an attached (freezable) normalizer."""

    def __init__(
        self,
        params: dict,
        obs_normalizer: ObservationNormalizer | None = None,
        deterministic: bool = True,
    ):
        self.params = params
        self.obs_normalizer = obs_normalizer
        self.deterministic = deterministic

    def _vector(self, obs: ObservationFrame) -> np.ndarray:
        v = obs.vector
        if self.obs_normalizer is not None:
            v = self.obs_normalizer(v)
        return v

    def act(self, obs: ObservationFrame, rng: np.random.Generator | None = None) -> Action:
        logp, _, _ = forward(self.params, self._vector(obs)[None, :])
        if self.deterministic or rng is None:
            return ACTIONS[int(np.argmax(logp[0]))]
        return ACTIONS[int(rng.choice(len(ACTIONS), p=np.exp(logp[0])))]

    def save(self, path: str, config_hash: str = "") -> None:
        doc = {
            "format_version": CHECKPOINT_VERSION,
            "config_hash": config_hash,
            "arrays": {
                k: {"shape": list(v.shape), "data": v.ravel().tolist()}
                for k, v in sorted(self.params.items())
            },
            "obs_normalizer": self.obs_normalizer.state() if self.obs_normalizer else None,
        }
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            json.dump(doc, f, sort_keys=True, separators=(",", ":"))
            f.write("\n")

    @classmethod
    def load(cls, path: str) -> "LearnedPolicy":
        with open(path, "r", encoding="utf-8") as f:
            doc = json.load(f)
        if doc.get("format_version") != CHECKPOINT_VERSION:
            raise ValueError(f"unsupported checkpoint version {doc.get('format_version')!r}")
        params = {
            k: np.array(v["data"], dtype=float).reshape(v["shape"])
            for k, v in doc["arrays"].items()
        }
        normalizer = None
        if doc.get("obs_normalizer") is not None:
            normalizer = ObservationNormalizer(params["w1"].shape[0], training=False)
            normalizer.load_state(doc["obs_normalizer"])
        return cls(params, obs_normalizer=normalizer, deterministic=True)


# -- training ---------------------------------------------------------------


@dataclass
class TrainResult:
    policy: LearnedPolicy
    batches: int
    samples: int
    mean_returns: list[float]  # raw (unnormalized) per-batch mean episode return


def _collect_episode(env, params, obs_normalizer, reward_normalizer, spec, rng):
    """One episode of experience. Returns (per-sample arrays, raw return)."""
    obs_frames = env.reset()
    buffers = {i: {"obs": [], "act": [], "logp": [], "val": [], "rew": []} for i in obs_frames}
    raw_total = 0.0
    norm_obs = {
        i: obs_normalizer(frame.vector) for i, frame in sorted(obs_frames.items())
    }
    while True:
        actions = {}
        for i in sorted(norm_obs):
            x = norm_obs[i][None, :]
            logp, value, _ = forward(params, x)
            a_idx = int(rng.choice(len(ACTIONS), p=np.exp(logp[0])))
            actions[i] = ACTIONS[a_idx]
            buf = buffers[i]
            buf["obs"].append(norm_obs[i])
            buf["act"].append(a_idx)
            buf["logp"].append(float(logp[0, a_idx]))
            buf["val"].append(float(value[0]))
        result = env.step(actions)
        for i, breakdown in result.rewards.items():
            raw_total += breakdown.total
            buffers[i]["rew"].append(reward_normalizer(i, breakdown.total))
        norm_obs = {}
        for i, frame in sorted(result.observations.items()):
            if result.terminated[i]:
                reward_normalizer.episode_done(i)
            else:
                norm_obs[i] = obs_normalizer(frame.vector)
        if result.done:
            for i in result.terminated:
                reward_normalizer.episode_done(i)
            break
    return buffers, raw_total / max(1, env.k)


def _episode_to_samples(buffers, gamma, lam):
    """GAE(lambda) advantages with value bootstrapping inside the episode;
    terminal value 0 (episodes end by success, stall, or the step limit)."""
    obs, acts, logps, advs, rets = [], [], [], [], []
    for i in sorted(buffers):
        buf = buffers[i]
        n = len(buf["rew"])
        adv = [0.0] * n
        gae = 0.0
        for t in reversed(range(n)):
            v_next = buf["val"][t + 1] if t + 1 < n else 0.0
            delta = buf["rew"][t] + gamma * v_next - buf["val"][t]
            gae = delta + gamma * lam * gae
            adv[t] = gae
        obs += buf["obs"]
        acts += buf["act"]
        logps += buf["logp"]
        advs += adv
        rets += [a + v for a, v in zip(adv, buf["val"])]
    return obs, acts, logps, advs, rets


def train(
    env,
    total_steps: int,
    spec: LearnerSpec = LearnerSpec(),
    seed: int = 0,
    normalize_obs: bool = True,
    normalize_reward: bool = True,
    checkpoint_path: str | None = None,
    checkpoint_every: int = 0,  # batches; 0 = only at the end
    baseline_return: float | None = None,
    config_hash: str = "",
    verbose: bool = False,
) -> TrainResult:
    """Train the shared policy for `total_steps` agent samples.

    Aborts with TrainingDiverged if the mean batch return stays an order of
    magnitude below the Only Local baseline for 20 consecutive batches.
    """
    obs_dim = env.observer.vector_length()
    params = init_params(obs_dim, spec, stream(seed, "learner_init"))
    policy_rng = stream(seed, "policy")
    optimizer = Adam(params, spec.learning_rate)
    obs_normalizer = ObservationNormalizer(obs_dim, training=normalize_obs)
    reward_normalizer = RewardNormalizer(gamma=spec.gamma, training=normalize_reward)

    if baseline_return is None:
        baseline_return = _only_local_baseline(env, seed)
    diverged_streak = 0

    shuffle_rng = stream(seed, "learner_shuffle")
    samples = 0
    batches = 0
    mean_returns: list[float] = []
    while samples < total_steps:
        obs, acts, logps, advs, rets = [], [], [], [], []
        batch_returns = []
        for _ in range(spec.batch_episodes):
            buffers, raw_return = _collect_episode(
                env, params, obs_normalizer, reward_normalizer, spec, policy_rng
            )
            o, a, lp, ad, rt = _episode_to_samples(buffers, spec.gamma, spec.gae_lambda)
            obs += o
            acts += a
            logps += lp
            advs += ad
            rets += rt
            batch_returns.append(raw_return)

        adv = np.array(advs)
        adv = (adv - adv.mean()) / (adv.std() + 1e-8)
        batch = Batch(
            obs=np.array(obs),
            actions=np.array(acts, dtype=int),
            logp_old=np.array(logps),
            advantages=adv,
            returns=np.array(rets),
        )
        n = len(obs)
        for _ in range(spec.n_epochs):
            order = shuffle_rng.permutation(n)
            for lo in range(0, n, spec.minibatch_size):
                idx = order[lo : lo + spec.minibatch_size]
                minibatch = Batch(
                    obs=batch.obs[idx],
                    actions=batch.actions[idx],
                    logp_old=batch.logp_old[idx],
                    advantages=batch.advantages[idx],
                    returns=batch.returns[idx],
                )
                _, grads = loss_and_grad(params, minibatch, spec)
                optimizer.step(params, grads)

        samples += len(obs)
        batches += 1
        mean_return = float(np.mean(batch_returns))
        mean_returns.append(mean_return)
        if verbose:
            print(f"batch {batches}: samples={samples} mean_return={mean_return:.1f}")

        threshold = baseline_return - 10.0 * abs(baseline_return)
        diverged_streak = diverged_streak + 1 if mean_return < threshold else 0
        if diverged_streak >= 20:
            raise TrainingDiverged(
                f"mean return {mean_return:.1f} stayed below 10x the Only Local "
                f"baseline ({baseline_return:.1f}) for 20 consecutive batches"
            )

        if checkpoint_path and checkpoint_every and batches % checkpoint_every == 0:
            _frozen_policy(params, obs_normalizer).save(checkpoint_path, config_hash)

    policy = _frozen_policy(params, obs_normalizer)
    if checkpoint_path:
        policy.save(checkpoint_path, config_hash)
    return TrainResult(policy=policy, batches=batches, samples=samples, mean_returns=mean_returns)


def _frozen_policy(params, obs_normalizer) -> LearnedPolicy:
    frozen = ObservationNormalizer(len(obs_normalizer.rms.mean), training=False)
    frozen.load_state(obs_normalizer.state())
    return LearnedPolicy(
        {k: v.copy() for k, v in params.items()}, obs_normalizer=frozen, deterministic=True
    )


def _only_local_baseline(env, seed: int, episodes: int = 5) -> float:
    """Mean raw per-agent episode return under the Only Local policy."""
    totals = []
    for _ in range(episodes):
        obs = env.reset()
        total = 0.0
        while True:
            result = env.step({i: Action.GO for i in sorted(obs)})
            total += sum(b.total for b in result.rewards.values())
            obs = {i: f for i, f in result.observations.items() if not result.terminated[i]}
            if result.done:
                break
        totals.append(total / max(1, env.k))
    return float(np.mean(totals))
