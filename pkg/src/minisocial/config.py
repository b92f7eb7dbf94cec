"""Run configuration files and the builders that turn them into runnable
environments, rewarders, and policies.

The file is JSON. Unknown top-level keys are rejected with a diagnostic;
the accepted surface is the training-config key set (agent schedules, eval
protocol, policy/algorithm fields, observation toggles, the stall penalty
pair) plus the artifact extensions: dt, planner, humans, kinodynamics,
seed, metrics. Unrecognized values inside accepted fields (policy_algo_*,
device) are recorded with a warning rather than rejected.
"""

from __future__ import annotations

import copy
import json
import os
import warnings
from dataclasses import dataclass, field

from .baselines import ConflictZoneTracker, OnlyLocalPolicy, OrderMode, OrderReward, cadrl_reward_config
from .dynamics import DriveType, KinodynamicConfig
from .environment import ConfigurationError, EnvConfig, FixedScenarioSet, SocialNavEnv
from .geometry import load_graph, load_map, load_scenario
from .human_sim import SocialForceParams
from .learner import LearnedPolicy, LearnerSpec
from .local_planner import PlannerParams
from .obs_reward import Rewarder, StallPenalty, default_observer, default_rewarder
from .scenarios import MiniGameKind, MiniGameScenarioSet, default_params

_DEFAULTS: dict = {
    "num_agents": [[0, 3], [35, 4], [70, 5]],
    "eval_num_agents": [3, 4, 5, 7, 10],
    "train_length": 250_000,
    "ending_eval_trials": 25,
    "eval_frequency": 0,
    "intermediate_eval_trials": -1,
    "policy_algo_sb3_contrib": False,
    "policy_algo_name": "PPO",
    "policy_name": "MlpPolicy",
    "policy_algo_kwargs": {"n_steps": 4096},
    "monitor": False,
    "experiment_names": ["doorway"],
    "run_name": "run",
    "run_type": "default",
    "device": "cpu",
    "other_velocities_obs": True,
    "agent_velocity_obs": True,
    "agent_velocity_ignore_theta": False,
    "other_velocities_ignore_theta": False,
    "other_poses_ignore_theta": False,
    "agent_pose_ignore_theta": False,
    "entropy_constant_penalty": -100_000,
    "entropy_constant_penalty_only_not_finish": True,
    # artifact extensions
    "dt": 0.1,
    "planner": {
        "num_candidates": 21,
        "horizon": 1.0,
        "w_align": 1.0,
        "w_clear": 0.5,
        "waypoint_radius": 0.5,
        "safety_margin": 0.05,
    },
    "humans": {
        "enabled": False,
        "count": 0,
        "tau": 0.5,
        "A": 2.1,
        "B": 0.3,
        "A_w": 10.0,
        "B_w": 0.2,
        "v_pref": 1.34,
    },
    "kinodynamics": {
        "drive_type": "diff_drive",
        "v_max": 2.0,
        "v_pref": 1.0,
        "a_max": 2.0,
        "omega_max": 2.0,
        "alpha_max": 4.0,
        "radius": 0.3,
        "wheelbase": 0.5,
    },
    "seed": 0,
    "metrics": {},
}

_RUN_TYPES = {"default", "AO", "EO", "CADRL", "OL"}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: copy.deepcopy(_DEFAULTS))

    def __getitem__(self, key: str):
        return self.values[key]

    @classmethod
    def from_dict(cls, doc: dict) -> "RunConfig":
        unknown = sorted(set(doc) - set(_DEFAULTS))
        if unknown:
            known = ", ".join(sorted(_DEFAULTS))
            raise ConfigurationError(
                f"unknown config key(s): {', '.join(unknown)}; known keys: {known}"
            )
        values = copy.deepcopy(_DEFAULTS)
        for key, value in doc.items():
            if isinstance(_DEFAULTS[key], dict) and isinstance(value, dict):
                sub_unknown = sorted(set(value) - set(_DEFAULTS[key]))
                if sub_unknown and key != "metrics" and key != "policy_algo_kwargs":
                    raise ConfigurationError(
                        f"unknown key(s) in {key!r}: {', '.join(sub_unknown)}"
                    )
                values[key].update(value)
            else:
                values[key] = value
        cfg = cls(values)
        cfg._validate()
        return cfg

    def _validate(self) -> None:
        v = self.values
        schedule = v["num_agents"]
        if (
            not schedule
            or any(len(pair) != 2 for pair in schedule)
            or schedule[0][0] != 0
            or [s for s, _ in schedule] != sorted({s for s, _ in schedule})
        ):
            raise ConfigurationError(
                "num_agents must be [[episode, k], ...] starting at episode 0 "
                "with strictly increasing episode indices"
            )
        if v["run_type"] not in _RUN_TYPES:
            raise ConfigurationError(
                f"run_type {v['run_type']!r} not in {sorted(_RUN_TYPES)}"
            )
        if v["policy_algo_name"] != "PPO":
            warnings.warn(
                f"policy_algo_name {v['policy_algo_name']!r} recorded; the on-board "
                "learner is the only algorithm and will be used",
                stacklevel=3,
            )
        if v["policy_name"] != "MlpPolicy":
            warnings.warn(
                f"policy_name {v['policy_name']!r} recorded; using the MLP policy",
                stacklevel=3,
            )

    @classmethod
    def from_file(cls, path: str) -> "RunConfig":
        with open(path, "r", encoding="utf-8") as f:
            try:
                doc = json.load(f)
            except json.JSONDecodeError as e:
                raise ConfigurationError(f"{path}:{e.lineno}:{e.colno}: {e.msg}") from e
        return cls.from_dict(doc)

    def to_dict(self) -> dict:
        return copy.deepcopy(self.values)

    def to_file(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(self.values, f, indent=2, sort_keys=True)
            f.write("\n")


# ---------------------------------------------------------------------------
# Builders


def build_scenario_set(config: RunConfig, base_dir: str = "."):
    """Resolve experiment_names[0]: a mini-game kind (optional ':uni'/':bi'
    suffix) or a path to a scenario file."""
    name = config["experiment_names"][0]
    kind_name, _, suffix = name.partition(":")
    try:
        kind = MiniGameKind(kind_name)
    except ValueError:
        kind = None
    if kind is not None:
        bidirectional = suffix != "uni"
        return MiniGameScenarioSet(kind, default_params(kind, bidirectional=bidirectional))

    path = name if os.path.isabs(name) else os.path.join(base_dir, name)
    if not os.path.exists(path):
        raise ConfigurationError(
            f"experiment {name!r} is neither a mini-game kind "
            f"({', '.join(k.value for k in MiniGameKind)}) nor a scenario file"
        )
    scenario_dir = os.path.dirname(path)
    scenario = load_scenario(path)
    graph = load_graph(os.path.join(scenario_dir, scenario.graph_ref))
    vmap = load_map(os.path.join(scenario_dir, scenario.map_ref))
    scenario.validate(graph)
    return FixedScenarioSet(vmap, graph, scenario, name=os.path.basename(path))


def build_observer(config: RunConfig, k_neighbors: int = 9):
    return default_observer(
        k_neighbors=k_neighbors,
        agent_pose_ignore_theta=config["agent_pose_ignore_theta"],
        agent_velocity_obs=config["agent_velocity_obs"],
        agent_velocity_ignore_theta=config["agent_velocity_ignore_theta"],
        other_poses_ignore_theta=config["other_poses_ignore_theta"],
        other_velocities_obs=config["other_velocities_obs"],
        other_velocities_ignore_theta=config["other_velocities_ignore_theta"],
    )


def build_rewarder(config: RunConfig) -> tuple[Rewarder, list]:
    """Rewarder plus the env trackers its terms need."""
    stall = config["entropy_constant_penalty"]
    only_not_finish = config["entropy_constant_penalty_only_not_finish"]
    run_type = config["run_type"]
    if run_type == "CADRL":
        rewarder = cadrl_reward_config()
        rewarder.terms.append(StallPenalty(penalty=stall, only_not_finished=only_not_finish))
        return rewarder, []
    rewarder = default_rewarder(
        stall_penalty=stall, stall_only_not_finished=only_not_finish
    )
    trackers: list = []
    if run_type in ("AO", "EO"):
        tracker = ConflictZoneTracker(
            mode=OrderMode.ANY if run_type == "AO" else OrderMode.ENFORCED
        )
        trackers.append(tracker)
        rewarder.terms.append(OrderReward(tracker))
    return rewarder, trackers


def build_kinodynamics(config: RunConfig) -> KinodynamicConfig:
    kd = config["kinodynamics"]
    return KinodynamicConfig(
        drive_type=DriveType(kd["drive_type"]),
        v_max=kd["v_max"],
        v_pref=kd["v_pref"],
        a_max=kd["a_max"],
        omega_max=kd["omega_max"],
        alpha_max=kd["alpha_max"],
        radius=kd["radius"],
        wheelbase=kd["wheelbase"],
    )


def build_planner(config: RunConfig) -> PlannerParams:
    p = config["planner"]
    return PlannerParams(
        num_candidates=p["num_candidates"],
        horizon=p["horizon"],
        w_align=p["w_align"],
        w_clear=p["w_clear"],
        waypoint_radius=p["waypoint_radius"],
        safety_margin=p["safety_margin"],
    )


def build_human_params(config: RunConfig) -> tuple[SocialForceParams, int]:
    h = config["humans"]
    params = SocialForceParams(
        tau=h["tau"],
        agent_strength=h["A"],
        agent_range=h["B"],
        wall_strength=h["A_w"],
        wall_range=h["B_w"],
        v_pref=h["v_pref"],
    )
    count = h["count"] if h["enabled"] else 0
    return params, count


def build_env(
    config: RunConfig,
    scenario_set=None,
    seed: int | None = None,
    base_dir: str = ".",
    log_enabled: bool = True,
) -> SocialNavEnv:
    if scenario_set is None:
        scenario_set = build_scenario_set(config, base_dir)
    rewarder, trackers = build_rewarder(config)
    human_params, num_humans = build_human_params(config)
    env_config = EnvConfig(
        num_agents=tuple(tuple(pair) for pair in config["num_agents"]),
        dt=config["dt"],
        seed=config["seed"] if seed is None else seed,
    )
    return SocialNavEnv(
        scenario_set,
        build_observer(config),
        rewarder,
        env_config,
        kinodynamics=build_kinodynamics(config),
        planner=build_planner(config),
        human_params=human_params,
        num_humans=num_humans,
        trackers=trackers,
        log_enabled=log_enabled,
    )


def build_learner_spec(config: RunConfig) -> LearnerSpec:
    kwargs = config["policy_algo_kwargs"]
    known = {"learning_rate", "gamma", "clip", "entropy_coef", "batch_episodes", "n_epochs"}
    picked = {k: v for k, v in kwargs.items() if k in known}
    ignored = sorted(set(kwargs) - known)
    if ignored:
        warnings.warn(
            f"policy_algo_kwargs {', '.join(ignored)} recorded but not used by "
            "the on-board learner",
            stacklevel=2,
        )
    return LearnerSpec(**picked)


def build_policy(config: RunConfig, policy_ref: str):
    """'only-local', 'OL', or a checkpoint path."""
    if policy_ref in ("only-local", "OL", "only_local"):
        return OnlyLocalPolicy()
    if config["run_type"] == "OL" and not os.path.exists(policy_ref):
        return OnlyLocalPolicy()
    return LearnedPolicy.load(policy_ref)
