import json

import pytest

from minisocial.cli import main
from minisocial.config import RunConfig, build_env, build_rewarder
from minisocial.environment import ConfigurationError


def run_cli(*argv):
    return main(list(argv))


# The full stock training-config key surface, accepted verbatim.
STOCK_CONFIG = {
    "num_agents": [[0, 3], [35, 4], [70, 5]],
    "eval_num_agents": [3, 4, 5, 7, 10],
    "train_length": 250000,
    "ending_eval_trials": 25,
    "eval_frequency": 0,
    "intermediate_eval_trials": -1,
    "policy_algo_sb3_contrib": False,
    "policy_algo_name": "PPO",
    "policy_name": "MlpPolicy",
    "policy_algo_kwargs": {"n_steps": 4096},
    "monitor": False,
    "experiment_names": ["doorway"],
    "run_name": "door/ao",
    "run_type": "AO",
    "device": "cuda:0",
    "other_velocities_obs": True,
    "agent_velocity_obs": True,
    "agent_velocity_ignore_theta": False,
    "other_velocities_ignore_theta": False,
    "other_poses_ignore_theta": False,
    "agent_pose_ignore_theta": False,
    "entropy_constant_penalty": -100000,
    "entropy_constant_penalty_only_not_finish": True,
}


class TestRunConfig:
    def test_stock_training_keys_accepted(self):
        cfg = RunConfig.from_dict(STOCK_CONFIG)
        assert cfg["run_type"] == "AO"
        assert cfg["num_agents"] == [[0, 3], [35, 4], [70, 5]]
        assert cfg["entropy_constant_penalty"] == -100000

    def test_unknown_key_rejected_with_name(self):
        with pytest.raises(ConfigurationError, match="definitely_not_a_key"):
            RunConfig.from_dict({"definitely_not_a_key": 1})

    def test_unknown_subkey_rejected(self):
        with pytest.raises(ConfigurationError, match="planner"):
            RunConfig.from_dict({"planner": {"bogus": 3}})

    def test_round_trip_identity(self, tmp_path):
        cfg = RunConfig.from_dict(STOCK_CONFIG)
        path = tmp_path / "cfg.json"
        cfg.to_file(str(path))
        again = RunConfig.from_file(str(path))
        assert again.to_dict() == cfg.to_dict()
        path2 = tmp_path / "cfg2.json"
        again.to_file(str(path2))
        assert path.read_bytes() == path2.read_bytes()

    def test_bad_schedule_rejected(self):
        with pytest.raises(ConfigurationError, match="num_agents"):
            RunConfig.from_dict({"num_agents": [[5, 3]]})

    def test_unrecognized_algo_warns_not_fails(self):
        with pytest.warns(UserWarning, match="recorded"):
            cfg = RunConfig.from_dict({"policy_algo_name": "SAC"})
        assert cfg["policy_algo_name"] == "SAC"

    def test_run_type_presets(self):
        ao, trackers = build_rewarder(RunConfig.from_dict({"run_type": "AO"}))
        assert len(trackers) == 1
        assert any(t.name == "subgoal" for t in ao.terms)
        cadrl, trackers = build_rewarder(RunConfig.from_dict({"run_type": "CADRL"}))
        assert trackers == []
        assert any(t.name == "proximity" for t in cadrl.terms)

    def test_build_env_from_config(self):
        cfg = RunConfig.from_dict({"experiment_names": ["open"], "seed": 4})
        env = build_env(cfg, log_enabled=False)
        obs = env.reset(episode_index=0, k=2)
        assert len(obs) == 2

    def test_scenario_file_reference(self, tmp_path):
        assert run_cli("gen-scenario", "--kind", "hallway", "--out", str(tmp_path)) == 0
        cfg = RunConfig.from_dict(
            {"experiment_names": [str(tmp_path / "hallway.scenario.json")]}
        )
        env = build_env(cfg, log_enabled=False)
        obs = env.reset(episode_index=0, k=2)
        assert len(obs) == 2


class TestCliCommands:
    def test_gen_and_validate_all_kinds(self, tmp_path, capsys):
        for kind in ("open", "doorway", "hallway", "intersection", "roundabout"):
            out = tmp_path / kind
            assert run_cli("gen-scenario", "--kind", kind, "--out", str(out), "--k", "2") == 0
            code = run_cli(
                "validate",
                str(out / f"{kind}.map.json"),
                str(out / f"{kind}.graph.json"),
                str(out / f"{kind}.scenario.json"),
            )
            assert code == 0

    def test_validate_semantic_error_exits_nonzero(self, tmp_path):
        bad = tmp_path / "bad.graph.json"
        bad.write_text(
            json.dumps(
                {
                    "format_version": 1,
                    "map": "m",
                    "nodes": [{"id": 0, "p": [0, 0]}],
                    "edges": [[0, 9]],
                }
            )
        )
        assert run_cli("validate", str(bad)) == 1

    def test_eval_writes_csv_and_logs(self, tmp_path, capsys):
        csv_path = tmp_path / "metrics.csv"
        log_dir = tmp_path / "logs"
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"experiment_names": ["open"]}))
        code = run_cli(
            "eval", "--config", str(cfg_path), "--policy", "only-local",
            "--trials", "2", "--k", "2", "--seed", "11",
            "--out", str(csv_path), "--log-dir", str(log_dir),
        )
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert lines[0].startswith("scenario,")
        assert len(lines) == 2
        assert len(list(log_dir.glob("*.jsonl"))) == 2

    def test_eval_deterministic_across_runs(self, tmp_path):
        outs = []
        for name in ("a", "b"):
            csv_path = tmp_path / f"{name}.csv"
            log_dir = tmp_path / name
            cfg_path = tmp_path / "cfg.json"
            cfg_path.write_text(json.dumps({"experiment_names": ["open"]}))
            run_cli(
                "eval", "--config", str(cfg_path), "--trials", "2", "--k", "2",
                "--seed", "11", "--out", str(csv_path), "--log-dir", str(log_dir),
            )
            logs = sorted(log_dir.glob("*.jsonl"))
            outs.append((csv_path.read_bytes(), [p.read_bytes() for p in logs]))
        assert outs[0] == outs[1]

    def test_bench_grid_rows(self, tmp_path):
        csv_path = tmp_path / "bench.csv"
        code = run_cli(
            "bench", "--policies", "only-local", "--scenarios", "open", "doorway",
            "--trials", "1", "--k", "2", "--k", "3", "--seed", "5",
            "--out", str(csv_path),
        )
        assert code == 0
        lines = csv_path.read_text().splitlines()
        assert len(lines) == 1 + 1 * 2 * 2  # header + policies x scenarios x k

    def test_replay_frame_dump(self, tmp_path):
        log_dir = tmp_path / "logs"
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"experiment_names": ["open"]}))
        run_cli(
            "eval", "--config", str(cfg_path), "--trials", "1", "--k", "2",
            "--seed", "3", "--log-dir", str(log_dir),
        )
        (log_path,) = log_dir.glob("*.jsonl")
        out_path = tmp_path / "frames.json"
        assert run_cli("replay", "--log", str(log_path), "--out", str(out_path)) == 0
        doc = json.loads(out_path.read_text())
        assert doc["format_version"] == 1
        assert doc["frames"][0]["t"] == 0
        assert {"id", "x", "y", "psi", "v", "coll", "succ"} <= set(doc["frames"][0]["agents"][0])

    def test_bad_config_file_exits_nonzero(self, tmp_path):
        cfg_path = tmp_path / "bad.json"
        cfg_path.write_text('{"nope": 1}')
        assert run_cli("eval", "--config", str(cfg_path)) == 1

    def test_env_var_log_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("MINISOCIAL_LOG_DIR", str(tmp_path / "envlogs"))
        cfg_path = tmp_path / "cfg.json"
        cfg_path.write_text(json.dumps({"experiment_names": ["open"]}))
        run_cli("eval", "--config", str(cfg_path), "--trials", "1", "--k", "2", "--seed", "2")
        assert len(list((tmp_path / "envlogs").glob("*.jsonl"))) == 1
