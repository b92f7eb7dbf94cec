"""Command-line front end: scenario generation, geometry validation,
training, evaluation, benchmarking, log replay, and protocol serving.

All subcommands accept --config FILE and --seed N; the MINISOCIAL_LOG_DIR
environment variable sets the default episode-log root.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import episode_log, metrics
from .baselines import evaluate
from .config import (
    RunConfig,
    build_env,
    build_learner_spec,
    build_policy,
    build_scenario_set,
)
from .environment import ConfigurationError
from .geometry import (
    FormatError,
    SemanticError,
    load_graph,
    load_map,
    load_scenario,
    save_graph,
    save_map,
    save_scenario,
    validate_graph,
)
from .learner import TrainingDiverged, train
from .rng import stream
from .scenarios import MiniGameKind, MiniGameScenarioSet, default_params


def _log_dir(args) -> str | None:
    if getattr(args, "log_dir", None):
        return args.log_dir
    return os.environ.get("MINISOCIAL_LOG_DIR")


def _load_config(args) -> RunConfig:
    if getattr(args, "config", None):
        config = RunConfig.from_file(args.config)
    else:
        config = RunConfig()
    if getattr(args, "seed", None) is not None:
        config.values["seed"] = args.seed
    return config


def _write_logs(logs_by_k: dict, out_dir: str, policy_name: str) -> None:
    os.makedirs(out_dir, exist_ok=True)
    for k, logs in sorted(logs_by_k.items()):
        for trial, log in enumerate(logs):
            path = os.path.join(out_dir, f"{policy_name}_k{k}_trial{trial}.jsonl")
            episode_log.write_jsonl(log, path)


# -- subcommands -------------------------------------------------------------


def cmd_gen_scenario(args) -> int:
    config = _load_config(args)
    kind = MiniGameKind(args.kind)
    params = default_params(kind, bidirectional=not args.unidirectional)
    scenario_set = MiniGameScenarioSet(kind, params)
    k = args.k if args.k is not None else min(3, scenario_set.max_agents())
    rng = stream(config["seed"], "gen-scenario")
    vmap, graph, scenario = scenario_set.sample(k, args.humans, rng)

    os.makedirs(args.out, exist_ok=True)
    map_file = f"{kind.value}.map.json"
    graph_file = f"{kind.value}.graph.json"
    scenario_file = f"{kind.value}.scenario.json"
    scenario.map_ref = map_file
    scenario.graph_ref = graph_file
    save_map(vmap, os.path.join(args.out, map_file))
    save_graph(graph, os.path.join(args.out, graph_file))
    save_scenario(scenario, os.path.join(args.out, scenario_file))
    print(f"wrote {map_file}, {graph_file}, {scenario_file} to {args.out}")
    return 0


def _sniff_geometry(path: str) -> tuple[str, object]:
    with open(path, "r", encoding="utf-8") as f:
        doc = json.load(f)
    if "segments" in doc:
        return "map", load_map(path)
    if "nodes" in doc:
        return "graph", load_graph(path)
    if "agents" in doc:
        return "scenario", load_scenario(path)
    raise FormatError(f"{path}: not a map, graph, or scenario file")


def cmd_validate(args) -> int:
    _load_config(args)  # a broken --config should fail even here
    loaded: dict[str, list] = {"map": [], "graph": [], "scenario": []}
    for path in args.files:
        kind, obj = _sniff_geometry(path)
        loaded[kind].append((path, obj))
        print(f"{path}: well-formed {kind}")
    for gpath, graph in loaded["graph"]:
        for mpath, vmap in loaded["map"]:
            violations = validate_graph(vmap, graph)
            if violations:
                for v in violations:
                    print(
                        f"{gpath}: edge {v.edge} crosses wall {v.wall_index} of "
                        f"{mpath} at ({v.point.x:.3f}, {v.point.y:.3f})",
                        file=sys.stderr,
                    )
                return 1
            print(f"{gpath}: no edge crosses a wall of {mpath}")
        for spath, scenario in loaded["scenario"]:
            scenario.validate(graph)
            print(f"{spath}: routes valid against {gpath}")
    return 0


def cmd_train(args) -> int:
    config = _load_config(args)
    env = build_env(config, log_enabled=False)
    spec = build_learner_spec(config)
    steps = args.steps if args.steps is not None else config["train_length"]
    result = train(
        env,
        total_steps=steps,
        spec=spec,
        seed=config["seed"],
        checkpoint_path=args.out,
        checkpoint_every=args.checkpoint_every,
        config_hash=env.config_hash(),
        verbose=not args.quiet,
    )
    print(
        f"trained {result.samples} samples in {result.batches} batches; "
        f"final mean return {result.mean_returns[-1] if result.mean_returns else float('nan'):.1f}"
    )
    if args.out:
        print(f"checkpoint: {args.out}")
    return 0


def _eval_env_factory(config: RunConfig, log_enabled: bool = True):
    scenario_set = build_scenario_set(config)

    def make_env(k: int):
        env = build_env(config, scenario_set=scenario_set, log_enabled=log_enabled)
        return env

    return make_env


def cmd_eval(args) -> int:
    config = _load_config(args)
    policy = build_policy(config, args.policy)
    trials = args.trials if args.trials is not None else config["ending_eval_trials"]
    k_list = args.k if args.k else config["eval_num_agents"]
    make_env = _eval_env_factory(config)
    policy_name = args.policy_name or (
        "only_local" if args.policy in ("only-local", "OL") else os.path.basename(args.policy)
    )
    rows, logs_by_k = evaluate(policy, make_env, trials, k_list, policy_name=policy_name)
    print(metrics.to_text(rows), end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(metrics.to_csv(rows))
        print(f"metrics: {args.out}")
    out_dir = _log_dir(args)
    if out_dir:
        _write_logs(logs_by_k, out_dir, policy_name)
        print(f"episode logs: {out_dir}")
    return 0


def cmd_bench(args) -> int:
    config = _load_config(args)
    trials = args.trials if args.trials is not None else config["ending_eval_trials"]
    k_list = args.k if args.k else config["eval_num_agents"]
    rows = []
    for scenario_name in args.scenarios:
        cfg = RunConfig.from_dict(
            {**config.to_dict(), "experiment_names": [scenario_name]}
        )
        make_env = _eval_env_factory(cfg)
        for policy_ref in args.policies:
            policy = build_policy(cfg, policy_ref)
            name = (
                "only_local"
                if policy_ref in ("only-local", "OL")
                else os.path.basename(policy_ref)
            )
            policy_rows, logs_by_k = evaluate(
                policy, make_env, trials, k_list, policy_name=name
            )
            rows.extend(policy_rows)
            out_dir = _log_dir(args)
            if out_dir:
                _write_logs(logs_by_k, os.path.join(out_dir, scenario_name), name)
    print(metrics.to_text(rows), end="")
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="\n") as f:
            f.write(metrics.to_csv(rows))
        print(f"metrics: {args.out}")
    return 0


def cmd_replay(args) -> int:
    _load_config(args)
    log = episode_log.read_jsonl(args.log)
    frames = []
    for step in log.steps:
        frame = {
            "t": step["t"],
            "agents": [
                {
                    "id": rec["id"],
                    "x": rec["x"],
                    "y": rec["y"],
                    "psi": rec["psi"],
                    "v": rec["v"],
                    "coll": bool(rec["coll"]),
                    "succ": rec["succ"],
                }
                for rec in step["agents"]
            ],
        }
        if "humans" in step:
            frame["humans"] = step["humans"]
        frames.append(frame)
    doc = {
        "format_version": 1,
        "header": log.header,
        "reason": log.footer["reason"],
        "frames": frames,
    }
    text = json.dumps(doc, indent=1)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as f:
            f.write(text + "\n")
        print(f"wrote {len(frames)} frames to {args.out}")
    else:
        print(text)
    return 0


def cmd_serve(args) -> int:
    from .protocol import serve_stream, serve_tcp

    config = _load_config(args)
    env = build_env(config)
    episodes = args.episodes
    if args.stdio:
        logs = serve_stream(env, sys.stdin, sys.stdout, episodes, k=args.k)
    else:
        print(f"listening on {args.host}:{args.port}", file=sys.stderr)
        logs = serve_tcp(env, args.host, args.port, episodes, k=args.k)
    out_dir = _log_dir(args)
    if out_dir:
        os.makedirs(out_dir, exist_ok=True)
        for i, log in enumerate(logs):
            episode_log.write_jsonl(log, os.path.join(out_dir, f"served_ep{i}.jsonl"))
    print(f"served {len(logs)} episodes", file=sys.stderr)
    return 0


# -- parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minisocial",
        description="Multi-agent social navigation simulator and benchmark harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-scenario", help="generate mini-game geometry files")
    p.add_argument("--config", default=None, help="run config (supplies the default seed)")
    p.add_argument("--kind", required=True, choices=[k.value for k in MiniGameKind])
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--k", type=int, default=None, help="agent routes to sample")
    p.add_argument("--humans", type=int, default=0, help="human routes to sample")
    p.add_argument("--unidirectional", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.set_defaults(func=cmd_gen_scenario)

    p = sub.add_parser("validate", help="check geometry files")
    p.add_argument("--config", default=None, help="accepted and checked, not otherwise used")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("files", nargs="+")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("train", help="train the on-board learner")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--steps", type=int, default=None, help="override train_length")
    p.add_argument("--out", default=None, help="checkpoint path")
    p.add_argument("--checkpoint-every", type=int, default=0, help="batches between checkpoints")
    p.add_argument("--quiet", action="store_true")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a policy")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--policy", default="only-local", help="checkpoint path or 'only-local'")
    p.add_argument("--policy-name", default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--k", type=int, action="append", default=None)
    p.add_argument("--out", default=None, help="metrics CSV path")
    p.add_argument("--log-dir", default=None)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bench", help="policy x scenario grid benchmark")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--policies", nargs="+", required=True)
    p.add_argument("--scenarios", nargs="+", required=True)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--k", type=int, action="append", default=None)
    p.add_argument("--out", default=None, help="metrics CSV path")
    p.add_argument("--log-dir", default=None)
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("replay", help="episode log -> frame dump for the UI")
    p.add_argument("--config", default=None, help="accepted and checked, not otherwise used")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--log", required=True)
    p.add_argument("--out", default=None)
    p.set_defaults(func=cmd_replay)

    p = sub.add_parser("serve", help="serve an environment over the wire protocol")
    p.add_argument("--config", default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--episodes", type=int, default=1)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=7454)
    p.add_argument("--stdio", action="store_true")
    p.add_argument("--log-dir", default=None)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, FormatError, SemanticError, FileNotFoundError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except TrainingDiverged as e:
        print(f"training diverged: {e}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
