"""Lock-step external-policy wire protocol: newline-delimited JSON messages
over a local socket or stdio pipe.

Message flow per connection: hello/hello handshake (format version +
observation layout), then per episode a reset notice followed by strict
obs -> act -> step_result rounds until episode_end. Server messages carry a
strictly increasing seq; each act must echo the seq of the obs it answers.
A controller driving the same policy over the wire yields byte-identical
episode logs to an in-process run.
"""

from __future__ import annotations

import json
import socket

from .episode_log import EpisodeLog
from .local_planner import Action

PROTOCOL_VERSION = 1


class ProtocolError(RuntimeError):
    pass


def _send(wfile, payload: dict) -> None:
    wfile.write(json.dumps(payload, separators=(",", ":")) + "\n")
    wfile.flush()


def _recv(rfile) -> dict | None:
    try:
        line = rfile.readline()
    except OSError:
        return None  # dropped connection reads as EOF
    if not line:
        return None
    try:
        msg = json.loads(line)
    except json.JSONDecodeError as e:
        raise ProtocolError(f"malformed message: {e.msg}") from e
    if not isinstance(msg, dict) or "type" not in msg:
        raise ProtocolError("message must be an object with a 'type'")
    return msg


def _obs_payload(frames) -> dict:
    return {
        str(i): {
            "vector": frame.vector.tolist(),
            "named": {k: v.tolist() for k, v in frame.named.items()},
        }
        for i, frame in sorted(frames.items())
    }


class ProtocolSession:
    """Serves one controller connection over (rfile, wfile) text streams."""

    def __init__(self, env, rfile, wfile):
        self.env = env
        self.rfile = rfile
        self.wfile = wfile
        self.seq = 0

    def _emit(self, type_: str, **payload) -> None:
        self.seq += 1
        try:
            _send(self.wfile, {"type": type_, "seq": self.seq, **payload})
        except OSError as e:
            self.env.abort("connection_lost")
            raise ProtocolError("connection lost while sending") from e

    def _fail(self, message: str) -> None:
        self._emit("error", message=message)
        raise ProtocolError(message)

    def handshake(self) -> None:
        self._emit(
            "hello",
            format_version=PROTOCOL_VERSION,
            layout=[[name, width] for name, width in self.env.observer.layout()],
        )
        msg = _recv(self.rfile)
        if msg is None:
            raise ProtocolError("controller closed before handshake")
        if msg.get("type") != "hello":
            self._fail(f"expected hello, got {msg.get('type')!r}")
        if msg.get("format_version") != PROTOCOL_VERSION:
            self._fail(
                f"format_version mismatch: server {PROTOCOL_VERSION}, "
                f"controller {msg.get('format_version')!r}"
            )

    def run_episode(self, episode_index: int | None = None, k: int | None = None) -> EpisodeLog:
        env = self.env
        obs = env.reset(episode_index=episode_index, k=k)
        self._emit("reset", episode=env.episode_index, k=env.k)
        while True:
            self._emit("obs", t=env.t, agents=_obs_payload(obs))
            obs_seq = self.seq
            msg = _recv(self.rfile)
            if msg is None:
                env.abort("connection_lost")
                raise ProtocolError("controller disconnected mid-episode")
            if msg.get("type") != "act":
                self._fail(f"expected act, got {msg.get('type')!r}")
            if msg.get("seq") != obs_seq:
                self._fail(f"act.seq {msg.get('seq')!r} does not echo obs.seq {obs_seq}")
            try:
                actions = {
                    int(i): Action(a) for i, a in msg.get("actions", {}).items()
                }
            except (ValueError, TypeError):
                self._fail(f"malformed actions: {msg.get('actions')!r}")
            result = env.step(actions)
            self._emit(
                "step_result",
                t=env.t - 1,
                agents={
                    str(i): {
                        "reward": result.rewards[i].total,
                        "terminated": result.terminated[i],
                        "info": result.infos[i],
                    }
                    for i in sorted(result.rewards)
                },
                done=result.done,
            )
            obs = {
                i: frame
                for i, frame in result.observations.items()
                if not result.terminated[i]
            }
            if result.done:
                log = env.take_episode_log()
                self._emit("episode_end", reason=result.reason, length=log.length)
                return log

    def run(self, episodes: int, k: int | None = None) -> list[EpisodeLog]:
        self.handshake()
        return [self.run_episode(episode_index=e, k=k) for e in range(episodes)]


def serve_stream(env, rfile, wfile, episodes: int, k: int | None = None) -> list[EpisodeLog]:
    return ProtocolSession(env, rfile, wfile).run(episodes, k=k)


def serve_tcp(env, host: str, port: int, episodes: int, k: int | None = None) -> list[EpisodeLog]:
    """Bind, accept one controller connection, run, close."""
    with socket.create_server((host, port)) as server:
        conn, _addr = server.accept()
        with conn:
            rfile = conn.makefile("r", encoding="utf-8", newline="\n")
            wfile = conn.makefile("w", encoding="utf-8", newline="\n")
            try:
                return serve_stream(env, rfile, wfile, episodes, k=k)
            finally:
                wfile.close()
                rfile.close()


# ---------------------------------------------------------------------------
# Controller side (reference implementation, also used by tests)


def run_controller(rfile, wfile, act_fn) -> int:
    """Drive a served environment: act_fn(obs_msg) -> {agent_id: Action}.

    Returns the number of completed episodes.
    """
    hello = _recv(rfile)
    if hello is None or hello.get("type") != "hello":
        raise ProtocolError("no hello from server")
    _send(wfile, {"type": "hello", "format_version": PROTOCOL_VERSION})
    episodes = 0
    while True:
        msg = _recv(rfile)
        if msg is None:
            return episodes
        kind = msg.get("type")
        if kind == "reset":
            continue
        if kind == "obs":
            actions = act_fn(msg)
            _send(
                wfile,
                {
                    "type": "act",
                    "seq": msg["seq"],
                    "actions": {str(i): a.value for i, a in actions.items()},
                },
            )
        elif kind == "step_result":
            continue
        elif kind == "episode_end":
            episodes += 1
        elif kind == "error":
            raise ProtocolError(f"server error: {msg.get('message')}")
        else:
            raise ProtocolError(f"unexpected message type {kind!r}")


def only_local_controller(rfile, wfile) -> int:
    """External Only Local: GO for every agent in every obs."""
    return run_controller(
        rfile, wfile, lambda msg: {int(i): Action.GO for i in msg["agents"]}
    )


def connect_tcp(host: str, port: int):
    sock = socket.create_connection((host, port))
    rfile = sock.makefile("r", encoding="utf-8", newline="\n")
    wfile = sock.makefile("w", encoding="utf-8", newline="\n")
    return sock, rfile, wfile
