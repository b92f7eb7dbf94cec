# Drive the environment from an external controller over the wire
# protocol, and show that the produced episode log is byte-identical to
# running the same policy in process.

import socket
import threading

from minisocial import episode_log
from minisocial.baselines import OnlyLocalPolicy, run_episode
from minisocial.environment import EnvConfig, SocialNavEnv
from minisocial.obs_reward import default_observer, default_rewarder
from minisocial.protocol import only_local_controller, serve_stream
from minisocial.scenarios import MiniGameKind, MiniGameScenarioSet


def make_env():
    return SocialNavEnv(
        MiniGameScenarioSet(MiniGameKind.HALLWAY),
        default_observer(), default_rewarder(),
        EnvConfig(num_agents=((0, 2),), seed=42),
    )


in_process = run_episode(make_env(), OnlyLocalPolicy(), episode_index=0)
print(f"in-process episode: {in_process.length} steps, "
      f"reason {in_process.footer['reason']}")

env = make_env()
sock_a, sock_b = socket.socketpair()
server = (sock_a.makefile("r", encoding="utf-8", newline="\n"),
          sock_a.makefile("w", encoding="utf-8", newline="\n"))
client = (sock_b.makefile("r", encoding="utf-8", newline="\n"),
          sock_b.makefile("w", encoding="utf-8", newline="\n"))
served = {}


def serve():
    try:
        served["logs"] = serve_stream(env, server[0], server[1], episodes=1)
    finally:
        try:
            sock_a.shutdown(socket.SHUT_RDWR)
        except OSError:
            pass
        sock_a.close()


thread = threading.Thread(target=serve)
thread.start()
episodes = only_local_controller(client[0], client[1])
thread.join()
print(f"wire-driven episodes: {episodes}")

same = episode_log.dumps(served["logs"][0]) == episode_log.dumps(in_process)
print(f"byte-identical logs: {same}")
