# Train the on-board learner on the 2-agent doorway with the Any Order
# sub-goal reward, then pit it against Only Local on the same seeded eval
# set. ~200k samples take a couple of minutes on a laptop; pass a smaller
# number as argv[1] for a quick look.

import sys

from minisocial.baselines import OnlyLocalPolicy, evaluate
from minisocial.config import RunConfig, build_env
from minisocial.learner import LearnerSpec, train
from minisocial.metrics import to_text

steps = int(sys.argv[1]) if len(sys.argv) > 1 else 200_000

cfg = RunConfig.from_dict(
    {"experiment_names": ["doorway"], "run_type": "AO", "seed": 0}
)
env = build_env(cfg, log_enabled=False)
print(f"training for {steps} samples on the bidirectional doorway, k=2 ...")
result = train(env, total_steps=steps, spec=LearnerSpec(), seed=0, verbose=True)
print(f"{result.batches} batches, final mean return {result.mean_returns[-1]:.0f}")


def make_eval_env(k):
    return build_env(cfg, seed=1000)


rows = []
for name, policy in (("only_local", OnlyLocalPolicy()), ("trained", result.policy)):
    policy_rows, _ = evaluate(policy, make_eval_env, trials=25, k_list=[2], policy_name=name)
    rows.extend(policy_rows)
print(to_text(rows))
