#!/usr/bin/env python3
"""Train REINFORCE on continuous cart-pole with and without the revert rule.

One seed, aggressive learning rate.  Prints the per-cycle evaluation means
side by side; cycles where the guarded run reverted are marked.  Expect a
few minutes of runtime.
"""

import numpy as np

from ctrlz.experiments import ExperimentConfig, run_single

SEED = 0
BASE = dict(
    env="cartpole",
    base_lr=2e-3,  # double the nominal rate: deliberately unstable
    total_train_episodes=900,
    seeds=(SEED,),
)

guarded_cfg = ExperimentConfig(threshold=0.1, **BASE)
control_cfg = ExperimentConfig(threshold=0.1, baseline=True, **BASE)

print("training the guarded run (threshold 0.1)...")
guarded, guarded_recs = run_single(guarded_cfg, SEED, 0)
print("training the control run (reverts disabled)...")
control, control_recs = run_single(control_cfg, SEED, 0)

print("\ncycle  guarded eval  control eval")
for g, c in zip(guarded_recs, control_recs):
    mark = f"  <- reverted to {g.reverted_to}" if g.reverted_to is not None else ""
    print(f"{g.cycle:>5}  {np.mean(g.eval_returns):>12.1f}"
          f"  {np.mean(c.eval_returns):>12.1f}{mark}")

print(f"\nmean lifetime reward: guarded {guarded.mean_lifetime_reward:.1f} "
      f"({guarded.revert_count} reverts), control {control.mean_lifetime_reward:.1f}")
