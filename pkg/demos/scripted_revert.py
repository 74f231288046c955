#!/usr/bin/env python3
"""Watch the revert rule fire on a scripted performance collapse.

A fake learner/environment pair produces evaluation returns around 10
until cycle 4, then collapses to 0.  The harness stores a checkpoint after
every healthy evaluation and reverts as soon as the improvement hypothesis
is rejected.
"""

import numpy as np

from ctrlz import CheckpointStore, ScheduleConfig, ScriptedProcessSpec, run_training
from ctrlz.envs import scripted_env_and_learner

N = 5  # training episodes per cycle

spec = ScriptedProcessSpec(
    train_episodes_per_cycle=N,
    pre_mean=10.0,
    post_mean=0.0,
    noise_std=0.1,
    degradation_cycle=4,
)
env, learner = scripted_env_and_learner(spec)
store = CheckpointStore()

schedule = ScheduleConfig(
    total_train_episodes=6 * N,
    train_episodes_per_cycle=N,
    eval_episodes=10,
    threshold=0.1,
    comparator="mann_whitney",
)
records = run_training(learner, env, schedule, rng_seed=0, store=store)

print("cycle  eval mean  min rho  action")
for rec in records:
    eval_mean = float(np.mean(rec.eval_returns))
    rho = "    -" if rec.verdict is None else f"{rec.verdict.min_score:.3f}"
    if rec.reverted_to is not None:
        action = f"REVERT to checkpoint {rec.reverted_to}"
    else:
        action = f"saved checkpoint {rec.checkpoint_saved}"
    print(f"{rec.cycle:>5}  {eval_mean:>9.2f}  {rho:>7}  {action}")

print("\nstored history (reverting never deletes checkpoints):")
for ckpt in store.checkpoints:
    print(f"  id {ckpt.id}: episode {ckpt.episode_index}, "
          f"mean evaluation reward {ckpt.mean_reward:.2f}")
