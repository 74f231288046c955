#!/usr/bin/env python3
"""Miniature threshold-sensitivity sweep (8 seeds; scale up for smooth curves).

The full study lives in the acceptance suite (50 seeds per threshold); this
script shows the same shape in a couple of minutes: a band of moderate
thresholds outperforms both never reverting (0) and hair-trigger reverting
(0.5).
"""

from ctrlz.experiments import ExperimentConfig, run_sweep, write_sweep_csv

config = ExperimentConfig(
    env="cartpole",
    base_lr=2e-3,
    total_train_episodes=900,
    seeds=tuple(range(8)),
)
thresholds = [0.0, 0.05, 0.1, 0.2, 0.3, 0.5]

result = run_sweep(config, thresholds)

print("threshold  mean lifetime reward  std dev  reverts/run")
for row in result["rows"]:
    print(f"{row['threshold']:>9g}  {row['mean_reward']:>20.2f}"
          f"  {row['std_dev']:>7.2f}  {row['revert_rate']:>11.2f}")

write_sweep_csv("sweep_small.csv", result["rows"])
print("\nwrote sweep_small.csv")
