#!/usr/bin/env python3
"""Tour of the improvement comparators on hand-built reward distributions.

Shows how the pairwise (Mann-Whitney rho), Gaussian closed-form, and
mean-comparison scores react to separation, overlap, ties, and outliers.
"""

import numpy as np

from ctrlz import (
    empirical_superiority,
    gaussian_fit,
    gaussian_superiority,
    mean_superiority,
    rho_statistic,
)


def show(label, current, previous):
    print(f"\n{label}")
    print(f"  current  = {list(current)}")
    print(f"  previous = {list(previous)}")
    print(f"  pairwise rho        = {rho_statistic(current, previous):.4f}")
    print(f"  empirical integral  = {empirical_superiority(current, previous):.4f}")
    print(f"  gaussian closed form= {gaussian_superiority(current, previous):.4f}")
    print(f"  mean comparison     = {mean_superiority(current, previous):.4f}")


show("Complete separation: every current sample beats every previous one",
     [3, 4, 5], [0, 1, 2])

show("Heavy overlap: only one of four pairs favors the current policy",
     [2, 0], [1, 3])

show("All ties: the strict indicator gives zero credit",
     [1, 1, 1], [1, 1, 1])

rng = np.random.default_rng(0)
current = rng.normal(5.0, 1.0, size=20)
previous = rng.normal(4.0, 1.0, size=20)
show("Gaussian-ish samples, one-sigma improvement",
     np.round(current, 2).tolist(), np.round(previous, 2).tolist())

# An outlier wrecks the mean comparison but barely moves the rank-based score.
previous_with_outlier = np.append(previous, 1000.0)
show("Same data plus one absurd previous-policy outlier",
     np.round(current, 2).tolist(), np.round(previous_with_outlier, 2).tolist())

print("\nGaussian fits used by the closed form:")
for name, data in [("current", current), ("previous", previous)]:
    fit = gaussian_fit(data)
    print(f"  {name}: mean {fit.mean:.3f}, std {fit.std_dev:.3f}")
