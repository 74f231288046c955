"""Checkpoint-and-revert stabilization for online learning.

Periodically evaluates a learning agent, tests the hypothesis that it is
still improving against a history of checkpoints, and reverts to the best
previous checkpoint when the hypothesis is rejected.
"""

from .checkpoints import (
    Checkpoint,
    CheckpointStore,
    ComparisonVerdict,
    ParameterVector,
    read_checkpoint,
    write_checkpoint,
)
from .envs import ContinuousCartPole, ScriptedProcessSpec, scripted_env_and_learner
from .harness import CycleRecord, ScheduleConfig, run_baseline, run_episode, run_training
from .learner import PolicyNetwork, ReinforceLearner, Trajectory, discounted_returns
from .stats import (
    COMPARATORS,
    GaussianSummary,
    empirical_superiority,
    gaussian_fit,
    gaussian_superiority,
    mean_superiority,
    rho_statistic,
)

__version__ = "0.1.0"
