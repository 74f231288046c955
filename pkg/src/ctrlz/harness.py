"""The train / evaluate / judge / revert loop.

Each cycle trains the learner for N episodes, freezes it, evaluates for M
episodes, and asks the checkpoint store whether the improvement hypothesis
survives.  On rejection the learner's parameters are restored from the
checkpoint with the widest comparison margin; otherwise the current policy
joins the history.

RNG discipline: the run seed is split into named substreams (training
episode starts, evaluation episode starts) so that enabling or disabling
the revert machinery cannot desynchronize unrelated randomness.  Judging
and reverting consume no random draws.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from .checkpoints import CheckpointStore, ComparisonVerdict, ParameterVector
from .learner import Trajectory
from .stats import COMPARATORS

__all__ = [
    "Learner",
    "Environment",
    "ScheduleConfig",
    "CycleRecord",
    "run_training",
    "run_baseline",
    "run_episode",
]


class Learner(Protocol):
    def act(self, observation) -> np.ndarray: ...
    def train_on_episode(self, trajectory: Trajectory) -> None: ...
    def get_parameters(self) -> ParameterVector: ...
    def set_parameters(self, params: ParameterVector) -> None: ...
    def ingest_offline(self, trajectory: Trajectory) -> None: ...


class Environment(Protocol):
    max_episode_steps: int

    def reset(self, rng: np.random.Generator) -> np.ndarray: ...
    def step(self, action) -> tuple[np.ndarray, float, bool]: ...


@dataclass
class ScheduleConfig:
    """Evaluation schedule and revert rule for one run."""

    total_train_episodes: int
    train_episodes_per_cycle: int = 30
    eval_episodes: int = 20
    threshold: float = 0.1
    comparator: str = "mann_whitney"
    eval_with_noise: bool = True
    revert_optimizer_state: bool = False
    checkpoint_capacity: Optional[int] = None

    def __post_init__(self):
        if self.train_episodes_per_cycle < 1:
            raise ValueError("train_episodes_per_cycle must be >= 1")
        if self.eval_episodes < 1:
            raise ValueError("eval_episodes must be >= 1")
        if not (0.0 <= self.threshold <= 1.0):
            raise ValueError("threshold must be in [0, 1]")
        if self.comparator not in COMPARATORS:
            raise ValueError(
                f"unknown comparator {self.comparator!r}; choose from {sorted(COMPARATORS)}"
            )
        if self.total_train_episodes < self.train_episodes_per_cycle:
            raise ValueError("total_train_episodes must cover at least one cycle")

    @property
    def n_cycles(self) -> int:
        return self.total_train_episodes // self.train_episodes_per_cycle


@dataclass
class CycleRecord:
    """Structured log of one train/evaluate/judge alternation."""

    cycle: int  # 1-indexed
    train_returns: list[float]
    eval_returns: list[float]
    verdict: Optional[ComparisonVerdict]
    reverted_to: Optional[int]
    checkpoint_saved: Optional[int]

    def to_dict(self) -> dict:
        verdict = None
        if self.verdict is not None:
            verdict = {
                "scores": [[cid, s] for cid, s in self.verdict.scores],
                "min_score": self.verdict.min_score,
                "target_id": self.verdict.target_id,
                "revert": self.verdict.revert,
            }
        return {
            "cycle": self.cycle,
            "train_returns": self.train_returns,
            "eval_returns": self.eval_returns,
            "verdict": verdict,
            "reverted_to": self.reverted_to,
            "checkpoint_saved": self.checkpoint_saved,
        }


def run_episode(learner, env, rng: np.random.Generator, *, greedy: bool = False) -> Trajectory:
    """Roll out one episode and package it as a trajectory."""
    observations, actions, rewards = [], [], []
    obs = env.reset(rng)
    done = False
    act = learner.act_mean if greedy else learner.act
    while not done:
        action = act(obs)
        observations.append(obs)
        actions.append(np.atleast_1d(action))
        obs, reward, done = env.step(action)
        rewards.append(reward)
    return Trajectory(
        observations=np.asarray(observations),
        actions=np.asarray(actions),
        rewards=np.asarray(rewards),
    )


def _run(learner, env, schedule: ScheduleConfig, rng_seed: int,
         *, revert_enabled: bool, store: Optional[CheckpointStore] = None) -> list[CycleRecord]:
    comparator = COMPARATORS[schedule.comparator]
    if store is None:
        store = CheckpointStore(capacity=schedule.checkpoint_capacity)
    train_ss, eval_ss = np.random.SeedSequence(rng_seed).spawn(2)
    train_rng = np.random.default_rng(train_ss)
    eval_rng = np.random.default_rng(eval_ss)
    greedy_eval = not schedule.eval_with_noise

    records: list[CycleRecord] = []
    episodes_trained = 0
    for cycle in range(1, schedule.n_cycles + 1):
        try:
            train_returns = []
            for _ in range(schedule.train_episodes_per_cycle):
                traj = run_episode(learner, env, train_rng)
                learner.train_on_episode(traj)
                train_returns.append(traj.episode_return)
                episodes_trained += 1

            frozen = learner.get_parameters()
            eval_trajs = [
                run_episode(learner, env, eval_rng, greedy=greedy_eval)
                for _ in range(schedule.eval_episodes)
            ]
            eval_returns = [t.episode_return for t in eval_trajs]
            for traj in eval_trajs:
                learner.ingest_offline(traj)
        except Exception as exc:
            raise RuntimeError(f"run aborted during cycle {cycle}: {exc}") from exc

        verdict: Optional[ComparisonVerdict] = None
        reverted_to: Optional[int] = None
        checkpoint_saved: Optional[int] = None
        if len(store) > 0:
            verdict = store.judge(eval_returns, comparator, schedule.threshold)
            if not revert_enabled and verdict.revert:
                # Control arm: keep the diagnostic scores but never act on them.
                verdict = ComparisonVerdict(
                    scores=verdict.scores, min_score=verdict.min_score,
                    target_id=None, revert=False,
                )
        if verdict is not None and verdict.revert:
            restored = store.restore(verdict.target_id)
            if not schedule.revert_optimizer_state:
                restored = restored.without_optimizer_state()
            learner.set_parameters(restored)
            reverted_to = verdict.target_id
        else:
            checkpoint_saved = store.store(frozen, eval_returns, episodes_trained)

        records.append(CycleRecord(
            cycle=cycle,
            train_returns=train_returns,
            eval_returns=eval_returns,
            verdict=verdict,
            reverted_to=reverted_to,
            checkpoint_saved=checkpoint_saved,
        ))
    return records


def run_training(learner, env, schedule: ScheduleConfig, rng_seed: int,
                 store: Optional[CheckpointStore] = None) -> list[CycleRecord]:
    """Run the full loop with the revert rule active."""
    return _run(learner, env, schedule, rng_seed, revert_enabled=True, store=store)


def run_baseline(learner, env, schedule: ScheduleConfig, rng_seed: int,
                 store: Optional[CheckpointStore] = None) -> list[CycleRecord]:
    """Control arm: identical loop, scores still logged, but reverts are never applied.

    With threshold 0 this produces cycle records identical to run_training,
    which is the non-invasiveness check for the revert machinery.
    """
    return _run(learner, env, schedule, rng_seed, revert_enabled=False, store=store)
