"""Built-in episodic environments.

ContinuousCartPole is the desk-scale test bed: classic cart-pole dynamics
with a continuous force input.  The scripted process is a synthetic
learner/environment pair whose evaluation returns follow a programmed
schedule, so revert timing and target selection can be asserted exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .checkpoints import ParameterVector
from .learner import Trajectory

__all__ = [
    "ContinuousCartPole",
    "ScriptedProcessSpec",
    "ScriptedLearner",
    "ScriptedEnvironment",
    "scripted_env_and_learner",
    "make_environment",
]


class ContinuousCartPole:
    """Cart-pole with a continuous action in [-1, 1] mapped linearly to force.

    Semi-implicit Euler integration; +1 reward per step; terminates when the
    cart leaves +/-2.4 m, the pole tips past 12 degrees, or the step cap is
    reached.
    """

    def __init__(self, *, gravity: float = 9.8, cart_mass: float = 1.0,
                 pole_mass: float = 0.1, half_length: float = 0.5,
                 force_mag: float = 10.0, dt: float = 0.02,
                 x_threshold: float = 2.4,
                 theta_threshold: float = 12.0 * math.pi / 180.0,
                 max_episode_steps: int = 200):
        self.gravity = gravity
        self.cart_mass = cart_mass
        self.pole_mass = pole_mass
        self.half_length = half_length
        self.force_mag = force_mag
        self.dt = dt
        self.x_threshold = x_threshold
        self.theta_threshold = theta_threshold
        self.max_episode_steps = max_episode_steps
        self.observation_dim = 4
        self.action_dim = 1
        self._state: Optional[np.ndarray] = None
        self._steps = 0
        self._done = True

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._state = rng.uniform(-0.05, 0.05, size=4)
        self._steps = 0
        self._done = False
        return self._state.copy()

    def step(self, action):
        if self._done or self._state is None:
            raise RuntimeError("step() called on a finished episode; call reset() first")
        a = float(np.clip(np.asarray(action, dtype=np.float64).ravel()[0], -1.0, 1.0))
        force = self.force_mag * a

        x, x_dot, theta, theta_dot = self._state
        total_mass = self.cart_mass + self.pole_mass
        pole_mass_length = self.pole_mass * self.half_length
        cos_t = math.cos(theta)
        sin_t = math.sin(theta)

        temp = (force + pole_mass_length * theta_dot ** 2 * sin_t) / total_mass
        theta_acc = (self.gravity * sin_t - cos_t * temp) / (
            self.half_length * (4.0 / 3.0 - self.pole_mass * cos_t ** 2 / total_mass)
        )
        x_acc = temp - pole_mass_length * theta_acc * cos_t / total_mass

        # Semi-implicit: velocities first, then positions with the new velocities.
        x_dot = x_dot + self.dt * x_acc
        theta_dot = theta_dot + self.dt * theta_acc
        x = x + self.dt * x_dot
        theta = theta + self.dt * theta_dot

        self._state = np.array([x, x_dot, theta, theta_dot])
        self._steps += 1
        failed = abs(x) > self.x_threshold or abs(theta) > self.theta_threshold
        self._done = failed or self._steps >= self.max_episode_steps
        return self._state.copy(), 1.0, self._done


@dataclass
class ScriptedProcessSpec:
    """Piecewise schedule of evaluation-return statistics per cycle.

    `mean_for(cycle)` is `pre_mean` before `degradation_cycle` and
    `post_mean` from that cycle on; an explicit `schedule` dict overrides
    individual cycles.  Cycles are 1-indexed (cycle c is the c-th completed
    train/eval alternation).
    """

    train_episodes_per_cycle: int
    pre_mean: float = 10.0
    post_mean: float = 0.0
    noise_std: float = 0.1
    degradation_cycle: int = 4
    schedule: dict = field(default_factory=dict)

    def stats_for(self, cycle: int) -> tuple[float, float]:
        if cycle < 1:
            raise ValueError(f"scripted schedule undefined for cycle {cycle}")
        if cycle in self.schedule:
            return self.schedule[cycle]
        mean = self.pre_mean if cycle < self.degradation_cycle else self.post_mean
        return mean, self.noise_std


class ScriptedLearner:
    """Fake learner whose single parameter counts completed training episodes.

    Reverting the counter reverts the scripted performance, so a run's
    revert behavior is fully determined by the schedule.
    """

    def __init__(self, spec: ScriptedProcessSpec):
        self.spec = spec
        self.trained_episodes = 0.0

    def act(self, observation) -> np.ndarray:
        return np.zeros(1)

    def train_on_episode(self, trajectory: Trajectory) -> None:
        self.trained_episodes += 1.0

    def ingest_offline(self, trajectory: Trajectory) -> None:
        pass

    def get_parameters(self) -> ParameterVector:
        return ParameterVector(values=np.array([self.trained_episodes]))

    def set_parameters(self, params: ParameterVector) -> None:
        if params.values.size != 1:
            raise ValueError("scripted learner expects a single-element parameter vector")
        self.trained_episodes = float(params.values[0])

    def current_cycle(self) -> int:
        # During evaluation the counter sits at a multiple of N; the cycle
        # just trained is counter / N.
        return max(1, int(self.trained_episodes) // self.spec.train_episodes_per_cycle)


class ScriptedEnvironment:
    """One-step episodes whose reward is Normal(schedule(cycle of the paired learner))."""

    def __init__(self, spec: ScriptedProcessSpec, learner: ScriptedLearner):
        self.spec = spec
        self.learner = learner
        self.observation_dim = 1
        self.action_dim = 1
        self.max_episode_steps = 1
        self._rng: Optional[np.random.Generator] = None
        self._done = True

    def reset(self, rng: np.random.Generator) -> np.ndarray:
        self._rng = rng
        self._done = False
        return np.zeros(1)

    def step(self, action):
        if self._done or self._rng is None:
            raise RuntimeError("step() called on a finished episode; call reset() first")
        mean, std = self.spec.stats_for(self.learner.current_cycle())
        reward = mean if std == 0.0 else mean + std * self._rng.standard_normal()
        self._done = True
        return np.zeros(1), float(reward), True


def scripted_env_and_learner(spec: ScriptedProcessSpec):
    """Build a paired scripted environment and learner sharing one schedule."""
    learner = ScriptedLearner(spec)
    env = ScriptedEnvironment(spec, learner)
    return env, learner


def make_environment(name: str, **overrides):
    if name == "cartpole":
        return ContinuousCartPole(**overrides)
    raise ValueError(f"unknown environment {name!r}")
