"""Baseline-free REINFORCE with a diagonal-Gaussian policy over a tiny tanh MLP.

Deliberately high-variance: no baseline, no return normalization.  The
instability of this estimator is exactly what the revert harness is meant
to contain, so nothing here tries to smooth it over.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .checkpoints import ParameterVector

LOG_2PI = float(np.log(2.0 * np.pi))

__all__ = ["Trajectory", "PolicyNetwork", "RmsPropState", "ReinforceLearner", "discounted_returns"]


@dataclass
class Trajectory:
    """One episode: per-step observations, actions, and rewards."""

    observations: np.ndarray  # (T, obs_dim)
    actions: np.ndarray  # (T, act_dim)
    rewards: np.ndarray  # (T,)

    def __post_init__(self):
        self.observations = np.atleast_2d(np.asarray(self.observations, dtype=np.float64))
        self.actions = np.atleast_2d(np.asarray(self.actions, dtype=np.float64))
        self.rewards = np.asarray(self.rewards, dtype=np.float64).ravel()
        if self.rewards.size == 0:
            raise ValueError("trajectory must contain at least one step")
        if not np.all(np.isfinite(self.rewards)):
            raise ValueError("trajectory rewards must be finite")
        if not (len(self.observations) == len(self.actions) == len(self.rewards)):
            raise ValueError("observations, actions and rewards must have equal length")

    @property
    def episode_return(self) -> float:
        return float(np.sum(self.rewards))


def discounted_returns(rewards: np.ndarray, gamma: float) -> np.ndarray:
    """Reward-to-go G_t = r_t + gamma * G_{t+1}, with G_T = r_T."""
    rewards = np.asarray(rewards, dtype=np.float64)
    returns = np.empty_like(rewards)
    acc = 0.0
    for t in range(rewards.size - 1, -1, -1):
        acc = rewards[t] + gamma * acc
        returns[t] = acc
    return returns


class PolicyNetwork:
    """MLP [obs_dim, hidden, hidden, act_dim] with tanh hidden layers.

    The network output is the Gaussian action mean; a state-independent
    learnable log_std vector completes the policy.  Parameters flatten
    layer-major (layer 1 weights, layer 1 biases, layer 2 weights, ...,
    output biases, log_std last); the flattening is the interoperability
    contract with checkpoint files.
    """

    def __init__(self, obs_dim: int, act_dim: int, hidden: int = 32,
                 log_std_init: float = 0.0, rng: Optional[np.random.Generator] = None):
        if rng is None:
            rng = np.random.default_rng()
        self.obs_dim = obs_dim
        self.act_dim = act_dim
        sizes = [obs_dim, hidden, hidden, act_dim]
        self.weights = []
        self.biases = []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            bound = 1.0 / np.sqrt(fan_in)
            self.weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
            self.biases.append(rng.uniform(-bound, bound, size=fan_out))
        self.log_std = np.full(act_dim, float(log_std_init))

    def mean_action(self, obs: np.ndarray) -> np.ndarray:
        h = obs
        for w, b in zip(self.weights[:-1], self.biases[:-1]):
            h = np.tanh(h @ w + b)
        return h @ self.weights[-1] + self.biases[-1]

    def log_prob(self, obs: np.ndarray, action: np.ndarray) -> float:
        mean = self.mean_action(obs)
        var = np.exp(2.0 * self.log_std)
        return float(
            -0.5 * np.sum((action - mean) ** 2 / var)
            - np.sum(self.log_std)
            - 0.5 * self.act_dim * LOG_2PI
        )

    def weighted_log_prob_grad(self, observations: np.ndarray, actions: np.ndarray,
                               weights: np.ndarray) -> list[np.ndarray]:
        """Gradient of sum_t weights[t] * log pi(actions[t] | observations[t]).

        Batched over the whole episode; returns gradients in parameter order
        [W1, b1, W2, b2, W3, b3, log_std].
        """
        obs = np.atleast_2d(observations)
        actions = np.atleast_2d(actions)
        weights = np.asarray(weights, dtype=np.float64).ravel()

        # Forward, caching activations.
        h0 = obs
        z1 = h0 @ self.weights[0] + self.biases[0]
        h1 = np.tanh(z1)
        z2 = h1 @ self.weights[1] + self.biases[1]
        h2 = np.tanh(z2)
        mean = h2 @ self.weights[2] + self.biases[2]

        var = np.exp(2.0 * self.log_std)
        diff = actions - mean  # (T, act_dim)
        # d log pi / d mean_t = diff_t / var; weight each step.
        d_mean = (diff / var) * weights[:, None]

        g_w3 = h2.T @ d_mean
        g_b3 = d_mean.sum(axis=0)
        d_h2 = d_mean @ self.weights[2].T
        d_z2 = d_h2 * (1.0 - h2 ** 2)
        g_w2 = h1.T @ d_z2
        g_b2 = d_z2.sum(axis=0)
        d_h1 = d_z2 @ self.weights[1].T
        d_z1 = d_h1 * (1.0 - h1 ** 2)
        g_w1 = h0.T @ d_z1
        g_b1 = d_z1.sum(axis=0)
        # d log pi / d log_std_d = diff_d^2 / var_d - 1, per step.
        g_log_std = ((diff ** 2 / var - 1.0) * weights[:, None]).sum(axis=0)

        return [g_w1, g_b1, g_w2, g_b2, g_w3, g_b3, g_log_std]

    # -- flattening ---------------------------------------------------------

    def _param_arrays(self) -> list[np.ndarray]:
        arrays = []
        for w, b in zip(self.weights, self.biases):
            arrays.append(w)
            arrays.append(b)
        arrays.append(self.log_std)
        return arrays

    @property
    def n_params(self) -> int:
        return sum(a.size for a in self._param_arrays())

    def get_flat(self) -> np.ndarray:
        return np.concatenate([a.ravel() for a in self._param_arrays()])

    def set_flat(self, flat: np.ndarray) -> None:
        flat = np.asarray(flat, dtype=np.float64).ravel()
        if flat.size != self.n_params:
            raise ValueError(f"expected {self.n_params} parameters, got {flat.size}")
        offset = 0
        for a in self._param_arrays():
            a[...] = flat[offset : offset + a.size].reshape(a.shape)
            offset += a.size


@dataclass
class RmsPropState:
    """Per-parameter squared-gradient running average for the RMSProp update."""

    learning_rate: float = 1e-3
    decay: float = 0.99
    epsilon: float = 1e-8
    square_avg: Optional[np.ndarray] = None

    def update(self, params: np.ndarray, grad: np.ndarray) -> np.ndarray:
        """Gradient-ascent RMSProp step; returns the new parameter vector."""
        if self.square_avg is None:
            self.square_avg = np.zeros_like(grad)
        self.square_avg = self.decay * self.square_avg + (1.0 - self.decay) * grad ** 2
        return params + self.learning_rate * grad / (np.sqrt(self.square_avg) + self.epsilon)


class ReinforceLearner:
    """Episodic Monte-Carlo policy gradient with RMSProp, one update per episode by default."""

    def __init__(self, obs_dim: int, act_dim: int, *, hidden: int = 32,
                 gamma: float = 0.95, learning_rate: float = 1e-3,
                 log_std_init: float = 0.0, rmsprop_decay: float = 0.99,
                 rmsprop_epsilon: float = 1e-8,
                 action_low: float = -1.0, action_high: float = 1.0,
                 seed: Optional[int] = None):
        if not (0.0 < gamma <= 1.0):
            raise ValueError("gamma must be in (0, 1]")
        if learning_rate < 0.0:
            raise ValueError("learning rate must be >= 0")
        self.rng = np.random.default_rng(seed)
        self.network = PolicyNetwork(obs_dim, act_dim, hidden=hidden,
                                     log_std_init=log_std_init, rng=self.rng)
        self.gamma = gamma
        self.optimizer = RmsPropState(
            learning_rate=learning_rate, decay=rmsprop_decay, epsilon=rmsprop_epsilon,
            square_avg=np.zeros(self.network.n_params),
        )
        self.action_low = action_low
        self.action_high = action_high

    def act(self, observation) -> np.ndarray:
        obs = np.asarray(observation, dtype=np.float64).ravel()
        if obs.size != self.network.obs_dim:
            raise ValueError(
                f"observation has dimension {obs.size}, expected {self.network.obs_dim}"
            )
        mean = self.network.mean_action(obs)
        std = np.exp(self.network.log_std)
        action = mean + std * self.rng.standard_normal(self.network.act_dim)
        return np.clip(action, self.action_low, self.action_high)

    def act_mean(self, observation) -> np.ndarray:
        obs = np.asarray(observation, dtype=np.float64).ravel()
        if obs.size != self.network.obs_dim:
            raise ValueError(
                f"observation has dimension {obs.size}, expected {self.network.obs_dim}"
            )
        return np.clip(self.network.mean_action(obs), self.action_low, self.action_high)

    def train_on_episode(self, trajectory: Trajectory) -> None:
        self.reinforce_update([trajectory])

    def reinforce_update(self, trajectories: list[Trajectory]) -> None:
        """Apply one RMSProp ascent step on the mean episodic REINFORCE gradient."""
        if not trajectories:
            raise ValueError("need at least one trajectory")
        grad = np.zeros(self.network.n_params)
        for traj in trajectories:
            returns = discounted_returns(traj.rewards, self.gamma)
            pieces = self.network.weighted_log_prob_grad(
                traj.observations, traj.actions, returns
            )
            grad += np.concatenate([p.ravel() for p in pieces])
        grad /= len(trajectories)
        new_flat = self.optimizer.update(self.network.get_flat(), grad)
        self.network.set_flat(new_flat)

    def ingest_offline(self, trajectory: Trajectory) -> None:
        """Hook for off-policy reuse of evaluation experience; no-op for REINFORCE."""

    def get_parameters(self) -> ParameterVector:
        return ParameterVector(
            values=self.network.get_flat(),
            optimizer_state=self.optimizer.square_avg.copy(),
        )

    def set_parameters(self, params: ParameterVector) -> None:
        self.network.set_flat(params.values)
        if params.optimizer_state is not None:
            state = params.optimizer_state
            if state.size != self.network.n_params:
                raise ValueError(
                    f"optimizer state has size {state.size}, expected {self.network.n_params}"
                )
            self.optimizer.square_avg = state.copy()
