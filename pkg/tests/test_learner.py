import numpy as np
import pytest

from ctrlz.checkpoints import ParameterVector
from ctrlz.learner import PolicyNetwork, ReinforceLearner, Trajectory, discounted_returns


def make_learner(seed=0, **kwargs):
    return ReinforceLearner(obs_dim=4, act_dim=1, seed=seed, **kwargs)


class TestDiscountedReturns:
    def test_recursion_holds_exactly(self):
        rng = np.random.default_rng(0)
        rewards = rng.standard_normal(37)
        gamma = 0.95
        returns = discounted_returns(rewards, gamma)
        assert returns[-1] == rewards[-1]
        for t in range(len(rewards) - 1):
            assert returns[t] == rewards[t] + gamma * returns[t + 1]

    def test_single_step_ignores_gamma(self):
        assert discounted_returns(np.array([2.5]), 0.1)[0] == 2.5


class TestFlattening:
    def test_round_trip_exact(self):
        net = PolicyNetwork(4, 1, rng=np.random.default_rng(0))
        flat = net.get_flat()
        net.set_flat(flat)
        assert np.array_equal(net.get_flat(), flat)

    def test_covers_every_scalar_once(self):
        net = PolicyNetwork(4, 2, hidden=8, rng=np.random.default_rng(0))
        expected = (4 * 8 + 8) + (8 * 8 + 8) + (8 * 2 + 2) + 2
        assert net.n_params == expected
        assert net.get_flat().size == expected
        # perturbing any flat entry changes exactly that entry on read-back
        flat = net.get_flat()
        flat[11] += 1.0
        net.set_flat(flat)
        assert np.array_equal(net.get_flat(), flat)

    def test_wrong_length_rejected(self):
        net = PolicyNetwork(4, 1, rng=np.random.default_rng(0))
        with pytest.raises(ValueError):
            net.set_flat(np.zeros(net.n_params + 1))

    def test_same_parameters_same_outputs(self):
        net1 = PolicyNetwork(4, 1, rng=np.random.default_rng(1))
        net2 = PolicyNetwork(4, 1, rng=np.random.default_rng(2))
        net2.set_flat(net1.get_flat())
        rng = np.random.default_rng(3)
        for _ in range(10):
            obs = rng.standard_normal(4)
            assert np.array_equal(net1.mean_action(obs), net2.mean_action(obs))


class TestGradients:
    def finite_difference(self, net, obs, action, h=1e-5):
        flat = net.get_flat()
        grad = np.empty_like(flat)
        for i in range(flat.size):
            bumped = flat.copy()
            bumped[i] += h
            net.set_flat(bumped)
            up = net.log_prob(obs, action)
            bumped[i] -= 2 * h
            net.set_flat(bumped)
            down = net.log_prob(obs, action)
            grad[i] = (up - down) / (2 * h)
        net.set_flat(flat)
        return grad

    def test_log_prob_grad_matches_finite_differences(self):
        rng = np.random.default_rng(42)
        for trial in range(5):
            net = PolicyNetwork(3, 2, hidden=5, rng=rng)
            net.log_std = rng.uniform(-1, 0.5, size=2)
            obs = rng.standard_normal(3)
            action = rng.standard_normal(2)
            analytic = np.concatenate([
                p.ravel() for p in net.weighted_log_prob_grad(
                    obs[None, :], action[None, :], np.array([1.0])
                )
            ])
            numeric = self.finite_difference(net, obs, action)
            scale = np.maximum(np.abs(numeric), 1e-2)
            assert np.max(np.abs(analytic - numeric) / scale) < 1e-4

    def test_return_weighting_scales_gradient(self):
        net = PolicyNetwork(3, 1, hidden=4, rng=np.random.default_rng(0))
        obs = np.ones((1, 3))
        action = np.full((1, 1), 0.3)
        g1 = net.weighted_log_prob_grad(obs, action, np.array([1.0]))
        g5 = net.weighted_log_prob_grad(obs, action, np.array([5.0]))
        for a, b in zip(g1, g5):
            assert np.allclose(5.0 * a, b)


class TestActing:
    def test_vanishing_noise_gives_mean_action(self):
        learner = make_learner(log_std_init=-20.0)
        obs = np.array([0.1, -0.2, 0.05, 0.0])
        action = learner.act(obs)
        assert np.allclose(action, learner.act_mean(obs), atol=1e-6)

    def test_zero_network_gives_zero_action(self):
        learner = make_learner(log_std_init=-20.0)
        flat = np.zeros(learner.network.n_params)
        flat[-1] = -20.0  # keep log_std
        learner.network.set_flat(flat)
        action = learner.act(np.array([0.3, 0.1, -0.4, 0.2]))
        assert np.allclose(action, 0.0, atol=1e-6)

    def test_seeded_action_sequence_repeats(self):
        obs = np.array([0.1, 0.2, 0.3, 0.4])
        a = [make_learner(seed=5).act(obs) for _ in range(1)]
        l1, l2 = make_learner(seed=5), make_learner(seed=5)
        seq1 = [l1.act(obs) for _ in range(20)]
        seq2 = [l2.act(obs) for _ in range(20)]
        assert all(np.array_equal(x, y) for x, y in zip(seq1, seq2))

    def test_actions_respect_bounds(self):
        learner = make_learner(log_std_init=2.0)
        for _ in range(100):
            action = learner.act(np.zeros(4))
            assert np.all(action >= -1.0) and np.all(action <= 1.0)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            make_learner().act(np.zeros(3))


def one_step_trajectory(reward):
    return Trajectory(observations=np.zeros((1, 4)), actions=np.zeros((1, 1)),
                      rewards=np.array([reward]))


class TestReinforceUpdate:
    def test_zero_rewards_leave_parameters_unchanged(self):
        learner = make_learner()
        before = learner.network.get_flat()
        learner.train_on_episode(one_step_trajectory(0.0))
        assert np.array_equal(learner.network.get_flat(), before)

    def test_zero_learning_rate_is_a_no_op(self):
        learner = make_learner(learning_rate=0.0)
        before = learner.network.get_flat()
        learner.train_on_episode(one_step_trajectory(3.0))
        assert np.array_equal(learner.network.get_flat(), before)

    def test_nonzero_reward_moves_parameters(self):
        learner = make_learner()
        before = learner.network.get_flat()
        traj = Trajectory(observations=np.ones((1, 4)), actions=np.full((1, 1), 0.5),
                          rewards=np.array([1.0]))
        learner.train_on_episode(traj)
        assert not np.array_equal(learner.network.get_flat(), before)

    def test_empty_batch_rejected(self):
        with pytest.raises(ValueError):
            make_learner().reinforce_update([])


class TestParameterInterface:
    def test_round_trip_preserves_behavior(self):
        learner = make_learner(seed=9)
        learner.train_on_episode(one_step_trajectory(2.0))
        params = learner.get_parameters()
        learner.set_parameters(params)
        assert learner.get_parameters() == params

    def test_optimizer_state_round_trips(self):
        learner = make_learner()
        learner.train_on_episode(one_step_trajectory(1.0))
        params = learner.get_parameters()
        assert params.optimizer_state is not None
        other = make_learner(seed=99)
        other.set_parameters(params)
        assert np.array_equal(other.optimizer.square_avg, params.optimizer_state)

    def test_values_only_restore_keeps_optimizer(self):
        learner = make_learner()
        learner.train_on_episode(one_step_trajectory(1.0))
        acc = learner.optimizer.square_avg.copy()
        learner.set_parameters(ParameterVector(values=np.zeros(learner.network.n_params)))
        assert np.array_equal(learner.optimizer.square_avg, acc)

    def test_wrong_length_rejected(self):
        learner = make_learner()
        with pytest.raises(ValueError):
            learner.set_parameters(ParameterVector(values=np.zeros(3)))


class TestTrajectory:
    def test_rejects_empty(self):
        with pytest.raises(ValueError):
            Trajectory(observations=np.zeros((0, 4)), actions=np.zeros((0, 1)),
                       rewards=np.array([]))

    def test_rejects_non_finite_rewards(self):
        with pytest.raises(ValueError):
            one_step_trajectory(float("nan"))

    def test_episode_return(self):
        traj = Trajectory(observations=np.zeros((3, 1)), actions=np.zeros((3, 1)),
                          rewards=np.array([1.0, 2.0, 3.0]))
        assert traj.episode_return == 6.0
