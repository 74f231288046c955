import json

import numpy as np
import pytest

from ctrlz.checkpoints import CheckpointStore
from ctrlz.envs import ScriptedProcessSpec, scripted_env_and_learner
from ctrlz.harness import ScheduleConfig, run_baseline, run_episode, run_training


N = 5
M = 10


def schedule(**kwargs):
    defaults = dict(total_train_episodes=30, train_episodes_per_cycle=N,
                    eval_episodes=M, threshold=0.1, comparator="mann_whitney")
    defaults.update(kwargs)
    return ScheduleConfig(**defaults)


def scripted(degradation_cycle=4, noise_std=0.1, **kwargs):
    spec = ScriptedProcessSpec(train_episodes_per_cycle=N, noise_std=noise_std,
                               degradation_cycle=degradation_cycle, **kwargs)
    return scripted_env_and_learner(spec)


def records_as_json(records):
    return json.dumps([r.to_dict() for r in records], sort_keys=True)


class TestScheduleConfig:
    def test_defaults(self):
        cfg = ScheduleConfig(total_train_episodes=60)
        assert cfg.train_episodes_per_cycle == 30
        assert cfg.eval_episodes == 20
        assert cfg.threshold == 0.1
        assert cfg.comparator == "mann_whitney"

    @pytest.mark.parametrize("bad", [
        dict(total_train_episodes=10, train_episodes_per_cycle=30),
        dict(total_train_episodes=60, threshold=1.5),
        dict(total_train_episodes=60, comparator="wilcoxon"),
        dict(total_train_episodes=60, eval_episodes=0),
    ])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            ScheduleConfig(**bad)


class TestRevertMechanics:
    def test_revert_fires_at_degradation_cycle(self):
        env, learner = scripted(degradation_cycle=4)
        records = run_training(learner, env, schedule(), rng_seed=0)
        assert records[2].reverted_to is None
        assert records[3].reverted_to is not None
        assert records[3].verdict.revert
        assert records[3].verdict.min_score == 0.0
        assert records[3].checkpoint_saved is None

    def test_revert_targets_best_checkpoint_and_restores_exactly(self):
        env, learner = scripted(degradation_cycle=4)
        store = CheckpointStore()
        records = run_training(learner, env, schedule(), rng_seed=1, store=store)
        rec = records[3]
        target = store.get(rec.reverted_to)
        # scripted parameters are the trained-episode counter
        assert learner.get_parameters().values[0] == target.params.values[0]
        # the target is the stored checkpoint with the highest mean evaluation
        best = max(store.checkpoints[:3], key=lambda c: c.mean_reward)
        assert rec.reverted_to == best.id

    def test_improving_run_never_reverts(self):
        env, learner = scripted(degradation_cycle=100,
                                schedule={c: (10.0 * c, 0.01) for c in range(1, 10)})
        records = run_training(learner, env, schedule(), rng_seed=0)
        assert all(r.reverted_to is None for r in records)
        assert [r.checkpoint_saved for r in records] == list(range(6))

    def test_threshold_zero_never_reverts(self):
        env, learner = scripted(degradation_cycle=2)
        records = run_training(learner, env, schedule(threshold=0.0), rng_seed=0)
        assert all(r.reverted_to is None for r in records)

    def test_failing_evaluation_not_checkpointed(self):
        env, learner = scripted(degradation_cycle=4)
        store = CheckpointStore()
        run_training(learner, env, schedule(), rng_seed=0, store=store)
        stored_means = [c.mean_reward for c in store.checkpoints]
        assert all(m > 5.0 for m in stored_means)


class TestCycleAccounting:
    def test_budget_gives_exact_cycle_count(self):
        env, learner = scripted(degradation_cycle=100)
        records = run_training(learner, env, schedule(total_train_episodes=15), rng_seed=0)
        assert len(records) == 3
        assert all(len(r.train_returns) == N for r in records)
        assert all(len(r.eval_returns) == M for r in records)

    def test_first_cycle_has_no_verdict(self):
        env, learner = scripted(degradation_cycle=100)
        records = run_training(learner, env, schedule(), rng_seed=0)
        assert records[0].verdict is None
        assert records[0].checkpoint_saved == 0
        assert all(r.verdict is not None for r in records[1:])

    def test_exactly_one_of_saved_or_reverted(self):
        env, learner = scripted(degradation_cycle=3)
        records = run_training(learner, env, schedule(), rng_seed=0)
        for rec in records:
            assert (rec.checkpoint_saved is None) != (rec.reverted_to is None)


class TestBaseline:
    def test_baseline_never_reverts(self):
        env, learner = scripted(degradation_cycle=2)
        records = run_baseline(learner, env, schedule(), rng_seed=0)
        assert all(r.reverted_to is None for r in records)
        assert all(not r.verdict.revert for r in records if r.verdict is not None)

    def test_prefix_equivalence_before_first_revert(self):
        sched = schedule()
        env1, learner1 = scripted(degradation_cycle=4)
        with_revert = run_training(learner1, env1, sched, rng_seed=7)
        env2, learner2 = scripted(degradation_cycle=4)
        control = run_baseline(learner2, env2, sched, rng_seed=7)
        first_revert = next(i for i, r in enumerate(with_revert) if r.reverted_to is not None)
        for a, b in zip(with_revert[:first_revert], control[:first_revert]):
            assert a.train_returns == b.train_returns
            assert a.eval_returns == b.eval_returns

    def test_non_invasiveness_at_threshold_zero(self):
        sched = schedule(threshold=0.0)
        env1, learner1 = scripted(degradation_cycle=4)
        trained = run_training(learner1, env1, sched, rng_seed=3)
        env2, learner2 = scripted(degradation_cycle=4)
        control = run_baseline(learner2, env2, sched, rng_seed=3)
        assert records_as_json(trained) == records_as_json(control)


class TestDeterminism:
    def test_identical_seeds_give_identical_logs(self):
        logs = []
        for _ in range(2):
            env, learner = scripted(degradation_cycle=4)
            logs.append(records_as_json(run_training(learner, env, schedule(), rng_seed=11)))
        assert logs[0] == logs[1]

    def test_different_seeds_differ(self):
        env1, learner1 = scripted(degradation_cycle=100)
        env2, learner2 = scripted(degradation_cycle=100)
        a = records_as_json(run_training(learner1, env1, schedule(), rng_seed=0))
        b = records_as_json(run_training(learner2, env2, schedule(), rng_seed=1))
        assert a != b


class TestRunEpisode:
    def test_trajectory_shape(self):
        env, learner = scripted(degradation_cycle=100)
        traj = run_episode(learner, env, np.random.default_rng(0))
        assert len(traj.rewards) == 1
        assert traj.observations.shape[0] == 1

    def test_contract_violations_carry_cycle_index(self):
        env, learner = scripted(degradation_cycle=100)
        learner.train_on_episode = None  # break the learner contract
        with pytest.raises(RuntimeError, match="cycle 1"):
            run_training(learner, env, schedule(), rng_seed=0)
