import math

import numpy as np
import pytest

import replab


def test_version():
    assert replab.__version__


def test_exact_mi_discrete():
    table = np.array([[0.4, 0.1], [0.1, 0.4]])
    expected = 2 * 0.4 * math.log(1.6) + 2 * 0.1 * math.log(0.4)
    assert replab.exact_mi_discrete(table) == pytest.approx(expected, abs=1e-12)
    assert replab.exact_mi_discrete(np.full((2, 2), 0.25)) == pytest.approx(0.0, abs=1e-12)


def test_ksg_estimator_on_gaussians():
    rng = np.random.default_rng(0)
    n, rho = 4096, 0.9
    z1 = rng.standard_normal((n, 1))
    z2 = rng.standard_normal((n, 1))
    x = z1
    y = rho * z1 + math.sqrt(1 - rho**2) * z2
    estimate = replab.ksg_mi_cc(x, y, k=3, seed=1)
    assert estimate == pytest.approx(-0.5 * math.log(1 - rho**2), abs=0.05)


def test_mixed_estimator_on_clusters():
    rng = np.random.default_rng(1)
    n = 2048
    labels = rng.integers(0, 2, n)
    x = rng.standard_normal((n, 1)) + 100.0 * labels[:, None]
    estimate = replab.mi_cd(x, [int(v) for v in labels], k=3, seed=2)
    assert estimate == pytest.approx(math.log(2), abs=0.03)


def test_compression_efficiency_clamps():
    assert replab.compression_efficiency(0.5, 1.0) == pytest.approx(0.5)
    assert replab.compression_efficiency(1.2, 1.0) == pytest.approx(1.0)
    with pytest.raises(Exception):
        replab.compression_efficiency(0.5, 0.0)


def test_welch_t_test():
    t, dof, significant = replab.welch_t_test([1.0, 2.0, 3.0], [11.0, 12.0, 13.0])
    assert significant
    t0, _, sig0 = replab.welch_t_test([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert t0 == pytest.approx(0.0)
    assert not sig0


def test_assembly_environment_contract():
    env = replab.Environment("assembly", train_levels=4, test_levels=4, seed=3)
    assert env.n_actions == 2
    obs = env.reset(0)
    assert obs.shape == (env.obs_dim,)
    steps = 0
    done = False
    while not done:
        _, reward, done = env.step(env.optimal_action())
        assert reward == 1.0  # optimal play never errs
        steps += 1
    assert steps <= 8

    # determinism
    first = env.reset(1)
    second = env.reset(1)
    assert np.array_equal(first, second)


def test_gridworld_environment_contract():
    env = replab.Environment("gridworld", train_levels=2, test_levels=2, seed=4)
    env.reset(0)
    steps = 0
    done = False
    while not done and steps < 200:
        _, _, done = env.step(4)  # no-op until the step cap
        steps += 1
    assert steps == 64


def test_train_measure_roundtrip():
    agent = replab.train_agent(
        env_kind="assembly",
        algorithm="ppo",
        coupling="coupled",
        budget=4096,
        seed=0,
        train_levels=4,
        test_levels=8,
        num_envs=4,
        rollout_len=32,
    )
    assert agent.env_steps == 4096
    assert math.isfinite(agent.final_train_return)

    env = replab.Environment("assembly", train_levels=4, test_levels=4, seed=1)
    obs = env.reset(0)
    probs = agent.action_probabilities(obs)
    assert probs.shape == (2,)
    assert probs.sum() == pytest.approx(1.0)
    assert agent.actor_latent(obs).shape == (32,)

    metrics = replab.measure_agent(agent, "actor", collection_steps=4096, n=512, seed=5)
    for key in ("z_level", "z_value", "zz_action", "z_next"):
        assert metrics[key] >= 0.0

    # same configuration and seed reproduce the same returns
    again = replab.train_agent(
        env_kind="assembly",
        algorithm="ppo",
        coupling="coupled",
        budget=4096,
        seed=0,
        train_levels=4,
        test_levels=8,
        num_envs=4,
        rollout_len=32,
    )
    assert again.final_train_return == agent.final_train_return


def test_verify_theory():
    results = replab.verify_theory(seed=2024)
    assert len(results) > 10
    failures = [r["name"] for r in results if not r["passed"]]
    assert not failures
