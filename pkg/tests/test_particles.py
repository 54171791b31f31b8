import numpy as np

from mfgil.envs import build_env
from mfgil.flows import path_values, population_flow_batch
from mfgil.particles import (particle_value, simulate_agents,
                             simulate_agents_batch)
from mfgil.policies import random_tabular
from mfgil.seeding import derive_rng


def test_batch_shapes_and_empirical_fields(small_model, rng):
    model = small_model
    policy = random_tabular(model.horizon, model.n_states, model.n_actions, rng)
    noises = model.sample_noise_paths(rng, 4)
    m = 25
    states, actions, emp, exact = simulate_agents_batch(
        policy, model, noises, m, rng)
    h, x = model.horizon, model.n_states
    assert states.shape == actions.shape == (4, h, m)
    assert emp.shape == exact.shape == (4, h, x)
    assert np.all((states >= 0) & (states < x))
    assert np.all((actions >= 0) & (actions < model.n_actions))
    # empirical fields are exact multiples of 1/M and sum to one
    assert np.allclose(emp * m, np.round(emp * m), atol=1e-9)
    assert np.allclose(emp.sum(axis=2), 1.0, atol=1e-12)
    assert np.allclose(exact, population_flow_batch(policy, noises, model))


def test_batch_matches_single_path_simulator(rng):
    model = build_env("two_state", horizon=6)
    policy = random_tabular(model.horizon, 2, 2, rng)
    noises = model.sample_noise_paths(rng, 1)
    s1 = simulate_agents(policy, model, noises[0], 10,
                         derive_rng(7, "particles"))
    s2 = simulate_agents_batch(policy, model, noises, 10,
                               derive_rng(7, "particles"))
    assert np.array_equal(s1[0], s2[0][0])
    assert np.array_equal(s1[1], s2[1][0])
    assert np.allclose(s1[2], s2[2][0])


def test_determinism_given_seed(small_model, rng):
    model = small_model
    policy = random_tabular(model.horizon, model.n_states, model.n_actions, rng)
    noises = model.sample_noise_paths(rng, 3)
    a = simulate_agents_batch(policy, model, noises, 20, derive_rng(1, "x"))
    b = simulate_agents_batch(policy, model, noises, 20, derive_rng(1, "x"))
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[1], b[1])


def test_empirical_fields_concentrate_on_exact_flow(rng):
    # law of large numbers: each agent's marginal is the exact flow
    model = build_env("two_state", horizon=8)
    policy = random_tabular(model.horizon, 2, 2, rng)
    noises = model.sample_noise_paths(rng, 2)
    m = 20000
    _, _, emp, exact = simulate_agents_batch(policy, model, noises, m, rng)
    se = np.sqrt(exact * (1.0 - exact) / m)
    assert np.all(np.abs(emp - exact) <= 4.0 * se + 1e-3)


def test_particle_value_matches_exact_path_value(rng):
    model = build_env("two_state", horizon=8)
    policy = random_tabular(model.horizon, 2, 2, rng)
    noises = model.sample_noise_paths(rng, 1)
    exact = path_values(policy, policy, model, noises)[0]
    mean, se = particle_value(policy, model, noises[0], 20000, rng)
    assert abs(mean - exact) <= 3.0 * se
