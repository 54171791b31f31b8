import numpy as np
import pytest

from mfgil.envs import build_env
from mfgil.envs.beach_bar import circular_distance, torus_transition_matrices
from mfgil.envs.night_clubs import circular_mean_state, round_toward_zero
from mfgil.envs.two_state import perturbed_mass

from conftest import random_fields


def test_transition_rows_are_distributions(small_model, rng):
    model = small_model
    rhos = random_fields(model, 64, rng)
    e0s = model.sample_noise_batch(rng, 64)
    P = model.transition_matrices(rhos, e0s)
    assert P.shape == (64, model.n_states, model.n_actions, model.n_states)
    assert np.all(P >= 0)
    assert np.allclose(P.sum(axis=3), 1.0, atol=1e-12)


def test_rewards_finite_and_shaped(small_model, rng):
    model = small_model
    rhos = random_fields(model, 64, rng)
    r = model.reward_matrices(rhos)
    assert r.shape == (64, model.n_states, model.n_actions)
    assert np.all(np.isfinite(r))


def test_scalar_conveniences(small_model, rng):
    model = small_model
    rho = random_fields(model, 1, rng)[0]
    e0 = model.sample_noise(rng)
    row = model.transition(0, 0, rho, e0)
    assert row.shape == (model.n_states,)
    assert abs(row.sum() - 1.0) < 1e-12
    assert np.isfinite(model.reward(0, 0, rho))


def test_noise_path_shapes(small_model, rng):
    model = small_model
    paths = model.sample_noise_paths(rng, 5)
    assert paths.shape[:2] == (5, model.horizon - 1)


# -- two-state specifics -------------------------------------------------

def test_perturbed_mass_degenerate_noise():
    assert perturbed_mass(0.0, 0.3, 0.7) == 0.0
    assert perturbed_mass(1.0, 0.3, 0.7) == 1.0
    # zero denominator convention
    assert perturbed_mass(0.5, 0.0, 0.0) == 0.0


def test_perturbed_mass_neutral_noise():
    # e0 = 1/2 leaves the population law unchanged
    assert np.isclose(perturbed_mass(0.5, 0.3, 0.7), 0.3)


def test_two_state_transition_is_state_independent(rng):
    model = build_env("two_state", horizon=4)
    rhos = random_fields(model, 8, rng)
    e0s = model.sample_noise_batch(rng, 8)
    P = model.transition_matrices(rhos, e0s)
    assert np.allclose(P[:, 0], P[:, 1])


def test_two_state_reward_is_negative_occupancy(rng):
    model = build_env("two_state")
    rhos = random_fields(model, 8, rng)
    r = model.reward_matrices(rhos)
    assert np.allclose(r[:, :, 0], -rhos)
    assert np.allclose(r[:, :, 1], -rhos)


def test_two_state_eta_zero_kernel_is_deterministic(rng):
    model = build_env("two_state", eta=0.0, horizon=4)
    rhos = random_fields(model, 8, rng)
    e0s = model.sample_noise_batch(rng, 8)
    P = model.transition_matrices(rhos, e0s)
    # action a moves to state a with probability one
    assert np.allclose(P[:, :, 0, 0], 1.0)
    assert np.allclose(P[:, :, 1, 1], 1.0)


# -- torus environments --------------------------------------------------

def test_circular_distance():
    assert circular_distance(0, 7, 8) == 1
    assert circular_distance(2, 6, 8) == 4
    assert np.array_equal(circular_distance(np.arange(4), 0, 4), [0, 1, 2, 1])


def test_torus_transitions_zero_noise():
    n = 8
    e0 = np.zeros((1, n), dtype=np.int64)
    P = torus_transition_matrices(None, e0, n)[0]
    for x in range(n):
        for ai, a in enumerate((-1, 0, 1)):
            targets = [(x + a + d) % n for d in (-1, 0, 1)]
            expect = np.zeros(n)
            expect[targets] = 1.0 / 3.0
            assert np.allclose(P[x, ai], expect)


def test_torus_transitions_shift_equivariance(rng):
    # shifting every state by one and shifting the noise vector match
    n = 8
    e0 = rng.integers(-2, 3, size=(1, n))
    P = torus_transition_matrices(None, e0, n)[0]
    P_shift = torus_transition_matrices(None, np.roll(e0, 1, axis=1), n)[0]
    assert np.allclose(np.roll(np.roll(P, 1, axis=0), 1, axis=2), P_shift)


def test_beach_bar_reward_open_vs_closed_bar():
    model = build_env("beach_bar", x_half=2, beta=0.2)
    n = model.n_states
    bar = n // 2
    crowded = np.full(n, 1.0 / n)
    crowded[bar] = 0.5
    crowded /= crowded.sum()
    open_rho = np.full(n, 1.0 / n)
    open_rho[bar] = 0.1
    open_rho /= open_rho.sum()
    r_open = model.reward_matrices(open_rho[None])[0]
    r_closed = model.reward_matrices(crowded[None])[0]
    # distance penalty only applies while the bar is open
    away = (bar + n // 2) % n
    d = circular_distance(away, bar, n)
    assert r_open[away, 1] < r_open[bar, 1]
    # moving costs one unit of reward
    assert np.allclose(r_open[:, 1] - r_open[:, 0], 1.0)
    assert np.allclose(r_open[:, 1] - r_open[:, 2], 1.0)
    assert d > 0 and np.isfinite(r_closed).all()


def test_beach_bar_linear_distance_option(rng):
    model = build_env("beach_bar", x_half=2, distance="linear")
    rho = random_fields(model, 1, rng)
    assert np.isfinite(model.reward_matrices(rho)).all()


def test_night_clubs_circular_mean_point_mass():
    n = 8
    for k in range(n):
        rho = np.zeros(n)
        rho[k] = 1.0
        assert circular_mean_state(rho[None], n)[0] == k


def test_night_clubs_circular_mean_degenerate():
    n = 8
    assert circular_mean_state(np.full((1, n), 1.0 / n), n)[0] == 0


def test_round_toward_zero():
    v = np.array([0.5, -0.5, 1.5, -1.5, 0.6, -0.6])
    assert np.array_equal(round_toward_zero(v), [0, 0, 1, -1, 1, -1])


def test_night_clubs_zero_eta_noise_is_null(rng):
    model = build_env("night_clubs", x_half=1, eta=0.0)
    e0 = model.sample_noise_batch(rng, 32)
    assert np.all(e0 == 0)


# -- builders ------------------------------------------------------------

def test_build_env_unknown_name():
    with pytest.raises(ValueError):
        build_env("nope")


@pytest.mark.parametrize("name,bad", [
    ("two_state", {"alpha": -1.0}),
    ("two_state", {"eta": 1.5}),
    ("beach_bar", {"beta": 0.0}),
    ("beach_bar", {"distance": "taxicab"}),
    ("night_clubs", {"x_half": 0}),
    ("night_clubs", {"horizon": 0}),
])
def test_build_env_invalid_params(name, bad):
    with pytest.raises(ValueError):
        build_env(name, **bad)
