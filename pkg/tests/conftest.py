"""Shared fixtures and small helpers for the test suite."""

import numpy as np
import pytest

from mfgil.envs import build_env

# small-horizon variants of the three environments, cheap enough for
# property tests that loop over all of them
SMALL_ENV_SPECS = [
    ("two_state", {"horizon": 6}),
    ("beach_bar", {"x_half": 1, "horizon": 6}),
    ("night_clubs", {"x_half": 1, "horizon": 6}),
]


def small_env(name):
    spec = dict(SMALL_ENV_SPECS)[name]
    return build_env(name, **spec)


@pytest.fixture(params=[s[0] for s in SMALL_ENV_SPECS])
def small_model(request):
    return small_env(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(0)


def random_fields(model, n, rng):
    """Random mean fields on the model's simplex: (n, X)."""
    return rng.dirichlet(np.ones(model.n_states), size=n)
