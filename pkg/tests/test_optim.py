import numpy as np
import pytest

from mfgil.mlp import Mlp
from mfgil.optim import AdamState, NonFiniteGradient, adam_step


def _quadratic_net(rng):
    w = rng.normal(size=(3, 2))
    b = rng.normal(size=2)
    return Mlp([(w, b)])


def test_adam_minimizes_quadratic(rng):
    net = _quadratic_net(rng)
    target_w = rng.normal(size=(3, 2))
    target_b = rng.normal(size=2)
    state = AdamState(lr=0.05)
    for _ in range(800):
        w, b = net.layers[0]
        grads = [(2.0 * (w - target_w), 2.0 * (b - target_b))]
        adam_step(net, grads, state)
    w, b = net.layers[0]
    assert np.abs(w - target_w).max() < 1e-4
    assert np.abs(b - target_b).max() < 1e-4


def test_adam_rejects_non_finite_gradients(rng):
    net = _quadratic_net(rng)
    bad = [(np.full((3, 2), np.nan), np.zeros(2))]
    with pytest.raises(NonFiniteGradient):
        adam_step(net, bad, AdamState(lr=0.1))


def test_cosine_schedule_endpoints():
    state = AdamState(lr=0.4, cosine_total=100)
    assert state.current_lr() == pytest.approx(0.4)
    state.step = 50
    assert state.current_lr() == pytest.approx(0.2)
    state.step = 100
    assert state.current_lr() == pytest.approx(0.0, abs=1e-15)


def test_constant_schedule_without_cosine():
    state = AdamState(lr=0.3)
    state.step = 1234
    assert state.current_lr() == 0.3
