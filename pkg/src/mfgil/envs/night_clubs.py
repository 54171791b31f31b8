"""Two night clubs on a torus: gathering incentives with capacity limits.

Dynamics are shared with the beach bar; the common noise is a block
shift hitting two adjacent states, and the reward targets the nearest
club unless it is over capacity.
"""

from dataclasses import dataclass

import numpy as np

from ..model import MfgModel
from .beach_bar import circular_distance, torus_transition_matrices


@dataclass(frozen=True)
class NightClubsParams:
    x_half: int = 5        # X; clubs at X and 3*X, torus of 4*X states
    alpha: float = 1.0     # gathering penalty weight
    beta: float = 0.1      # club capacity
    eta: float = 0.3       # noise intensity
    horizon: int = 30

    def __post_init__(self):
        if self.x_half < 1:
            raise ValueError("x_half must be a positive integer")
        if not 0.0 < self.beta <= 1.0:
            raise ValueError("beta must lie in (0, 1]")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.alpha < 0:
            raise ValueError("alpha must be nonnegative")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")


def round_toward_zero(v):
    """Round to nearest integer, ties toward zero."""
    return np.sign(v) * np.ceil(np.abs(v) - 0.5)


def circular_mean_state(rhos, n_states):
    """Weighted circular mean mapped back to the nearest integer state.

    Degenerate resultants (length < 1e-9) map to state 0.
    """
    rhos = np.asarray(rhos, dtype=float)
    angles = 2.0 * np.pi * np.arange(n_states) / n_states
    z = rhos @ np.exp(1j * angles)
    mean_angle = np.mod(np.angle(z), 2.0 * np.pi)
    state = np.round(mean_angle * n_states / (2.0 * np.pi)).astype(int) % n_states
    return np.where(np.abs(z) < 1e-9, 0, state)


def night_clubs_model(p: NightClubsParams) -> MfgModel:
    n_states = 4 * p.x_half
    clubs = np.array([p.x_half, 3 * p.x_half])
    x = np.arange(n_states)
    dist_to_clubs = np.stack(
        [circular_distance(x, c, n_states) for c in clubs], axis=0
    )  # (2, X)
    # nearest club per state, ties to club 1
    nearest = (dist_to_clubs[1] < dist_to_clubs[0]).astype(int)  # (X,)

    def transition_matrices(rhos, e0s):
        return torus_transition_matrices(rhos, e0s, n_states)

    def reward_matrices(rhos):
        rhos = np.asarray(rhos, dtype=float)
        s = rhos.shape[0]
        near_open = rhos[:, clubs[nearest]] <= p.beta  # (S, X)
        d_near = dist_to_clubs[nearest, np.arange(n_states)][None, :]
        d_far = dist_to_clubs[1 - nearest, np.arange(n_states)][None, :]
        effective = np.where(near_open, d_near, d_far)  # (S, X)
        xbar = circular_mean_state(rhos, n_states)  # (S,)
        gather = circular_distance(x[None, :], xbar[:, None], n_states)
        per_state = -effective - p.alpha * gather
        return np.repeat(per_state[:, :, None], 3, axis=2)

    def sample_noise_batch(rng, size):
        m = n_states // 3
        shift = rng.integers(-m, m + 1, size=size)
        start = rng.integers(0, n_states, size=size)
        magnitude = round_toward_zero(shift * p.eta ** (1.0 / 3.0)).astype(np.int64)
        e0 = np.zeros((size, n_states), dtype=np.int64)
        rows = np.arange(size)
        e0[rows, start] = magnitude
        e0[rows, (start + 1) % n_states] = magnitude
        return e0

    return MfgModel(
        name="night_clubs",
        n_states=n_states,
        n_actions=3,
        horizon=p.horizon,
        rho0=np.full(n_states, 1.0 / n_states),
        transition_matrices=transition_matrices,
        reward_matrices=reward_matrices,
        sample_noise_batch=sample_noise_batch,
        rho_dependent_kernel=False,
        params=p,
    )
