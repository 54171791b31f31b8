"""Two-state, two-action congestion game with Beta-distributed common noise.

Dynamics mix a point mass at the chosen action with a noise-perturbed
copy of the population law; the reward penalizes being on the crowded
side.
"""

from dataclasses import dataclass

import numpy as np

from ..model import MfgModel


@dataclass(frozen=True)
class TwoStateParams:
    alpha: float = 1.75  # Beta concentration of the noise law
    eta: float = 0.75    # probability weight of the population-level force
    horizon: int = 30

    def __post_init__(self):
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if not 0.0 <= self.eta <= 1.0:
            raise ValueError("eta must lie in [0, 1]")
        if self.horizon < 1:
            raise ValueError("horizon must be positive")


def perturbed_mass(e0, rho1, rho0):
    """Mass on state 1 of the noise-perturbed population law.

    [e0 rho](1) = e0 rho(1) / (e0 rho(1) + (1-e0) rho(0)), with the
    degenerate-noise convention [0 rho](1) = 0 and [1 rho](1) = 1.
    """
    e0 = np.asarray(e0, dtype=float)
    denom = e0 * rho1 + (1.0 - e0) * rho0
    safe = denom > 0
    pert = np.where(safe, e0 * rho1 / np.where(safe, denom, 1.0), 0.0)
    return np.where(e0 <= 0.0, 0.0, np.where(e0 >= 1.0, 1.0, pert))


def two_state_model(p: TwoStateParams) -> MfgModel:
    eta = p.eta

    def transition_matrices(rhos, e0s):
        rhos = np.asarray(rhos, dtype=float)
        s = rhos.shape[0]
        pert = perturbed_mass(e0s, rhos[:, 1], rhos[:, 0])  # (S,)
        P = np.empty((s, 2, 2, 2))
        # transition is state-independent: (1-eta) delta_a + eta [e0 rho]
        P[:, :, 0, 1] = (eta * pert)[:, None]
        P[:, :, 1, 1] = (1.0 - eta + eta * pert)[:, None]
        P[..., 0] = 1.0 - P[..., 1]
        return P

    def reward_matrices(rhos):
        rhos = np.asarray(rhos, dtype=float)
        return np.repeat(-rhos[:, :, None], 2, axis=2)

    def sample_noise_batch(rng, size):
        return rng.beta(p.alpha, p.alpha, size=size)

    return MfgModel(
        name="two_state",
        n_states=2,
        n_actions=2,
        horizon=p.horizon,
        rho0=np.array([0.5, 0.5]),
        transition_matrices=transition_matrices,
        reward_matrices=reward_matrices,
        sample_noise_batch=sample_noise_batch,
        rho_dependent_kernel=True,
        params=p,
    )
