"""Environment contract and flow containers."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .simplex import check_simplex


@dataclass(frozen=True)
class MfgModel:
    """A finite-state game with common noise.

    Batched callables are the primary interface; ``rhos`` always has shape
    (S, n_states) and noise batches have shape (S,) or (S, n_states)
    depending on the environment's noise payload.

    transition_matrices(rhos, e0s) -> (S, X, A, X) next-state laws
    reward_matrices(rhos) -> (S, X, A)
    sample_noise_batch(rng, size) -> noise payload batch
    """

    name: str
    n_states: int
    n_actions: int
    horizon: int
    rho0: np.ndarray
    transition_matrices: Callable
    reward_matrices: Callable
    sample_noise_batch: Callable
    rho_dependent_kernel: bool = False
    params: object = None

    def __post_init__(self):
        check_simplex(self.rho0, name="rho0")
        if len(self.rho0) != self.n_states:
            raise ValueError("rho0 length does not match n_states")

    # scalar conveniences, used by tests and small-scale probes
    def transition(self, x, a, rho, e0):
        rho = np.asarray(rho, dtype=float)
        P = self.transition_matrices(rho[None], self._noise_batch_of_one(e0))
        return P[0, x, a]

    def reward(self, x, a, rho):
        rho = np.asarray(rho, dtype=float)
        return float(self.reward_matrices(rho[None])[0, x, a])

    def sample_noise(self, rng):
        return self.sample_noise_batch(rng, 1)[0]

    def sample_noise_path(self, rng):
        """One common-noise path of length horizon - 1 (steps 1..H-1)."""
        return self.sample_noise_batch(rng, self.horizon - 1)

    def sample_noise_paths(self, rng, n):
        """n independent paths, stacked on the leading axis."""
        batch = self.sample_noise_batch(rng, n * (self.horizon - 1))
        return batch.reshape((n, self.horizon - 1) + batch.shape[1:])

    def _noise_batch_of_one(self, e0):
        e0 = np.asarray(e0)
        return e0[None]


@dataclass
class FlowTrajectory:
    """A realized mean-field sequence with the noise path that produced it."""

    noise: np.ndarray
    fields: np.ndarray  # (H, X)
    deviation_fields: Optional[np.ndarray] = None  # (H, X)
