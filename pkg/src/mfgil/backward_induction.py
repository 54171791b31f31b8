"""Grid-based best response and damped fixed-point iteration (two-state).

The mean-field space is discretized on a uniform rho(1) grid; values are
linearly interpolated between grid points. The continuation value uses
the proper per-agent expectation over next states and noise draws, with
one shared noise batch per time step.
"""

from dataclasses import dataclass

import numpy as np

from .kernels import bi_sweep
from .policies import AdaptiveGrid


@dataclass(frozen=True)
class MeanFieldGrid:
    """Uniform discretization of the two-state simplex by rho(1)."""

    rho1: np.ndarray

    @classmethod
    def uniform(cls, n_points):
        return cls(np.linspace(0.0, 1.0, n_points))

    @property
    def points(self):
        return np.stack([1.0 - self.rho1, self.rho1], axis=1)  # (G, 2)

    def __post_init__(self):
        if len(self.rho1) < 2:
            raise ValueError("grid needs at least two points")
        steps = np.diff(self.rho1)
        if not np.allclose(steps, steps[0]):
            raise ValueError("grid must be uniform")


def backward_induction_br(pop_policy, model, grid, mc_batch, rng):
    """Deterministic grid best response against a fixed population policy.

    Returns (policy, values) where values[t, x, g] is the optimal
    continuation value from (t, x, grid point g).
    """
    if model.name != "two_state":
        raise ValueError("grid backward induction is two-state only")
    eta = model.params.eta
    h = model.horizon
    g_n = len(grid.rho1)
    rhos = grid.points
    values = np.zeros((h, 2, g_n))
    table = np.zeros((h, 2, g_n, 2))
    v_next = np.zeros((2, g_n))
    for t in range(h - 1, -1, -1):
        r = model.reward_matrices(rhos)  # (G, 2, 2)
        if t < h - 1:
            e0 = model.sample_noise_batch(rng, mc_batch)
            pi_pop = pop_policy.action_probs(t, rhos)  # (G, 2, 2)
            cont = bi_sweep(grid.rho1, pi_pop[:, :, 1], e0, eta, v_next)  # (G, 2)
            q = r + cont[:, None, :]
        else:
            q = r
        best = q.argmax(axis=2)  # ties to the smallest action index
        values[t] = q.max(axis=2).T
        table[t] = 0.0
        gi, xi = np.meshgrid(np.arange(g_n), np.arange(2), indexing="ij")
        table[t, xi, gi, best[gi, xi]] = 1.0
        v_next = values[t]
    return AdaptiveGrid(grid.rho1, table), values


def tabulate_policy(policy, model, grid):
    """Snapshot any policy onto the grid as an AdaptiveGrid table."""
    h = model.horizon
    rhos = grid.points
    table = np.empty((h, 2, len(grid.rho1), policy.n_actions))
    for t in range(h):
        table[t] = np.transpose(policy.action_probs(t, rhos), (1, 0, 2))
    return AdaptiveGrid(grid.rho1, table)


def mann_iteration(model, init, gammas, grid, mc_batch, rng, callback=None):
    """Damped best-response iteration, flattened on the grid each step.

    Both operands live on the same grid, so the convex combination of
    tables is exact, not a re-tabulation. callback(k, policy) is invoked
    after each iteration for convergence logging.
    """
    current = tabulate_policy(init, model, grid)
    for k, gamma in enumerate(gammas):
        br, _ = backward_induction_br(current, model, grid, mc_batch, rng)
        mixed = (1.0 - gamma) * current.table + gamma * br.table
        current = AdaptiveGrid(grid.rho1, mixed)
        if callback is not None:
            callback(k, current)
    return current
