"""Decision rules: tabular, grid-interpolated, kernel, parametric, mixture.

Every policy exposes ``action_probs(t, rhos)`` mapping a batch of mean
fields (S, X) to action laws (S, X, A); population-unaware policies
simply ignore the mean-field argument.
"""

from dataclasses import dataclass

import numpy as np

from .mlp import Mlp, encode_inputs, forward_np
from .simplex import check_simplex


class Policy:
    n_actions: int

    def action_probs(self, t, rhos):
        raise NotImplementedError

    def eval(self, t, x, rho):
        """Action law at one (time, state, mean field) query."""
        rho = np.asarray(rho, dtype=float)
        return self.action_probs(t, rho[None])[0, x]


@dataclass
class UniformPolicy(Policy):
    n_states: int
    n_actions: int

    def action_probs(self, t, rhos):
        s = np.asarray(rhos).shape[0]
        return np.full((s, self.n_states, self.n_actions), 1.0 / self.n_actions)


class VanillaTabular(Policy):
    """Per (time, state) action table; unaware of the mean field."""

    def __init__(self, table):
        self.table = np.asarray(table, dtype=float)  # (H, X, A)
        self.horizon, self.n_states, self.n_actions = self.table.shape

    def action_probs(self, t, rhos):
        s = np.asarray(rhos).shape[0]
        return np.broadcast_to(self.table[t], (s, self.n_states, self.n_actions)).copy()


class AdaptiveGrid(Policy):
    """Tabulated on a 1-D mean-field grid (two-state environments).

    Queries interpolate linearly in rho(1); convex combinations of
    simplex rows stay simplex rows, so no renormalization is needed.
    """

    def __init__(self, grid, table):
        self.grid = np.asarray(grid, dtype=float)  # (G,) increasing rho(1) values
        self.table = np.asarray(table, dtype=float)  # (H, X, G, A)
        self.horizon, self.n_states, _, self.n_actions = self.table.shape
        if self.n_states != 2:
            raise ValueError("AdaptiveGrid supports two-state models only")

    def action_probs(self, t, rhos):
        r1 = np.clip(np.asarray(rhos, dtype=float)[:, 1], self.grid[0], self.grid[-1])
        idx = np.clip(np.searchsorted(self.grid, r1, side="right") - 1,
                      0, len(self.grid) - 2)
        w = (r1 - self.grid[idx]) / (self.grid[idx + 1] - self.grid[idx])
        lo = self.table[t][:, idx, :]   # (X, S, A)
        hi = self.table[t][:, idx + 1, :]
        out = (1.0 - w)[None, :, None] * lo + w[None, :, None] * hi
        return np.transpose(out, (1, 0, 2))


class KernelNW(Policy):
    """Nadaraya-Watson regression of action laws on empirical mean fields."""

    def __init__(self, fields, counts, bandwidth):
        self.fields = np.asarray(fields, dtype=float)  # (H, N, X)
        self.counts = np.asarray(counts, dtype=float)  # (H, X, A, N)
        self.bandwidth = float(bandwidth)
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")
        self.horizon, self.n_states, self.n_actions, _ = self.counts.shape

    def action_probs(self, t, rhos):
        rhos = np.asarray(rhos, dtype=float)
        d2 = ((self.fields[t][None, :, :] - rhos[:, None, :]) ** 2).sum(axis=2)
        w = np.exp(-d2 / (2.0 * self.bandwidth**2))  # (S, N)
        num = np.einsum("xan,sn->sxa", self.counts[t], w)
        denom = num.sum(axis=2, keepdims=True)
        uniform = 1.0 / self.n_actions
        return np.where(denom > 0, num / np.where(denom > 0, denom, 1.0), uniform)


class ParametricMlp(Policy):
    """MLP-backed policy; the adaptive variant feeds the mean field in."""

    def __init__(self, net: Mlp, horizon, n_states, n_actions, adaptive):
        self.net = net
        self.horizon = horizon
        self.n_states = n_states
        self.n_actions = n_actions
        self.adaptive = adaptive

    def action_probs(self, t, rhos):
        rhos = np.asarray(rhos, dtype=float)
        inputs = encode_inputs(t, self.horizon, rhos, self.n_states, self.adaptive)
        probs = forward_np(self.net, inputs)
        return probs.reshape(rhos.shape[0], self.n_states, self.n_actions)


class MixturePolicy(Policy):
    """Explicit convex combination of policies, evaluated lazily."""

    def __init__(self, components):
        self.components = [(float(w), p) for w, p in components]
        total = sum(w for w, _ in self.components)
        if abs(total - 1.0) > 1e-12:
            raise ValueError(f"mixture weights sum to {total}, expected 1")
        self.n_actions = self.components[0][1].n_actions
        self.n_states = self.components[0][1].n_states

    def action_probs(self, t, rhos):
        out = None
        for w, p in self.components:
            term = w * p.action_probs(t, rhos)
            out = term if out is None else out + term
        return out


def uniform_mixture(policies):
    n = len(policies)
    return MixturePolicy([(1.0 / n, p) for p in policies])


def random_tabular(horizon, n_states, n_actions, rng):
    """Random vanilla policy with Dirichlet rows; test utility."""
    table = rng.dirichlet(np.ones(n_actions), size=(horizon, n_states))
    return VanillaTabular(table)
