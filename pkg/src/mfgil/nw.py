"""Nadaraya-Watson imitation estimators over expert datasets.

The vanilla estimator is a plain conditional action-frequency table per
(t, x); the adaptive estimator kernel-weights the same counts by the
distance between the query mean field and each trajectory's observed
empirical field.
"""

from dataclasses import dataclass

import numpy as np

from .policies import KernelNW, VanillaTabular


@dataclass(frozen=True)
class KernelConfig:
    bandwidth: float = 0.05

    def __post_init__(self):
        if self.bandwidth <= 0:
            raise ValueError("bandwidth must be positive")


def _count_tensor(ds):
    """Per-trajectory state-action counts: (H, X, A, N)."""
    n, h, m = ds.states.shape
    x_dim, a_dim = ds.n_states, ds.n_actions
    # flatten (t, x, a, n) to one bincount
    idx = ((np.arange(h)[None, :, None] * x_dim + ds.states) * a_dim
           + ds.actions) * n + np.arange(n)[:, None, None]
    counts = np.bincount(idx.ravel(), minlength=h * x_dim * a_dim * n)
    return counts.reshape(h, x_dim, a_dim, n).astype(float)


def nw_vanilla(ds):
    """Empirical conditional action frequencies per (t, x).

    Unvisited (t, x) cells fall back to the uniform action law.
    """
    counts = _count_tensor(ds).sum(axis=3)  # (H, X, A)
    denom = counts.sum(axis=2, keepdims=True)
    uniform = 1.0 / ds.n_actions
    table = np.where(denom > 0, counts / np.where(denom > 0, denom, 1.0),
                     uniform)
    return VanillaTabular(table)


def nw_adaptive(ds, cfg=KernelConfig()):
    """Kernel regression of action laws on the empirical mean fields.

    The Gaussian weight exp(-||rho - rho'||^2 / 2h^2) compares the query
    field against each trajectory's empirical field at the same time
    step; a query with zero total weight on visited states returns the
    uniform law.
    """
    counts = _count_tensor(ds)  # (H, X, A, N)
    fields = np.transpose(ds.empirical_fields, (1, 0, 2))  # (H, N, X)
    return KernelNW(fields, counts, cfg.bandwidth)
