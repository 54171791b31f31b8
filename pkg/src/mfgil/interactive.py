"""Interactive imitation learning against a population of experts.

Each iteration simulates M expert agents on B fresh noise paths, forms
the empirical mean fields and empirical per-state strategies, and takes
one Adam step on the visit-weighted L1 behavioral-cloning loss. The
vanilla variant omits the mean-field input.
"""

import numpy as np

from .losses import bc_loss_and_grad
from .mlp import encode_inputs, init_mlp, input_dim
from .optim import AdamState, adam_step
from .particles import simulate_agents_batch
from .policies import ParametricMlp


def _empirical_strategies(states, actions, n_states, n_actions):
    """Counts per (path, t, x, a): (S, H, X, A)."""
    s, h, m = states.shape
    idx = ((np.arange(s * h)[:, None] * n_states).reshape(s, h, 1)
           + states) * n_actions + actions
    counts = np.bincount(idx.ravel(), minlength=s * h * n_states * n_actions)
    return counts.reshape(s, h, n_states, n_actions).astype(float)


def interactive_il(expert, model, adaptive, iters, batch, agents, lr, rng, *,
                   hidden=(64, 64), init_net=None, cosine=False,
                   dtype=np.float32):
    """Train a ParametricMlp imitator; returns (policy, loss history).

    The loss matches the paper's per-agent average: summing the per
    (path, t, x) L1 gaps weighted by visit counts / (B*M) reproduces
    1/(B*M) * sum over sampled agents. Unvisited states contribute no
    terms.
    """
    x_dim, a_dim = model.n_states, model.n_actions
    h = model.horizon
    if init_net is not None:
        net = init_net.copy()
    else:
        net = init_mlp([input_dim(x_dim, adaptive), *hidden, a_dim], rng,
                       dtype=dtype)
    state = AdamState(lr=lr, cosine_total=iters if cosine else None)
    losses = np.empty(iters)
    for j in range(iters):
        noises = model.sample_noise_paths(rng, batch)
        states, actions, emp_fields, _ = simulate_agents_batch(
            expert, model, noises, agents, rng)
        counts = _empirical_strategies(states, actions, x_dim, a_dim)
        visits = counts.sum(axis=3)  # (B, H, X)
        # rows ordered (t, path, x) to match encode_inputs stacking
        inputs = np.concatenate(
            [encode_inputs(t, h, emp_fields[:, t], x_dim, adaptive)
             for t in range(h)], axis=0)
        targets = np.transpose(counts, (1, 0, 2, 3)).reshape(-1, a_dim)
        weights = np.transpose(visits, (1, 0, 2)).ravel()
        mask = weights > 0
        targets = targets[mask] / weights[mask][:, None]
        loss, grads = bc_loss_and_grad(
            net, inputs[mask], targets,
            weights=weights[mask] / (batch * agents))
        adam_step(net, grads, state)
        losses[j] = loss
    return ParametricMlp(net, h, x_dim, a_dim, adaptive), losses
