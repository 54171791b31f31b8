"""Finite-agent Monte-Carlo simulator, the oracle twin of the exact flows.

Agents transition conditionally on the exact population flow, so each
agent's marginal law at time t is exactly the deterministic flow field.
"""

import numpy as np

from .flows import population_flow_batch


def _sample_rows(probs, u):
    """Inverse-CDF sample per row: probs (M, K), u (M,) -> (M,) ints."""
    c = np.cumsum(probs, axis=1)
    return np.minimum((u[:, None] > c).sum(axis=1), probs.shape[1] - 1)


def simulate_agents(policy, model, noise, n_agents, rng, exact_fields=None):
    """Simulate n_agents i.i.d. agents along one noise path.

    Returns (states, actions, empirical_fields) with shapes
    (H, M), (H, M), (H, X).
    """
    if exact_fields is None:
        exact_fields = population_flow_batch(policy, np.asarray(noise)[None], model)[0]
    h, x_dim = model.horizon, model.n_states
    states = np.empty((h, n_agents), dtype=np.int64)
    actions = np.empty((h, n_agents), dtype=np.int64)
    states[0] = _sample_rows(np.tile(model.rho0, (n_agents, 1)), rng.random(n_agents))
    for t in range(h):
        probs = policy.action_probs(t, exact_fields[t][None])[0]  # (X, A)
        actions[t] = _sample_rows(probs[states[t]], rng.random(n_agents))
        if t < h - 1:
            P = model.transition_matrices(exact_fields[t][None],
                                          np.asarray(noise)[t][None])[0]
            rows = P[states[t], actions[t]]
            states[t + 1] = _sample_rows(rows, rng.random(n_agents))
    counts = np.zeros((h, x_dim))
    for t in range(h):
        np.add.at(counts[t], states[t], 1.0)
    return states, actions, counts / n_agents


def simulate_agents_batch(policy, model, noises, n_agents, rng,
                          exact_fields=None):
    """Simulate n_agents i.i.d. agents along each of S noise paths.

    Returns (states, actions, empirical_fields, exact_fields) with
    shapes (S, H, M), (S, H, M), (S, H, X), (S, H, X). As in
    simulate_agents, transitions condition on the exact flow fields.
    """
    noises = np.asarray(noises)
    if exact_fields is None:
        exact_fields = population_flow_batch(policy, noises, model)
    s, h, x_dim = exact_fields.shape
    m = n_agents
    rows = np.arange(s)[:, None]
    states = np.empty((s, h, m), dtype=np.int64)
    actions = np.empty((s, h, m), dtype=np.int64)
    init = np.tile(model.rho0, (s * m, 1))
    states[:, 0] = _sample_rows(init, rng.random(s * m)).reshape(s, m)
    for t in range(h):
        probs = policy.action_probs(t, exact_fields[:, t])  # (S, X, A)
        arows = probs[rows, states[:, t]].reshape(s * m, -1)
        actions[:, t] = _sample_rows(arows, rng.random(s * m)).reshape(s, m)
        if t < h - 1:
            P = model.transition_matrices(exact_fields[:, t], noises[:, t])
            trows = P[rows, states[:, t], actions[:, t]].reshape(s * m, -1)
            states[:, t + 1] = _sample_rows(trows, rng.random(s * m)).reshape(s, m)
    cell = (np.arange(s * h)[:, None] * x_dim).reshape(s, h, 1) + states
    counts = np.bincount(cell.ravel(), minlength=s * h * x_dim)
    counts = counts.reshape(s, h, x_dim).astype(float)
    return states, actions, counts / m, exact_fields


def particle_value(policy, model, noise, n_agents, rng, exact_fields=None):
    """Per-agent cumulative reward along one path; returns (mean, se)."""
    if exact_fields is None:
        exact_fields = population_flow_batch(policy, np.asarray(noise)[None], model)[0]
    states, actions, _ = simulate_agents(policy, model, noise, n_agents, rng,
                                         exact_fields)
    totals = np.zeros(n_agents)
    for t in range(model.horizon):
        r = model.reward_matrices(exact_fields[t][None])[0]
        totals += r[states[t], actions[t]]
    return float(totals.mean()), float(totals.std(ddof=1) / np.sqrt(n_agents))
