"""Mean-field propagation, state-action laws, values, exploitability."""

from dataclasses import dataclass

import numpy as np

from .model import FlowTrajectory
from .simplex import check_simplex, renormalize


def _check_dims(vec, model, name):
    vec = np.asarray(vec, dtype=float)
    if vec.shape[-1] != model.n_states:
        raise ValueError(f"{name} has dimension {vec.shape[-1]}, "
                         f"model expects {model.n_states}")
    return vec


def step_batch(agents, policy, pops, e0s, t, model):
    """Propagate a batch of agent distributions one step.

    agents, pops: (S, X); e0s: noise batch. Returns (S, X).
    """
    P = model.transition_matrices(pops, e0s)
    pi = policy.action_probs(t, pops)
    out = np.einsum("sx,sxa,sxay->sy", agents, pi, P)
    return renormalize(out, name="mean-field step output")


def mean_field_step(prev_agent, policy, pop, e0, t, model):
    """Single-sample version of the propagation operator."""
    prev_agent = _check_dims(prev_agent, model, "prev_agent")
    pop = _check_dims(pop, model, "pop")
    e0s = np.asarray(e0)[None]
    return step_batch(prev_agent[None], policy, pop[None], e0s, t, model)[0]


def population_flow_batch(policy, noises, model):
    """Population flows for a batch of noise paths: (S, H, X)."""
    s = noises.shape[0]
    fields = np.empty((s, model.horizon, model.n_states))
    fields[:, 0] = model.rho0
    for t in range(model.horizon - 1):
        fields[:, t + 1] = step_batch(fields[:, t], policy, fields[:, t],
                                      noises[:, t], t, model)
    return fields


def deviation_flow_batch(pop_policy, dev_policy, noises, model):
    """Population and single-deviator flows under shared noise paths."""
    s = noises.shape[0]
    pop = np.empty((s, model.horizon, model.n_states))
    dev = np.empty_like(pop)
    pop[:, 0] = model.rho0
    dev[:, 0] = model.rho0
    for t in range(model.horizon - 1):
        pop[:, t + 1] = step_batch(pop[:, t], pop_policy, pop[:, t],
                                   noises[:, t], t, model)
        dev[:, t + 1] = step_batch(dev[:, t], dev_policy, pop[:, t],
                                   noises[:, t], t, model)
    return pop, dev


def population_flow(policy, noise, model):
    noise = np.asarray(noise)
    if noise.shape[0] != model.horizon - 1:
        raise ValueError("noise path length must equal horizon - 1")
    fields = population_flow_batch(policy, noise[None], model)[0]
    return FlowTrajectory(noise=noise, fields=fields)


def deviation_flow(pop_policy, dev_policy, noise, model):
    noise = np.asarray(noise)
    if noise.shape[0] != model.horizon - 1:
        raise ValueError("noise path length must equal horizon - 1")
    pop, dev = deviation_flow_batch(pop_policy, dev_policy, noise[None], model)
    return FlowTrajectory(noise=noise, fields=pop[0], deviation_fields=dev[0])


def state_action_dist(flow, dev_policy, t):
    """Joint law of (state, action) for the deviator at time t: (X, A)."""
    agent = flow.deviation_fields if flow.deviation_fields is not None else flow.fields
    pi = dev_policy.action_probs(t, flow.fields[t][None])[0]
    return agent[t][:, None] * pi


def path_values(dev_policy, pop_policy, model, noises):
    """Per-path cumulative rewards of the deviator: (S,).

    The conditional expectation given each noise path is computed exactly
    from the flows; randomness enters only through the paths.
    """
    pop, dev = deviation_flow_batch(pop_policy, dev_policy, noises, model)
    vals = np.zeros(noises.shape[0])
    for t in range(model.horizon):
        r = model.reward_matrices(pop[:, t])
        pi = dev_policy.action_probs(t, pop[:, t])
        mu = dev[:, t][:, :, None] * pi
        vals += (mu * r).sum(axis=(1, 2))
    return vals


def value(dev_policy, pop_policy, model, n_mc, rng):
    """Monte-Carlo value over noise paths; returns (mean, standard error)."""
    noises = model.sample_noise_paths(rng, n_mc)
    vals = path_values(dev_policy, pop_policy, model, noises)
    se = vals.std(ddof=1) / np.sqrt(n_mc) if n_mc > 1 else 0.0
    return float(vals.mean()), float(se)


@dataclass
class ExploitabilityResult:
    value: float      # clamped at 0
    raw: float        # unclamped Monte-Carlo estimate
    se: float
    v_br: float
    v_self: float


def exploitability(policy, model, br_solver, n_mc, rng):
    """Best-response gain against the policy's own flow, clamped below at 0.

    Shared noise paths are used for both value estimates to reduce the
    variance of the difference.
    """
    br = br_solver(policy)
    noises = model.sample_noise_paths(rng, n_mc)
    v_br = path_values(br, policy, model, noises)
    v_self = path_values(policy, policy, model, noises)
    diff = v_br - v_self
    raw = float(diff.mean())
    se = float(diff.std(ddof=1) / np.sqrt(n_mc)) if n_mc > 1 else 0.0
    return ExploitabilityResult(value=max(raw, 0.0), raw=raw, se=se,
                                v_br=float(v_br.mean()), v_self=float(v_self.mean()))
