"""Synthetic expert demonstration datasets.

A dataset holds N independent trajectories: each records the common
noise path, M agents' state-action pairs per step, the empirical mean
field with denominator M, and the exact expert field the agents were
coupled to.
"""

import csv
from dataclasses import dataclass

import numpy as np

from .checkpoint import load_arrays, save_arrays
from .particles import simulate_agents_batch


@dataclass
class ExpertDataset:
    env_name: str
    noises: np.ndarray            # (N, H-1, ...)
    states: np.ndarray            # (N, H, M) int
    actions: np.ndarray           # (N, H, M) int
    empirical_fields: np.ndarray  # (N, H, X)
    exact_fields: np.ndarray      # (N, H, X)
    n_states: int
    n_actions: int

    @property
    def n_trajectories(self):
        return self.states.shape[0]

    @property
    def horizon(self):
        return self.states.shape[1]

    @property
    def n_agents(self):
        return self.states.shape[2]

    def validate(self):
        m = self.n_agents
        if (self.states < 0).any() or (self.states >= self.n_states).any():
            raise ValueError("dataset contains out-of-range states")
        if (self.actions < 0).any() or (self.actions >= self.n_actions).any():
            raise ValueError("dataset contains out-of-range actions")
        for name, fields in (("empirical fields", self.empirical_fields),
                             ("exact fields", self.exact_fields)):
            if np.any(fields < -1e-9):
                raise ValueError(f"{name} have negative entries")
            if not np.allclose(fields.sum(axis=-1), 1.0, atol=1e-9):
                raise ValueError(f"{name} rows do not sum to one")
        scaled = self.empirical_fields * m
        if not np.allclose(scaled, np.round(scaled), atol=1e-9):
            raise ValueError("empirical fields are not multiples of 1/M")


def generate_dataset(expert, model, n_traj, m_agents, rng):
    """Simulate n_traj expert trajectories of m_agents each.

    Agents transition conditionally on the exact population flow of
    their own trajectory, so every agent's marginal is the flow itself.
    """
    if n_traj < 1 or m_agents < 1:
        raise ValueError("n_traj and m_agents must be positive")
    noises = model.sample_noise_paths(rng, n_traj)
    states, actions, empirical, exact = simulate_agents_batch(
        expert, model, noises, m_agents, rng)
    return ExpertDataset(env_name=model.name, noises=noises, states=states,
                         actions=actions, empirical_fields=empirical,
                         exact_fields=exact, n_states=model.n_states,
                         n_actions=model.n_actions)


def save_dataset(path, ds):
    save_arrays(path, {
        "noises": ds.noises,
        "states": ds.states,
        "actions": ds.actions,
        "empirical_fields": ds.empirical_fields,
        "exact_fields": ds.exact_fields,
    }, meta={"env_name": ds.env_name, "n_states": ds.n_states,
             "n_actions": ds.n_actions})


def load_dataset(path):
    arrays, meta = load_arrays(path)
    return ExpertDataset(env_name=meta["env_name"],
                         n_states=meta["n_states"],
                         n_actions=meta["n_actions"], **arrays)


def export_csv(path, ds):
    """Row-per-observation export for inspection: n, t, m, state, action."""
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["trajectory", "t", "agent", "state", "action"])
        n, h, m = ds.states.shape
        for i in range(n):
            for t in range(h):
                for j in range(m):
                    w.writerow([i, t, j, int(ds.states[i, t, j]),
                                int(ds.actions[i, t, j])])
