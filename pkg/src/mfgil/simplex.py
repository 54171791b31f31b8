"""Probability-vector helpers shared by every module."""

import numpy as np

MASS_ATOL = 1e-9
RENORM_THRESHOLD = 1e-12
ABORT_THRESHOLD = 1e-6


class SimplexError(ValueError):
    """A vector that should be a probability distribution is not one."""


def is_simplex(w, atol=MASS_ATOL):
    w = np.asarray(w, dtype=float)
    return bool(np.all(w >= -atol) and abs(w.sum() - 1.0) <= atol)


def check_simplex(w, atol=MASS_ATOL, name="distribution"):
    w = np.asarray(w, dtype=float)
    if np.any(w < -atol):
        raise SimplexError(f"{name} has negative entries: min={w.min()}")
    if abs(w.sum() - 1.0) > atol:
        raise SimplexError(f"{name} mass {w.sum()} deviates from 1 beyond {atol}")
    return w


def renormalize(w, name="distribution"):
    """Renormalize a near-probability vector; abort loudly on a broken kernel.

    Mass drift below RENORM_THRESHOLD is left untouched, drift up to
    ABORT_THRESHOLD is renormalized, anything larger raises.
    Works on arrays whose last axis is the distribution axis.
    """
    w = np.asarray(w, dtype=float)
    mass = w.sum(axis=-1, keepdims=True)
    drift = np.abs(mass - 1.0)
    if np.any(drift > ABORT_THRESHOLD):
        raise SimplexError(
            f"{name} mass drifted by {drift.max()} (> {ABORT_THRESHOLD}); "
            "transition kernel looks broken"
        )
    if np.any(drift > RENORM_THRESHOLD):
        w = w / mass
    return w


def uniform(n):
    return np.full(n, 1.0 / n)
