"""Finite-state mean-field games with common noise: equilibrium solvers,
imitation learning, and evaluation metrics."""

__version__ = "0.1.0"
