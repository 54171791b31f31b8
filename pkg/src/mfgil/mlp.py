"""Small ReLU multilayer perceptron with a softmax action head."""

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np

from .autodiff import Tensor, affine, as_tensor


@dataclass
class Mlp:
    """Weights and biases, input->hidden...->output, softmax over actions."""

    layers: List[Tuple[np.ndarray, np.ndarray]]

    @property
    def dtype(self):
        return self.layers[0][0].dtype

    @property
    def widths(self):
        ws = [self.layers[0][0].shape[0]]
        ws += [w.shape[1] for w, _ in self.layers]
        return ws

    def copy(self):
        return Mlp([(w.copy(), b.copy()) for w, b in self.layers])

    def flat_arrays(self):
        out = {}
        for i, (w, b) in enumerate(self.layers):
            out[f"w{i}"] = w
            out[f"b{i}"] = b
        return out

    @classmethod
    def from_flat_arrays(cls, arrays):
        layers = []
        i = 0
        while f"w{i}" in arrays:
            layers.append((arrays[f"w{i}"], arrays[f"b{i}"]))
            i += 1
        return cls(layers)


def init_mlp(widths, rng, dtype=np.float64):
    """He-uniform weights for ReLU layers, zero biases.

    float32 roughly halves training cost and is plenty for the policy
    heads; gradient-check tests use the float64 default.
    """
    layers = []
    for fan_in, fan_out in zip(widths[:-1], widths[1:]):
        bound = np.sqrt(6.0 / fan_in)
        w = rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype)
        layers.append((w, np.zeros(fan_out, dtype=dtype)))
    return Mlp(layers)


def forward_np(net, inputs):
    """Action probabilities for a batch of encoded inputs, (B, A)."""
    h = np.asarray(inputs, dtype=float)
    for w, b in net.layers[:-1]:
        h = np.maximum(h @ w + b, 0.0)
    w, b = net.layers[-1]
    z = h @ w + b
    z -= z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def forward_tape(param_tensors, inputs):
    """Tape version of forward_np; param_tensors mirrors Mlp.layers."""
    h = as_tensor(inputs)
    for w, b in param_tensors[:-1]:
        h = affine(h, w, b, relu=True)
    w, b = param_tensors[-1]
    return affine(h, w, b).softmax_rows()


def param_tensors(net):
    return [(Tensor(w, requires_grad=True), Tensor(b, requires_grad=True))
            for w, b in net.layers]


def collect_grads(tensors):
    grads = []
    for w, b in tensors:
        gw = w.grad if w.grad is not None else np.zeros_like(w.data)
        gb = b.grad if b.grad is not None else np.zeros_like(b.data)
        grads.append((gw, gb))
    return grads


def input_dim(n_states, adaptive):
    """one-hot state + normalized time (+ mean field when adaptive)."""
    return n_states + 1 + (n_states if adaptive else 0)


def encode_inputs(t, horizon, rhos, n_states, adaptive):
    """Encoded rows for all states under each mean field in the batch.

    rhos: (S, X). Returns (S*X, d) with rows ordered path-major: the row
    for (path s, state x) is s * X + x.
    """
    rhos = np.asarray(rhos, dtype=float)
    s = rhos.shape[0]
    eye = np.eye(n_states)
    onehot = np.tile(eye, (s, 1))
    tcol = np.full((s * n_states, 1), t / horizon)
    if not adaptive:
        return np.concatenate([onehot, tcol], axis=1)
    return np.concatenate([onehot, tcol, np.repeat(rhos, n_states, axis=0)], axis=1)
