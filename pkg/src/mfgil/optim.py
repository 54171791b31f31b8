"""Bias-corrected Adam over (weight, bias) layer lists."""

from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np


class NonFiniteGradient(FloatingPointError):
    pass


@dataclass
class AdamState:
    lr: float
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: Optional[List] = None
    v: Optional[List] = None
    # optional cosine-annealing schedule: lr(j) = lr * (1 + cos(pi*j/total)) / 2
    cosine_total: Optional[int] = None

    def current_lr(self):
        if self.cosine_total is None:
            return self.lr
        return self.lr * (1.0 + np.cos(np.pi * self.step / self.cosine_total)) / 2.0


def adam_step(net, grads, state):
    """One in-place Adam update on net.layers; returns (net, state)."""
    if state.m is None:
        state.m = [(np.zeros_like(w), np.zeros_like(b)) for w, b in net.layers]
        state.v = [(np.zeros_like(w), np.zeros_like(b)) for w, b in net.layers]
    for gw, gb in grads:
        if not (np.all(np.isfinite(gw)) and np.all(np.isfinite(gb))):
            raise NonFiniteGradient("non-finite gradient in adam_step")
    lr = state.current_lr()
    state.step += 1
    t = state.step
    b1, b2, eps = state.beta1, state.beta2, state.eps
    for i, ((w, b), (gw, gb)) in enumerate(zip(net.layers, grads)):
        mw, mb = state.m[i]
        vw, vb = state.v[i]
        mw[...] = b1 * mw + (1 - b1) * gw
        mb[...] = b1 * mb + (1 - b1) * gb
        vw[...] = b2 * vw + (1 - b2) * gw**2
        vb[...] = b2 * vb + (1 - b2) * gb**2
        corr1 = 1 - b1**t
        corr2 = 1 - b2**t
        w -= lr * (mw / corr1) / (np.sqrt(vw / corr2) + eps)
        b -= lr * (mb / corr1) / (np.sqrt(vb / corr2) + eps)
    return net, state
