"""Differentiable training objectives for parametric policies.

All three losses roll or score the network on the tape and return the
scalar loss with parameter-shaped gradients.
"""

import numpy as np

from .autodiff import (Tensor, concat_cols, flow_step, rollout_value,
                       two_state_flow_step)
from .mlp import collect_grads, encode_inputs, forward_tape, param_tensors


class NonFiniteLoss(FloatingPointError):
    def __init__(self, batch_index):
        super().__init__(f"non-finite loss contribution at batch index {batch_index}")
        self.batch_index = batch_index


def _finalize(loss, tensors, per_path=None):
    if not np.isfinite(loss.data):
        bad = 0
        if per_path is not None:
            finite = np.isfinite(per_path)
            bad = int(np.argmin(finite)) if not finite.all() else 0
        raise NonFiniteLoss(bad)
    loss.backward()
    return float(loss.data), collect_grads(tensors)


def value_loss_and_grad(net, target_fields, noises, model, adaptive=True,
                        transitions=None, entropy=0.0):
    """Negative batch-mean value of the learner against frozen target flows.

    target_fields: (B, H, X) aggregate mean fields; noises: (B, H-1, ...)
    the paths that generated them. The learner's own flow responds to the
    frozen fields, and the gradient flows through that recursion; reward
    arguments in the targets are constants. transitions, if given, is
    anything indexable by t yielding the (B, X, A, X) kernels for the
    batch (a cache of model.transition_matrices over the same fields
    and noises). entropy > 0 subtracts that multiple of the mean policy
    entropy from the loss, which keeps action laws off the simplex
    vertices (and the learner's occupancy positive) while it is active.
    """
    b, h, x_dim = target_fields.shape
    a_dim = model.n_actions
    dt = net.dtype
    tensors = param_tensors(net)
    # inputs depend only on the frozen targets, so all time steps share
    # one forward pass
    inputs = np.concatenate(
        [encode_inputs(t, h, target_fields[:, t], x_dim, adaptive)
         for t in range(h)], axis=0).astype(dt)
    pi_all = forward_tape(tensors, inputs)
    rewards = model.reward_matrices(
        target_fields.transpose(1, 0, 2).reshape(h * b, x_dim)
    ).reshape(h, b, x_dim, a_dim).astype(dt)
    if transitions is None:
        transitions = [model.transition_matrices(target_fields[:, t],
                                                 noises[:, t])
                       for t in range(h - 1)]
    rho0 = np.tile(model.rho0, (b, 1)).astype(dt)
    total, track = rollout_value(pi_all, rho0, rewards, transitions)
    loss = total * (-1.0 / b)
    if entropy:
        loss = loss + pi_all.xlogx().sum() * (entropy / b)
    return _finalize(loss, tensors, per_path=track)


def _self_consistent_step(rho, pi, e0s, model):
    if not model.rho_dependent_kernel:
        P = model.transition_matrices(rho.data, e0s)
        return flow_step(rho, pi, P)
    if model.name == "two_state":
        return two_state_flow_step(rho, pi, e0s, model.params.eta)
    raise NotImplementedError(
        f"no differentiable kernel for environment {model.name!r}")


def l1_flow_loss_and_grad(net, target_fields, noises, model, adaptive=True):
    """Mean total L1 gap between the learner's own flow and target flows.

    The learner's flow is self-consistent: the policy is fed (and the
    kernel conditioned on) the evolving flow itself, which therefore
    stays on the tape.
    """
    b, h, x_dim = target_fields.shape
    a_dim = model.n_actions
    dt = net.dtype
    tensors = param_tensors(net)
    target_fields = target_fields.astype(dt)
    rho = Tensor(np.tile(model.rho0, (b, 1)).astype(dt))
    total = None
    track = np.zeros(b)
    for t in range(h):
        gap = (rho - target_fields[:, t]).abs().sum()
        total = gap if total is None else total + gap
        track += np.abs(rho.data - target_fields[:, t]).sum(axis=1)
        if t < h - 1:
            if adaptive:
                const_part = encode_inputs(t, h, np.zeros((b, x_dim)), x_dim,
                                           adaptive=False).astype(dt)
                inputs = concat_cols([Tensor(const_part), rho.repeat_rows(x_dim)])
            else:
                inputs = encode_inputs(t, h, rho.data, x_dim,
                                       adaptive=False).astype(dt)
            pi = forward_tape(tensors, inputs).reshape(b, x_dim, a_dim)
            rho = _self_consistent_step(rho, pi, noises[:, t], model)
    loss = total * (1.0 / b)
    return _finalize(loss, tensors, per_path=track)


def bc_loss_and_grad(net, inputs, targets, weights=None):
    """Weighted L1 between network outputs and empirical action laws.

    inputs: (B, d) encoded queries; targets: (B, A) simplex rows;
    weights default to 1/B each.
    """
    b = inputs.shape[0]
    if weights is None:
        weights = np.full(b, 1.0 / b)
    tensors = param_tensors(net)
    pi = forward_tape(tensors, np.asarray(inputs).astype(net.dtype))
    targets = np.asarray(targets).astype(net.dtype)
    loss = ((pi - targets).abs().sum(axis=1) * weights).sum()
    return _finalize(loss, tensors)
