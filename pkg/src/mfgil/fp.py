"""Fictitious play with common noise, neural best response, and the
distillation of a policy sequence into a single deployable policy."""

from dataclasses import dataclass, field
from typing import List

import numpy as np

from .flows import population_flow_batch
from .losses import l1_flow_loss_and_grad, value_loss_and_grad
from .mlp import init_mlp, input_dim
from .optim import AdamState, adam_step
from .policies import ParametricMlp, Policy


@dataclass
class FpState:
    """The policy tuple produced by fictitious play."""

    policies: List[Policy]

    @property
    def iterations(self):
        return len(self.policies) - 1


def aggregate_flow_batch(policies, noises, model):
    """Uniform average of the population flows of a policy tuple: (S, H, X)."""
    acc = None
    for p in policies:
        fields = population_flow_batch(p, noises, model)
        acc = fields if acc is None else acc + fields
    return acc / len(policies)


def _make_net(model, adaptive, hidden, rng, init_net, dtype):
    if init_net is not None:
        return init_net.copy()
    widths = [input_dim(model.n_states, adaptive), *hidden, model.n_actions]
    return init_mlp(widths, rng, dtype=dtype)


def _train(loss_fn, target_policies, model, iters, batch, lr, rng, *,
           adaptive, hidden, init_net, noise_pool, cosine, dtype,
           entropy=0.0):
    """Shared training loop for value maximization and flow matching.

    With noise_pool > 0, a pool of noise paths and their aggregate target
    flows is precomputed once and minibatches are drawn from it;
    noise_pool = 0 resamples fresh paths (and recomputes the aggregate)
    every iteration. entropy sets the initial coefficient of an entropy
    bonus (value loss only) that anneals linearly to zero over training.
    """
    net = _make_net(model, adaptive, hidden, rng, init_net, dtype)
    state = AdamState(lr=lr, cosine_total=iters if cosine else None)
    losses = np.empty(iters)
    cache_p = noise_pool and loss_fn is value_loss_and_grad
    if noise_pool:
        pool_noises = model.sample_noise_paths(rng, noise_pool)
        pool_fields = aggregate_flow_batch(target_policies, pool_noises, model)
        if cache_p:
            # the value loss rolls out against frozen pool fields, so the
            # kernels it sees are fixed per path; build them once
            pool_p = np.stack(
                [model.transition_matrices(pool_fields[:, t], pool_noises[:, t])
                 for t in range(model.horizon - 1)]).astype(dtype)
    for j in range(iters):
        extra = {}
        if noise_pool:
            idx = rng.choice(noise_pool, size=min(batch, noise_pool), replace=False)
            noises, fields = pool_noises[idx], pool_fields[idx]
            if cache_p:
                extra["transitions"] = pool_p[:, idx]
        else:
            noises = model.sample_noise_paths(rng, batch)
            fields = aggregate_flow_batch(target_policies, noises, model)
        if entropy:
            extra["entropy"] = entropy * (1.0 - j / iters)
        loss, grads = loss_fn(net, fields, noises, model, adaptive=adaptive,
                              **extra)
        adam_step(net, grads, state)
        losses[j] = loss
    policy = ParametricMlp(net, model.horizon, model.n_states, model.n_actions,
                           adaptive)
    return policy, losses


def nn_best_response(target_policies, model, iters, batch, lr, rng, *,
                     adaptive=True, hidden=(64, 64), init_net=None,
                     noise_pool=0, dtype=np.float32, entropy=0.0):
    """Train a parametric best response to the aggregate flow of a tuple.

    entropy > 0 adds an entropy bonus with that initial coefficient,
    annealed linearly to zero; useful when near-deterministic dynamics
    make plain policy gradients collapse onto a suboptimal vertex.
    """
    return _train(value_loss_and_grad, list(target_policies), model, iters,
                  batch, lr, rng, adaptive=adaptive, hidden=hidden,
                  init_net=init_net, noise_pool=noise_pool, cosine=False,
                  dtype=dtype, entropy=entropy)


def mf_il_distill(fp, model, iters, batch, lr, rng, *, adaptive=True,
                  hidden=(64, 64), init_net=None, noise_pool=0,
                  cosine=False, dtype=np.float32):
    """Distill a policy tuple into one policy whose own flow matches the
    tuple's aggregate flow (L1, per sampled noise path)."""
    policies = fp.policies if isinstance(fp, FpState) else list(fp)
    return _train(l1_flow_loss_and_grad, policies, model, iters, batch, lr,
                  rng, adaptive=adaptive, hidden=hidden, init_net=init_net,
                  noise_pool=noise_pool, cosine=cosine, dtype=dtype)


def fictitious_play(model, init_policy, n_iterations, rng, *, br_iters,
                    br_batch, br_lr, hidden=(64, 64), noise_pool=0,
                    callback=None):
    """Iteratively best-respond to the running average of past flows.

    Returns the full policy tuple (pi^0, ..., pi^K). callback(k, state)
    runs after each iteration for convergence logging.
    """
    state = FpState([init_policy])
    for k in range(1, n_iterations + 1):
        br, losses = nn_best_response(state.policies, model, br_iters,
                                      br_batch, br_lr, rng, hidden=hidden,
                                      noise_pool=noise_pool)
        if not np.all(np.isfinite(losses)):
            raise FloatingPointError(f"best-response training diverged at "
                                     f"fictitious-play iteration {k}")
        state.policies.append(br)
        if callback is not None:
            callback(k, state)
    return state
