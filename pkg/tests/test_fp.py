import numpy as np
import pytest

from mfgil.envs import build_env
from mfgil.flows import path_values, population_flow_batch
from mfgil.fp import (FpState, aggregate_flow_batch, fictitious_play,
                      mf_il_distill, nn_best_response)
from mfgil.policies import UniformPolicy, random_tabular
from mfgil.seeding import derive_rng


def test_aggregate_flow_of_identical_policies(rng):
    model = build_env("two_state", horizon=6)
    pol = random_tabular(6, 2, 2, rng)
    noises = model.sample_noise_paths(rng, 5)
    agg = aggregate_flow_batch([pol, pol, pol], noises, model)
    single = population_flow_batch(pol, noises, model)
    assert np.allclose(agg, single, atol=1e-12)


def test_fp_state_iterations():
    pols = [UniformPolicy(2, 2) for _ in range(4)]
    assert FpState(pols).iterations == 3


def test_nn_best_response_improves_on_uniform(rng):
    model = build_env("two_state", horizon=6)
    target = random_tabular(6, 2, 2, rng)
    br, losses = nn_best_response([target], model, 400, 32, 3e-3,
                                  derive_rng(0, "br"), noise_pool=64)
    noises = model.sample_noise_paths(derive_rng(0, "eval"), 200)
    v_br = path_values(br, target, model, noises).mean()
    v_uni = path_values(UniformPolicy(2, 2), target, model, noises).mean()
    assert np.all(np.isfinite(losses))
    assert v_br > v_uni


def test_mf_il_distill_loss_decreases(rng):
    model = build_env("two_state", horizon=6)
    pols = [random_tabular(6, 2, 2, rng) for _ in range(3)]
    _, losses = mf_il_distill(FpState(pols), model, 300, 32, 3e-3,
                              derive_rng(0, "distill"), noise_pool=64)
    assert losses[-50:].mean() < losses[:50].mean()


def test_fictitious_play_returns_tuple_and_calls_back(rng):
    model = build_env("two_state", horizon=5)
    seen = []
    fp = fictitious_play(model, UniformPolicy(2, 2), 2,
                         derive_rng(0, "fp"), br_iters=30, br_batch=16,
                         br_lr=1e-3, noise_pool=32,
                         callback=lambda k, s: seen.append(k))
    assert len(fp.policies) == 3
    assert isinstance(fp.policies[0], UniformPolicy)
    assert seen == [1, 2]


def test_noise_pool_minibatches_are_deterministic(rng):
    model = build_env("two_state", horizon=5)
    target = random_tabular(5, 2, 2, rng)
    a, la = nn_best_response([target], model, 50, 16, 1e-3,
                             derive_rng(9, "pool"), noise_pool=32)
    b, lb = nn_best_response([target], model, 50, 16, 1e-3,
                             derive_rng(9, "pool"), noise_pool=32)
    assert np.array_equal(la, lb)
    for (w1, _), (w2, _) in zip(a.net.layers, b.net.layers):
        assert np.array_equal(w1, w2)
