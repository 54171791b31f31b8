import numpy as np
import pytest

from mfgil.checkpoint import (CheckpointError, load_arrays, load_policy,
                              save_arrays, save_policy)
from mfgil.mlp import init_mlp
from mfgil.nw import nw_adaptive
from mfgil.datasets import generate_dataset
from mfgil.envs import build_env
from mfgil.policies import (AdaptiveGrid, MixturePolicy, ParametricMlp,
                            UniformPolicy, VanillaTabular, random_tabular)


def test_arrays_round_trip(tmp_path, rng):
    arrays = {"a": rng.normal(size=(3, 4)),
              "b": rng.integers(0, 9, size=(2, 2)).astype(np.int64),
              "c": rng.random(5).astype(np.float32)}
    path = tmp_path / "x.mfgc"
    save_arrays(path, arrays, meta={"tag": "test", "n": 3})
    back, meta = load_arrays(path)
    assert meta == {"tag": "test", "n": 3}
    for name, arr in arrays.items():
        assert back[name].dtype == arr.dtype
        assert np.array_equal(back[name], arr)


def test_bad_magic_rejected(tmp_path):
    path = tmp_path / "bad.mfgc"
    path.write_bytes(b"NOPE" + b"\x00" * 16)
    with pytest.raises(CheckpointError):
        load_arrays(path)


def test_save_is_byte_stable(tmp_path, rng):
    arrays = {"a": rng.normal(size=(3, 4))}
    p1, p2 = tmp_path / "a.mfgc", tmp_path / "b.mfgc"
    save_arrays(p1, arrays, meta={"k": 1})
    save_arrays(p2, arrays, meta={"k": 1})
    assert p1.read_bytes() == p2.read_bytes()


def _probs_equal(a, b, t, rhos):
    assert np.array_equal(a.action_probs(t, rhos), b.action_probs(t, rhos))


def test_policy_round_trips(tmp_path, rng):
    model = build_env("two_state", horizon=4)
    rhos = rng.dirichlet(np.ones(2), size=3)
    net = init_mlp([5, 8, 2], rng, dtype=np.float32)
    ds = generate_dataset(random_tabular(4, 2, 2, rng), model, 3, 5, rng)
    grid = np.linspace(0, 1, 5)
    policies = [
        VanillaTabular(rng.dirichlet(np.ones(2), size=(4, 2))),
        AdaptiveGrid(grid, rng.dirichlet(np.ones(2), size=(4, 2, 5))),
        nw_adaptive(ds),
        ParametricMlp(net, 4, 2, 2, True),
        UniformPolicy(2, 2),
    ]
    for i, pol in enumerate(policies):
        path = tmp_path / f"p{i}.mfgc"
        save_policy(path, pol, meta={"seed": 0})
        back, extra = load_policy(path)
        assert type(back) is type(pol)
        assert extra == {"seed": 0}
        _probs_equal(pol, back, 1, rhos)


def test_mixture_round_trip_including_nesting(tmp_path, rng):
    rhos = rng.dirichlet(np.ones(2), size=3)
    inner = MixturePolicy([(0.5, UniformPolicy(2, 2)),
                           (0.5, random_tabular(4, 2, 2, rng))])
    mix = MixturePolicy([(0.25, random_tabular(4, 2, 2, rng)),
                         (0.75, inner)])
    path = tmp_path / "mix.mfgc"
    save_policy(path, mix)
    back, _ = load_policy(path)
    assert isinstance(back, MixturePolicy)
    _probs_equal(mix, back, 2, rhos)


def test_unknown_policy_type_rejected(tmp_path):
    class Weird:
        pass
    with pytest.raises(CheckpointError):
        save_policy(tmp_path / "w.mfgc", Weird())


def test_parametric_mlp_preserves_dtype(tmp_path, rng):
    net = init_mlp([5, 4, 2], rng, dtype=np.float32)
    pol = ParametricMlp(net, 3, 2, 2, True)
    path = tmp_path / "mlp.mfgc"
    save_policy(path, pol)
    back, _ = load_policy(path)
    assert back.net.dtype == np.float32
    assert back.adaptive is True
