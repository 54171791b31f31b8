import numpy as np

from mfgil.mlp import (Mlp, encode_inputs, forward_np, init_mlp, input_dim)


def test_init_shapes_and_dtype(rng):
    net = init_mlp([5, 8, 3], rng)
    assert net.widths == [5, 8, 3]
    assert net.dtype == np.float64
    net32 = init_mlp([5, 8, 3], rng, dtype=np.float32)
    assert net32.dtype == np.float32
    for w, b in net32.layers:
        assert w.dtype == np.float32 and b.dtype == np.float32
    assert np.allclose([b.sum() for _, b in net.layers], 0.0)


def test_forward_rows_are_distributions(rng):
    net = init_mlp([4, 6, 3], rng)
    out = forward_np(net, rng.normal(size=(10, 4)))
    assert out.shape == (10, 3)
    assert np.all(out > 0)
    assert np.allclose(out.sum(axis=1), 1.0, atol=1e-12)


def test_copy_is_deep(rng):
    net = init_mlp([3, 4, 2], rng)
    clone = net.copy()
    clone.layers[0][0][...] = 0.0
    assert not np.allclose(net.layers[0][0], 0.0)


def test_flat_arrays_round_trip(rng):
    net = init_mlp([3, 4, 2], rng)
    back = Mlp.from_flat_arrays(net.flat_arrays())
    for (w1, b1), (w2, b2) in zip(net.layers, back.layers):
        assert np.array_equal(w1, w2)
        assert np.array_equal(b1, b2)


def test_input_dim():
    assert input_dim(4, adaptive=False) == 5
    assert input_dim(4, adaptive=True) == 9


def test_encode_inputs_layout(rng):
    rhos = rng.dirichlet(np.ones(3), size=2)
    enc = encode_inputs(2, 8, rhos, 3, adaptive=True)
    assert enc.shape == (6, 7)
    # row (s, x) = s*X + x: one-hot state, normalized time, mean field
    for s in range(2):
        for x in range(3):
            row = enc[s * 3 + x]
            assert np.array_equal(row[:3], np.eye(3)[x])
            assert row[3] == 2 / 8
            assert np.allclose(row[4:], rhos[s])
    vanilla = encode_inputs(2, 8, rhos, 3, adaptive=False)
    assert vanilla.shape == (6, 4)
