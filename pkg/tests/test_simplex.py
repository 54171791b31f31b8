import numpy as np
import pytest

from mfgil.simplex import (SimplexError, check_simplex, is_simplex,
                           renormalize, uniform)


def test_is_simplex():
    assert is_simplex([0.25, 0.75])
    assert is_simplex(uniform(7))
    assert not is_simplex([0.5, 0.6])
    assert not is_simplex([-0.1, 1.1])


def test_check_simplex_accepts_and_rejects():
    check_simplex(np.array([0.3, 0.7]))
    with pytest.raises(SimplexError):
        check_simplex(np.array([0.3, 0.8]))
    with pytest.raises(SimplexError):
        check_simplex(np.array([-0.2, 1.2]))


def test_renormalize_tiers():
    # drift below the renormalization threshold is left untouched
    w = np.array([0.5, 0.5 + 1e-14])
    assert renormalize(w) is w or np.array_equal(renormalize(w), w)
    # moderate drift is renormalized back to mass 1
    w = np.array([0.5, 0.5 + 1e-8])
    out = renormalize(w)
    assert abs(out.sum() - 1.0) < 1e-15
    # large drift aborts
    with pytest.raises(SimplexError):
        renormalize(np.array([0.5, 0.6]))


def test_renormalize_batched_last_axis():
    w = np.tile([0.25, 0.75 + 1e-8], (4, 1))
    out = renormalize(w)
    assert np.allclose(out.sum(axis=-1), 1.0, atol=1e-15)


def test_uniform():
    assert np.allclose(uniform(4), 0.25)
