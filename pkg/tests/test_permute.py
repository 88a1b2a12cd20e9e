import numpy as np
import pytest

from hiercast.errors import ArgumentError
from hiercast.panel import Grouping
from hiercast.permute import twin, twin_batch

C = np.array([[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]])


def test_identity_permutation():
    g = Grouping(C)
    np.testing.assert_array_equal(twin(g, [0, 1, 2]).matrix, C)


def test_mechanical_column_shuffle():
    # new column j takes old column perm[j]
    g = Grouping(C)
    shuffled = twin(g, [2, 0, 1])
    np.testing.assert_array_equal(shuffled.matrix, [[0, 1, 1], [1, 0, 0]])


def test_structure_preserved():
    rng = np.random.default_rng(0)
    g = Grouping(np.array([[1.0, 1, 0, 0, 0], [0, 0, 1, 1, 1], [1, 0, 1, 0, 1]]))
    for _ in range(10):
        perm = rng.permutation(5)
        t = twin(g, perm)
        assert t.matrix.shape == g.matrix.shape
        assert sorted(t.matrix.sum(axis=1)) == sorted(g.matrix.sum(axis=1))
        assert t.matrix.sum() == g.matrix.sum()


def test_inverse_permutation_roundtrip():
    rng = np.random.default_rng(1)
    g = Grouping(np.array([[1.0, 0, 1, 0], [0, 1, 0, 1]]))
    perm = rng.permutation(4)
    inverse = np.argsort(perm)
    np.testing.assert_array_equal(twin(twin(g, perm), inverse).matrix, g.matrix)


def test_invalid_permutation():
    g = Grouping(C)
    with pytest.raises(ArgumentError):
        twin(g, [0, 0, 1])
    with pytest.raises(ArgumentError):
        twin(g, [0, 1])


def test_batch_determinism_and_count():
    g = Grouping(C)
    a = twin_batch(g, 100, seed=5)
    b = twin_batch(g, 100, seed=5)
    assert len(a) == 100
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x.matrix, y.matrix)
        assert sorted(x.matrix.sum(axis=1)) == sorted(g.matrix.sum(axis=1))
    c = twin_batch(g, 100, seed=6)
    assert any(not np.array_equal(x.matrix, y.matrix) for x, y in zip(a, c))


def test_batch_m2_swap():
    g = Grouping(np.array([[1.0, 0.0], [1.0, 1.0]]))
    # find a seed whose first draw is the non-identity permutation
    for seed in range(20):
        if not np.array_equal(np.random.default_rng(seed).permutation(2), [0, 1]):
            tw = twin_batch(g, 1, seed=seed)[0]
            np.testing.assert_array_equal(tw.matrix, [[0, 1], [1, 1]])
            break
    else:
        pytest.fail("no swapping seed found in 20 tries")


def test_batch_shared_permutation_across_groupings():
    g1 = Grouping(np.array([[1.0, 1, 0, 0]]))
    g2 = Grouping(np.array([[1.0, 0, 1, 0], [0, 1, 0, 1]]))
    out = twin_batch([g1, g2], 3, seed=2)
    assert len(out) == 3 and all(len(pair) == 2 for pair in out)
    singles1 = twin_batch(g1, 3, seed=2)
    for pair, single in zip(out, singles1):
        np.testing.assert_array_equal(pair[0].matrix, single.matrix)


def test_batch_count_validation():
    with pytest.raises(ArgumentError):
        twin_batch(Grouping(C), 0, seed=1)
