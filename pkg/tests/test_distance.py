import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hiercast.distance import dtw_distance, dtw_matrix, euclidean_matrix
from hiercast.errors import ArgumentError


def dtw_enumerate(x, y):
    """Exhaustive minimum over all monotone alignment paths (tiny inputs only)."""
    n, m = len(x), len(y)
    best = [np.inf]

    def walk(i, j, acc):
        acc = acc + abs(x[i] - y[j])
        if i == n - 1 and j == m - 1:
            best[0] = min(best[0], acc)
            return
        if i + 1 < n:
            walk(i + 1, j, acc)
        if j + 1 < m:
            walk(i, j + 1, acc)
        if i + 1 < n and j + 1 < m:
            walk(i + 1, j + 1, acc)

    walk(0, 0, 0.0)
    return best[0]


def test_euclidean_triangle():
    X = np.array([[0.0, 0.0], [3.0, 4.0]])
    np.testing.assert_allclose(euclidean_matrix(X), [[0, 5], [5, 0]])


def test_euclidean_identical_rows():
    X = np.tile([1.0, 2.0, 3.0], (3, 1))
    np.testing.assert_array_equal(euclidean_matrix(X), np.zeros((3, 3)))


def test_euclidean_brute_force():
    rng = np.random.default_rng(0)
    X = rng.normal(size=(5, 3))
    D = euclidean_matrix(X)
    for i in range(5):
        for j in range(5):
            assert D[i, j] == pytest.approx(np.sqrt(((X[i] - X[j]) ** 2).sum()), abs=1e-12)
    assert np.array_equal(D, D.T)
    np.testing.assert_array_equal(np.diag(D), 0.0)


def test_euclidean_triangle_inequality():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(8, 4))
    D = euclidean_matrix(X)
    for i in range(8):
        for j in range(8):
            for k in range(8):
                assert D[i, j] <= D[i, k] + D[k, j] + 1e-12


def test_dtw_trivial_and_oracle_examples():
    assert dtw_distance([1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0
    assert dtw_distance([0.0, 0.0, 1.0], [0.0, 1.0, 1.0]) == 0.0
    assert dtw_distance([1.0, 2.0, 3.0], [2.0, 3.0, 4.0]) == 2.0
    # same values through the enumeration oracle
    assert dtw_enumerate([0.0, 0.0, 1.0], [0.0, 1.0, 1.0]) == 0.0
    assert dtw_enumerate([1.0, 2.0, 3.0], [2.0, 3.0, 4.0]) == 2.0


def test_dtw_matches_enumeration_on_random_grid():
    rng = np.random.default_rng(2)
    for _ in range(60):
        x = rng.integers(-3, 4, rng.integers(1, 6)).astype(float)
        y = rng.integers(-3, 4, rng.integers(1, 6)).astype(float)
        assert dtw_distance(x, y) == dtw_enumerate(x, y)


def test_dtw_empty_input():
    with pytest.raises(ArgumentError):
        dtw_distance([], [1.0])


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.floats(-50, 50), min_size=1, max_size=12),
    st.lists(st.floats(-50, 50), min_size=1, max_size=12),
)
def test_dtw_symmetry(x, y):
    assert dtw_distance(x, y) == pytest.approx(dtw_distance(y, x), abs=1e-9)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(-50, 50), min_size=2, max_size=12))
def test_dtw_self_zero_and_l1_bound(x):
    assert dtw_distance(x, x) == 0.0
    y = [v + 1.0 for v in x]
    l1 = sum(abs(a - b) for a, b in zip(x, y))
    d = dtw_distance(x, y)
    assert 0.0 <= d <= l1 + 1e-9


def test_dtw_matrix_matches_pairwise():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(6, 10))
    D = dtw_matrix(X)
    for i in range(6):
        for j in range(6):
            assert D[i, j] == pytest.approx(dtw_distance(X[i], X[j]), abs=1e-12)
    assert np.array_equal(D, D.T)
