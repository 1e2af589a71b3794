import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from modediagram.delta import (
    compute_delta, compute_delta_bruteforce, compute_delta_indexed, density_order,
)
from modediagram.density import auto_bandwidth, kde_self
from modediagram.points import DataError, PointSet, diameter


def scan_oracle(X, dens):
    """Sort by (density desc, index asc), then scan every earlier point."""
    n = len(X)
    order = sorted(range(n), key=lambda i: (-dens[i], i))
    parent = [-1] * n
    delta = [0.0] * n
    for pos in range(1, n):
        i = order[pos]
        best, arg = math.inf, -1
        for j in sorted(order[:pos]):
            acc = 0.0
            for k in range(X.shape[1]):
                diff = X[j, k] - X[i, k]
                acc += diff * diff
            dist = math.sqrt(acc)
            if dist < best:
                best, arg = dist, j
        parent[i], delta[i] = arg, best
    return order[0], parent, delta


def random_case(r, n, d, kind):
    X = r.normal(size=(n, d))
    if kind == "duplicates":
        X[r.integers(0, n, n // 3)] = X[r.integers(0, n, n // 3)]
    elif kind == "grid":
        X = np.round(X, 1)
    if kind == "tied":
        dens = np.round(r.random(n), 1)
    else:
        dens = kde_self(X, auto_bandwidth(X)).values
    return X, dens


def test_two_points():
    X = PointSet([[0.0, 0.0], [1.0, 0.0]])
    dt = compute_delta_bruteforce(X, np.array([0.2, 0.3]))
    assert dt.root == 1
    assert dt.parent.tolist() == [1, -1]
    assert dt.delta.tolist() == [1.0, 1.0]
    assert dt.L == 1.0
    assert compute_delta_indexed(X, np.array([0.2, 0.3])).same_as(dt)


def test_equal_densities_use_index_order(rng):
    X = rng.normal(size=(5, 2))
    dt = compute_delta_bruteforce(X, np.ones(5))
    assert dt.root == 0
    for i in range(1, 5):
        assert 0 <= dt.parent[i] < i


def test_density_order_total():
    assert density_order([0.5, 0.9, 0.5, 0.9]).tolist() == [1, 3, 0, 2]


@pytest.mark.parametrize("kind", ["plain", "duplicates", "tied", "grid"])
def test_bruteforce_matches_scan_oracle(kind):
    r = np.random.default_rng(hash(kind) % 2**32)
    X, dens = random_case(r, 300 if kind == "plain" else 120, 2, kind)
    root, parent, delta = scan_oracle(X, dens)
    dt = compute_delta_bruteforce(X, dens)
    assert dt.root == root
    assert dt.parent.tolist() == [-1 if i == root else p for i, p in enumerate(parent)]
    expected = np.array(delta)
    expected[root] = diameter(X)
    assert dt.delta.tobytes() == expected.tobytes()


@pytest.mark.parametrize("seed", range(12))
def test_indexed_matches_bruteforce(seed):
    r = np.random.default_rng(seed)
    kind = ["plain", "duplicates", "tied", "grid"][seed % 4]
    X, dens = random_case(r, int(r.integers(2, 400)), int(r.integers(1, 6)), kind)
    assert compute_delta_indexed(X, dens).same_as(compute_delta_bruteforce(X, dens))


def test_crafted_duplicates():
    X = np.array([[0.0, 0.0]] * 4 + [[1.0, 1.0]] * 3 + [[0.5, 0.5]])
    dens = np.array([0.3, 0.3, 0.1, 0.3, 0.2, 0.2, 0.2, 0.25])
    a = compute_delta_bruteforce(X, dens)
    b = compute_delta_indexed(X, dens)
    assert a.same_as(b)
    assert a.root == 0
    assert a.parent[1] == 0 and a.delta[1] == 0.0
    assert a.parent[3] == 0 and a.parent[2] == 0


def test_threads_are_deterministic(rng):
    X = rng.normal(size=(400, 3))
    dens = kde_self(X, auto_bandwidth(X)).values
    base = compute_delta_bruteforce(X, dens)
    assert compute_delta_bruteforce(X, dens, threads=3).same_as(base)
    assert compute_delta_indexed(X, dens, threads=3).same_as(base)


def test_custom_L(rng):
    X = rng.normal(size=(10, 2))
    dt = compute_delta(X, rng.random(10), L=42.0)
    assert dt.delta[dt.root] == 42.0
    with pytest.raises(ValueError):
        compute_delta(X, rng.random(10), L=-1.0)


def test_errors():
    with pytest.raises(DataError):
        compute_delta_bruteforce(PointSet([[0.0]]), np.array([1.0]))
    with pytest.raises(DataError):
        compute_delta_indexed(np.zeros((3, 1)) + [[0], [1], [2]], np.array([1.0, 2.0]))
    with pytest.raises(ValueError):
        compute_delta(np.eye(2), np.ones(2), method="magic")


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 60), st.integers(1, 4), st.integers(0, 2**31))
def test_table_invariants(n, d, seed):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, d))
    dens = r.random(n)
    dt = compute_delta_indexed(X, dens)
    L = diameter(X)
    rank = dt.rank()
    assert (dt.parent == -1).sum() == 1 and dt.parent[dt.root] == -1
    for i in range(n):
        if i == dt.root:
            assert dt.delta[i] == L
            continue
        p = dt.parent[i]
        assert rank[p] < rank[i]
        assert 0 < dt.delta[i] <= L
        # walking up terminates at the root with strictly improving rank
        j, steps = i, 0
        while dt.parent[j] != -1:
            assert rank[dt.parent[j]] < rank[j]
            j = dt.parent[j]
            steps += 1
            assert steps <= n
        assert j == dt.root


@settings(max_examples=30, deadline=None)
@given(st.integers(3, 80), st.integers(0, 2**31))
def test_permutation_robust(n, seed):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, 2))
    dens = r.permutation(n).astype(float) + 1.0  # all distinct
    perm = r.permutation(n)
    a = compute_delta_indexed(X, dens)
    b = compute_delta_indexed(X[perm], dens[perm])
    np.testing.assert_array_equal(b.delta, a.delta[perm])
