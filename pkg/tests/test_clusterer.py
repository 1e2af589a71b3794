import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from sklearn.metrics import adjusted_rand_score

from modediagram import ModeDiagramClustering
from modediagram.clusterer import adjusted_rand_index, assign_clusters, write_labels_csv
from modediagram.delta import compute_delta
from modediagram.points import DataError
from modediagram.synthgen import ShapeSpec, generate


def walk_to_mode(dt, modes, i):
    modes = set(modes)
    while i not in modes:
        i = dt.parent[i]
    return i


def test_single_mode_labels_everything_zero(rng):
    X = rng.normal(size=(50, 2))
    dt = compute_delta(X, rng.random(50))
    res = assign_clusters(dt, [dt.root])
    assert res.labels.tolist() == [0] * 50
    assert res.sizes() == [50]


def test_two_blobs_boundary(two_blobs_1d):
    X, y = two_blobs_1d
    est = ModeDiagramClustering().fit(X)
    assert est.n_clusters_ == 2
    assert adjusted_rand_index(est.labels_, y) >= 0.95
    left = est.labels_[X[:, 0] < 0]
    assert len(set(left.tolist())) == 1


def test_noise_absorbed_by_crescents():
    ds = generate(ShapeSpec("four-crescents", noise_n=200, seed=0))
    est = ModeDiagramClustering().fit(ds.X)
    assert est.n_clusters_ == 4
    core = ds.labels >= 0
    assert adjusted_rand_index(est.labels_[core], ds.labels[core]) >= 0.95
    noise = ~core
    assert np.all(est.labels_[noise] >= 0)
    # noise points sitting on a crescent take its label
    from scipy.spatial import cKDTree

    dist, near = cKDTree(ds.X[core]).query(ds.X[noise])
    close = dist < 0.1
    mapping = {t: np.bincount(est.labels_[core][ds.labels[core] == t]).argmax() for t in range(4)}
    expected = np.array([mapping[t] for t in ds.labels[core][near]])
    assert np.mean(est.labels_[noise][close] == expected[close]) >= 0.9


@settings(max_examples=40, deadline=None)
@given(st.integers(5, 80), st.integers(0, 2**31), st.integers(1, 5))
def test_assignment_invariants(n, seed, k):
    r = np.random.default_rng(seed)
    X = r.normal(size=(n, 2))
    dt = compute_delta(X, r.random(n))
    extra = r.choice(n, size=min(k, n), replace=False)
    modes = np.union1d(extra, [dt.root])
    res = assign_clusters(dt, modes)
    assert set(res.labels.tolist()) == set(range(len(modes)))
    for j, m in enumerate(res.modes):
        assert res.labels[m] == j
    for i in range(n):
        assert res.modes[res.labels[i]] == walk_to_mode(dt, modes, i)
    again = assign_clusters(dt, modes)
    np.testing.assert_array_equal(again.labels, res.labels)


def test_mode_on_another_modes_path_starts_own_cluster():
    X = np.array([[0.0], [1.0], [2.0], [3.0]])
    dt = compute_delta(X, np.array([4.0, 3.0, 2.0, 1.0]))
    res = assign_clusters(dt, [0, 2])
    assert res.labels.tolist() == [0, 0, 1, 1]


def test_assign_errors(rng):
    X = rng.normal(size=(10, 2))
    dt = compute_delta(X, rng.random(10))
    with pytest.raises(DataError):
        assign_clusters(dt, [])
    with pytest.raises(DataError):
        assign_clusters(dt, [dt.root, 10])
    other = (dt.root + 1) % 10
    with pytest.raises(DataError, match="maximum"):
        assign_clusters(dt, [other])
    with pytest.raises(DataError, match="trimmed"):
        assign_clusters(dt, [dt.root, other], trimmed=[other])


def test_ari_examples(rng):
    a = np.array([0, 0, 0, 1, 1, 1])
    assert adjusted_rand_index(a, a) == 1.0
    assert adjusted_rand_index(a, 5 - a) == 1.0
    b = np.array([0, 0, 1, 1, 2, 2])
    # pairs together in both: 2; row sums 3+3 -> 6; col sums 1+1+1 -> 3; C(6,2) = 15
    expected = (2 - 6 * 3 / 15) / ((6 + 3) / 2 - 6 * 3 / 15)
    assert adjusted_rand_index(a, b) == pytest.approx(expected, abs=1e-12)
    assert expected == pytest.approx(0.24242424242424243)
    for _ in range(20):
        x, y = rng.integers(0, 4, 40), rng.integers(0, 3, 40)
        assert adjusted_rand_index(x, y) == pytest.approx(adjusted_rand_score(x, y), abs=1e-12)
    with pytest.raises(DataError):
        adjusted_rand_index([0, 1], [0])


def test_labels_csv(rng):
    X = rng.normal(size=(5, 2))
    dt = compute_delta(X, np.arange(5.0))
    text = write_labels_csv(assign_clusters(dt, [dt.root]))
    assert text.splitlines()[0] == "index,label,is_mode"
    assert text.splitlines()[5] == "4,0,1"
