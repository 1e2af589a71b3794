"""Distance from each point to its nearest neighbour of higher density.

Density ties are resolved by a total order: ``j`` ranks above ``i`` when
``dens[j] > dens[i]``, or when the densities are equal and ``j < i``.
Distance ties go to the smallest candidate index.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .density import DensityEstimate
from .points import DataError, PointSet, diameter, row_distances

__all__ = [
    "DeltaTable",
    "density_order",
    "compute_delta",
    "compute_delta_bruteforce",
    "compute_delta_indexed",
]

# relative slack between k-d tree distances and the exact column-wise ones
_TREE_SLACK = 1e-9
_K_STEPS = (16, 64)


@dataclass(frozen=True, eq=False)
class DeltaTable:
    """Nearest-higher-density distances and links.

    ``parent[i]`` is -1 only for ``root``, whose delta is ``L``.
    ``order`` lists indices from highest to lowest in the total order.
    """

    delta: np.ndarray
    parent: np.ndarray
    root: int
    L: float
    order: np.ndarray

    def __len__(self):
        return len(self.delta)

    def rank(self) -> np.ndarray:
        r = np.empty(len(self.order), dtype=np.int64)
        r[self.order] = np.arange(len(self.order))
        return r

    def same_as(self, other: "DeltaTable") -> bool:
        """Bit-exact equality of every field."""
        return (
            self.root == other.root
            and self.L == other.L
            and np.array_equal(self.parent, other.parent)
            and np.array_equal(self.order, other.order)
            and self.delta.tobytes() == other.delta.tobytes()
        )


def density_order(values) -> np.ndarray:
    """Indices sorted by decreasing density, ties by increasing index."""
    values = np.asarray(values, dtype=np.float64)
    return np.lexsort((np.arange(len(values)), -values))


def _prepare(ps, dens, L):
    ps = PointSet.coerce(ps)
    values = dens.values if isinstance(dens, DensityEstimate) else np.asarray(dens, dtype=np.float64)
    if values.shape != (ps.n,):
        raise DataError(f"density vector of length {values.shape} does not match {ps.n} points")
    if ps.n < 2:
        raise DataError("need at least 2 points to compute nearest-higher distances")
    if not np.all(np.isfinite(values)):
        raise DataError("non-finite density value")
    order = density_order(values)
    rank = np.empty(ps.n, dtype=np.int64)
    rank[order] = np.arange(ps.n)
    if L is None:
        L = diameter(ps)
    elif not L > 0:
        raise ValueError(f"L must be positive, got {L}")
    return ps, order, rank, float(L)


def _nearest_higher_brute(X, rank, i):
    cand = np.flatnonzero(rank < rank[i])
    dist = row_distances(X, cand, X[i])
    k = int(np.argmin(dist))
    return cand[k], dist[k]


def _finish(n, order, L, parent, delta):
    root = int(order[0])
    parent[root] = -1
    delta[root] = L
    return DeltaTable(delta=delta, parent=parent, root=root, L=L, order=order)


def compute_delta_bruteforce(ps, dens, L=None, threads: int = 1) -> DeltaTable:
    """Literal O(n^2) evaluation of the nearest-higher-density definition."""
    ps, order, rank, L = _prepare(ps, dens, L)
    X = ps.coords
    n = ps.n
    parent = np.empty(n, dtype=np.int64)
    delta = np.empty(n, dtype=np.float64)
    todo = order[1:]

    def run(chunk):
        for i in chunk:
            parent[i], delta[i] = _nearest_higher_brute(X, rank, i)

    chunks = np.array_split(todo, max(1, threads))
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(run, chunks))
    else:
        run(todo)
    return _finish(n, order, L, parent, delta)


def compute_delta_indexed(ps, dens, L=None, threads: int = 1) -> DeltaTable:
    """k-d tree accelerated path, bit-identical to the brute-force one.

    The tree only proposes candidates. A point is resolved once some
    higher-ranked neighbour is found strictly inside the queried radius;
    the winner is then re-measured with the exact distance routine.
    Unresolved points fall back to the brute-force scan.
    """
    ps, order, rank, L = _prepare(ps, dens, L)
    X = ps.coords
    n = ps.n
    parent = np.full(n, -2, dtype=np.int64)
    delta = np.empty(n, dtype=np.float64)
    tree = cKDTree(X)
    pending = order[1:]
    workers = max(1, threads)
    for k in _K_STEPS:
        if len(pending) == 0:
            break
        k = min(k, n)
        dist, idx = tree.query(X[pending], k=k, workers=workers)
        dist = dist.reshape(len(pending), k)
        idx = idx.reshape(len(pending), k)
        higher = rank[idx] < rank[pending][:, None]
        still = []
        for row, i in enumerate(pending):
            h = higher[row]
            if not h.any():
                if k == n:
                    raise AssertionError("no higher-ranked point found among all points")
                still.append(i)
                continue
            best = dist[row][h].min()
            window = best * (1 + _TREE_SLACK)
            if k < n and not dist[row, -1] > window:
                still.append(i)
                continue
            cand = idx[row][h & (dist[row] <= window)]
            exact = row_distances(X, cand, X[i])
            pick = np.lexsort((cand, exact))[0]
            parent[i] = cand[pick]
            delta[i] = exact[pick]
        pending = np.asarray(still, dtype=np.int64)
    for i in pending:
        parent[i], delta[i] = _nearest_higher_brute(X, rank, i)
    return _finish(n, order, L, parent, delta)


def compute_delta(ps, dens, L=None, method: str = "indexed", threads: int = 1) -> DeltaTable:
    if method == "indexed":
        return compute_delta_indexed(ps, dens, L=L, threads=threads)
    if method == "bruteforce":
        return compute_delta_bruteforce(ps, dens, L=L, threads=threads)
    raise ValueError(f"unknown delta method {method!r}")
