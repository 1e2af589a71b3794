"""Gaussian mean shift, kept as a baseline for the link-based assignment."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array

from .clusterer import ClusterResult
from .density import Bandwidth, auto_bandwidth, fixed_bandwidth, kde_many
from .points import DataError, PointSet, diameter

__all__ = ["MeanShiftConfig", "MeanShiftClustering", "mean_shift_step", "mean_shift_cluster"]


@dataclass(frozen=True)
class MeanShiftConfig:
    """Iteration settings. ``None`` fields take data-dependent defaults:
    ``step_tol = 1e-7 * L`` and ``merge_radius = h / 2``."""

    bandwidth: Bandwidth
    step_tol: float | None = None
    max_iter: int = 500
    merge_radius: float | None = None

    def resolve(self, ps: PointSet) -> "MeanShiftConfig":
        step_tol = self.step_tol
        if step_tol is None:
            step_tol = 1e-7 * max(diameter(ps), np.finfo(float).tiny)
        merge = self.bandwidth.h / 2 if self.merge_radius is None else self.merge_radius
        if not (step_tol > 0 and merge > 0 and self.max_iter > 0):
            raise ValueError("mean shift settings must all be positive")
        return MeanShiftConfig(self.bandwidth, float(step_tol), int(self.max_iter), float(merge))


def _shift(X, h, Y):
    """One step for every row of ``Y``; rows whose weights all underflow stay put."""
    w = np.exp(-0.5 * cdist(Y, X, "sqeuclidean") / (h * h))
    total = w.sum(axis=1)
    stuck = total == 0
    out = Y.copy()
    ok = ~stuck
    out[ok] = (w[ok] @ X) / total[ok, None]
    return out, stuck


def mean_shift_step(x, ps, bw: Bandwidth, return_flag: bool = False):
    """Kernel-weighted mean of the sample around ``x``.

    With ``return_flag`` the result is ``(point, stuck)``; ``stuck`` is true
    when every weight underflowed and ``x`` came back unchanged.
    """
    ps = PointSet.coerce(ps)
    x = np.asarray(x, dtype=np.float64).reshape(1, ps.d)
    if not np.all(np.isfinite(x)):
        raise DataError("non-finite starting point")
    out, stuck = _shift(ps.coords, bw.h, x)
    if return_flag:
        return out[0], bool(stuck[0])
    return out[0]


def _components(points, radius):
    pairs = cKDTree(points).query_pairs(radius, output_type="ndarray")
    m = len(points)
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    return connected_components(graph, directed=False)[1]


def mean_shift_cluster(ps, cfg: MeanShiftConfig) -> ClusterResult:
    """Run mean shift from every sample point and merge the endpoints.

    Endpoints closer than ``merge_radius`` are chained together (single
    linkage). Points that hit ``max_iter`` without converging take the
    cluster of the nearest converged endpoint. Clusters are numbered by
    decreasing estimated density at their mode.
    """
    ps = PointSet.coerce(ps)
    if ps.n < 2:
        raise DataError("mean shift clustering needs at least 2 points")
    cfg = cfg.resolve(ps)
    X = ps.coords
    h = cfg.bandwidth.h
    Y = X.copy()
    active = np.arange(ps.n)
    converged = np.zeros(ps.n, dtype=bool)
    stuck = np.zeros(ps.n, dtype=bool)
    iters = np.zeros(ps.n, dtype=np.int64)
    for _ in range(cfg.max_iter):
        if len(active) == 0:
            break
        new, flag = _shift(X, h, Y[active])
        step = np.sqrt(((new - Y[active]) ** 2).sum(axis=1))
        Y[active] = new
        iters[active] += 1
        stuck[active[flag]] = True
        done = (step < cfg.step_tol) | flag
        converged[active[done & ~flag]] = True
        active = active[~done]

    ok = np.flatnonzero(converged)
    if len(ok) == 0:
        ok = np.arange(ps.n)
    comp = _components(Y[ok], cfg.merge_radius)
    labels = np.full(ps.n, -1, dtype=np.int64)
    labels[ok] = comp
    rest = np.setdiff1d(np.arange(ps.n), ok)
    if len(rest):
        _, near = cKDTree(Y[ok]).query(Y[rest], k=1)
        labels[rest] = comp[near]

    # representative per component: endpoint with the highest density,
    # ties to the lowest index
    end_density = kde_many(ps, cfg.bandwidth, Y[ok])
    n_comp = comp.max() + 1
    modes = np.empty(n_comp, dtype=np.int64)
    best = np.empty(n_comp)
    for c in range(n_comp):
        members = np.flatnonzero(comp == c)
        top = members[np.argmax(end_density[members])]
        modes[c] = ok[top]
        best[c] = end_density[top]
    relabel = np.lexsort((modes, -best))
    new_id = np.empty(n_comp, dtype=np.int64)
    new_id[relabel] = np.arange(n_comp)
    labels = new_id[labels]
    modes = modes[relabel]
    meta = {
        "bandwidth": h,
        "method": "mean-shift",
        "step_tol": cfg.step_tol,
        "merge_radius": cfg.merge_radius,
        "max_iter": cfg.max_iter,
        "n_not_converged": int((~converged).sum()),
        "n_stuck": int(stuck.sum()),
        "mode_points": Y[modes].tolist(),
    }
    result = ClusterResult(labels=labels, modes=modes, meta=meta)
    object.__setattr__(result, "endpoints", Y)
    object.__setattr__(result, "converged", converged)
    object.__setattr__(result, "iterations", iters)
    return result


class MeanShiftClustering(ClusterMixin, BaseEstimator):
    """Gaussian mean-shift clustering.

    Parameters
    ----------
    bandwidth : "auto" or float, default="auto"
    c0 : float, default=1.0
    step_tol : float or None, default=None
        Convergence threshold on the step length; ``1e-7 * diameter`` if None.
    max_iter : int, default=500
    merge_radius : float or None, default=None
        Single-linkage radius for endpoints; ``h / 2`` if None.
    """

    def __init__(self, bandwidth="auto", c0=1.0, step_tol=None, max_iter=500, merge_radius=None):
        self.bandwidth = bandwidth
        self.c0 = c0
        self.step_tol = step_tol
        self.max_iter = max_iter
        self.merge_radius = merge_radius

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        ps = PointSet(X)
        if self.bandwidth == "auto":
            self.bandwidth_ = auto_bandwidth(ps, self.c0)
        else:
            self.bandwidth_ = fixed_bandwidth(float(self.bandwidth))
        cfg = MeanShiftConfig(self.bandwidth_, self.step_tol, self.max_iter, self.merge_radius)
        self.result_ = mean_shift_cluster(ps, cfg)
        self.labels_ = self.result_.labels
        self.modes_ = self.result_.modes
        self.cluster_centers_ = self.result_.endpoints[self.modes_]
        self.n_clusters_ = self.result_.n_clusters
        self.n_features_in_ = ps.d
        return self
