"""scikit-learn style front end for mode-diagram clustering."""

from __future__ import annotations

import time

import numpy as np
from scipy.spatial import cKDTree
from sklearn.base import BaseEstimator, ClusterMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .clusterer import ClusterResult, assign_clusters
from .delta import compute_delta
from .density import auto_bandwidth, fixed_bandwidth, kde_self
from .diagram import bootstrap_diagram, build_diagram, density_floor as floor_value, trim_low_density
from .points import PointSet
from .robustfit import FitError, ThresholdFunction, fit_robust, select_modes

__all__ = ["ModeDiagramClustering"]


class ModeDiagramClustering(ClusterMixin, BaseEstimator):
    """Density-peak clustering with a robust log-log threshold.

    Each point is linked to its nearest neighbour of higher kernel density.
    Points whose link distance is a large positive outlier of the robust
    regression of ``log delta`` on ``log density`` become modes; every other
    point inherits the cluster of its link.

    Parameters
    ----------
    bandwidth : "auto" or float, default="auto"
        Kernel bandwidth. ``"auto"`` uses ``c0 * sigma * n**(-1/(d+6))``
        with ``sigma`` the mean marginal standard deviation.
    c0 : float, default=1.0
        Constant of the automatic bandwidth.
    M : float, default=3.0
        Outlier multiplier on the residual scale.
    robust : {"huber", "theil-sen"}, default="huber"
    scale : {"mad", "classic"}, default="mad"
        Residual scale used in the threshold.
    density_floor : bool, default=False
        Drop points with density below ``n**(-1/(d+2))`` from the
        regression and the mode candidates. They are still labelled.
    L : float or None, default=None
        Link distance given to the density maximum; the dataset diameter
        when None.
    bootstrap : int or None, default=None
        When set, build the diagram from this many draws of the kernel
        estimate; data points then take the label of their nearest draw.
    seed : int, default=0
        Seed for the bootstrap draws.
    delta_method : {"indexed", "bruteforce"}, default="indexed"
    threads : int, default=1

    Attributes
    ----------
    labels_ : ndarray of shape (n_samples,)
    modes_ : ndarray
        Indices of the selected modes, ordered by decreasing density. Under
        ``bootstrap`` they index ``diagram_.points``.
    n_clusters_ : int
    bandwidth_ : Bandwidth
    density_ : DensityEstimate
    delta_table_ : DeltaTable
    diagram_ : ModeDiagram
    fit_ : RobustFit
    threshold_ : ThresholdFunction
    timings_ : dict
        Wall time per stage in milliseconds.
    """

    def __init__(
        self,
        bandwidth="auto",
        c0=1.0,
        M=3.0,
        robust="huber",
        scale="mad",
        density_floor=False,
        L=None,
        bootstrap=None,
        seed=0,
        delta_method="indexed",
        threads=1,
    ):
        self.bandwidth = bandwidth
        self.c0 = c0
        self.M = M
        self.robust = robust
        self.scale = scale
        self.density_floor = density_floor
        self.L = L
        self.bootstrap = bootstrap
        self.seed = seed
        self.delta_method = delta_method
        self.threads = threads

    def _bandwidth(self, ps):
        if self.bandwidth == "auto":
            return auto_bandwidth(ps, self.c0)
        return fixed_bandwidth(float(self.bandwidth))

    def fit(self, X, y=None):
        X = check_array(X, dtype=np.float64, ensure_min_samples=2)
        ps = PointSet(X)
        timings = {}
        clock = time.perf_counter()

        def lap(name):
            nonlocal clock
            now = time.perf_counter()
            timings[name] = (now - clock) * 1000.0
            clock = now

        self.bandwidth_ = self._bandwidth(ps)
        self.density_ = kde_self(ps, self.bandwidth_, threads=self.threads)
        lap("density")
        if self.bootstrap:
            dia = bootstrap_diagram(ps, self.bandwidth_, int(self.bootstrap), seed=self.seed,
                                    L=self.L, threads=self.threads)
            dt = dia.delta_table
        else:
            dt = compute_delta(ps, self.density_, L=self.L, method=self.delta_method, threads=self.threads)
            dia = build_diagram(self.density_, dt, points=ps)
        lap("delta")
        if self.density_floor:
            dia = trim_low_density(dia, dia.n_total, ps.d)
            if len(dia) < 3:
                raise FitError(
                    f"density floor {floor_value(dia.n_total, ps.d):.4g} left {len(dia)} points; "
                    "need at least 3 for the fit"
                )
        self.fit_ = fit_robust(dia, method=self.robust, scale=self.scale)
        self.threshold_ = ThresholdFunction(self.fit_, self.M)
        modes = select_modes(dia, self.threshold_)
        lap("fit")
        meta = {
            "bandwidth": self.bandwidth_.h,
            "M": float(self.M),
            "method": self.robust,
            "seed": int(self.seed),
            "L": dt.L,
        }
        result = assign_clusters(dt, modes, trimmed=dia.trimmed, meta=meta)
        if self.bootstrap:
            _, nearest = cKDTree(dia.points.coords).query(X, k=1)
            result = ClusterResult(labels=result.labels[nearest], modes=result.modes, meta=meta)
        lap("assign")
        self.delta_table_ = dt
        self.diagram_ = dia
        self.result_ = result
        self.labels_ = result.labels
        self.modes_ = result.modes
        self.n_clusters_ = result.n_clusters
        self.timings_ = timings
        self.n_features_in_ = ps.d
        return self

    def residuals(self):
        """Log-space residuals of the retained diagram entries."""
        check_is_fitted(self, "fit_")
        return self.fit_.residuals(self.diagram_.log_density, self.diagram_.log_delta)
