"""Gaussian kernel density estimation with a rate-scaled bandwidth."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .points import DataError, PointSet

__all__ = [
    "Bandwidth",
    "DensityEstimate",
    "GaussianKDE",
    "auto_bandwidth",
    "fixed_bandwidth",
    "bandwidth_rate",
    "kde_at",
    "kde_many",
    "kde_self",
]

# queries are evaluated in blocks of this size; the block size (not the
# worker count) fixes the floating point path
_QUERY_BLOCK = 256


@dataclass(frozen=True)
class Bandwidth:
    h: float
    rule: str = "fixed"  # "auto-rate" or "fixed"
    c0: float | None = None
    sigma: float | None = None

    def __post_init__(self):
        if not (np.isfinite(self.h) and self.h > 0):
            raise DataError(f"bandwidth must be positive and finite, got {self.h}")
        if self.rule not in ("auto-rate", "fixed"):
            raise ValueError(f"unknown bandwidth rule {self.rule!r}")


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    values: np.ndarray
    bandwidth: Bandwidth
    kernel: str = "gaussian"

    def __len__(self):
        return len(self.values)


def bandwidth_rate(n: int, d: int) -> float:
    """``n ** (-1 / (d + 6))``."""
    return float(n) ** (-1.0 / (d + 6))


def auto_bandwidth(ps, c0: float = 1.0) -> Bandwidth:
    """Bandwidth ``c0 * sigma * n**(-1/(d+6))``.

    ``sigma`` is the mean of the per-coordinate sample standard deviations.
    """
    ps = PointSet.coerce(ps)
    if c0 <= 0 or not np.isfinite(c0):
        raise ValueError(f"c0 must be positive, got {c0}")
    if ps.n < 2:
        raise DataError("automatic bandwidth needs at least 2 points")
    sigma = float(np.mean(np.std(ps.coords, axis=0, ddof=1)))
    if sigma <= 0:
        raise DataError("all points are identical; cannot scale a bandwidth")
    h = c0 * sigma * bandwidth_rate(ps.n, ps.d)
    return Bandwidth(h=h, rule="auto-rate", c0=c0, sigma=sigma)


def fixed_bandwidth(h: float) -> Bandwidth:
    return Bandwidth(h=float(h), rule="fixed")


def _log_kde_block(X, h, Q):
    n, d = X.shape
    sq = cdist(Q, X, "sqeuclidean")
    log_norm = -math.log(n) - d * math.log(h) - 0.5 * d * math.log(2 * math.pi)
    return logsumexp(-0.5 * sq / (h * h), axis=1) + log_norm


def kde_many(ps, bw: Bandwidth, queries, threads: int = 1, log: bool = False) -> np.ndarray:
    """Evaluate the estimator at every row of ``queries``."""
    ps = PointSet.coerce(ps)
    Q = np.asarray(queries, dtype=np.float64)
    if Q.ndim == 1:
        Q = Q.reshape(-1, ps.d) if ps.d > 1 else Q.reshape(-1, 1)
    if Q.shape[1] != ps.d:
        raise DataError(f"query dimension {Q.shape[1]} does not match data dimension {ps.d}")
    if not np.all(np.isfinite(Q)):
        raise DataError("non-finite query point")
    starts = range(0, Q.shape[0], _QUERY_BLOCK)

    def run(start):
        return _log_kde_block(ps.coords, bw.h, Q[start:start + _QUERY_BLOCK])

    if threads > 1 and len(starts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, starts))
    else:
        parts = [run(s) for s in starts]
    out = np.concatenate(parts) if parts else np.empty(0)
    return out if log else np.exp(out)


def kde_at(ps, bw: Bandwidth, query) -> float:
    """Gaussian kernel density estimate at a single point."""
    ps = PointSet.coerce(ps)
    q = np.asarray(query, dtype=np.float64).reshape(1, ps.d)
    return float(kde_many(ps, bw, q)[0])


def kde_self(ps, bw: Bandwidth, threads: int = 1) -> DensityEstimate:
    ps = PointSet.coerce(ps)
    return DensityEstimate(values=kde_many(ps, bw, ps.coords, threads=threads), bandwidth=bw)


class GaussianKDE(BaseEstimator):
    """Gaussian kernel density estimator.

    Parameters
    ----------
    bandwidth : "auto" or float, default="auto"
        ``"auto"`` uses ``c0 * sigma * n**(-1/(d+6))``.
    c0 : float, default=1.0
        Rate constant for the automatic bandwidth.
    """

    def __init__(self, bandwidth="auto", c0=1.0):
        self.bandwidth = bandwidth
        self.c0 = c0

    def fit(self, X, y=None):
        self.points_ = PointSet(X)
        if self.bandwidth == "auto":
            self.bandwidth_ = auto_bandwidth(self.points_, self.c0)
        else:
            self.bandwidth_ = fixed_bandwidth(float(self.bandwidth))
        self.n_features_in_ = self.points_.d
        return self

    def score_samples(self, X):
        """Log density at each row of ``X``."""
        check_is_fitted(self, "points_")
        return kde_many(self.points_, self.bandwidth_, X, log=True)

    def density(self, X):
        return np.exp(self.score_samples(X))
