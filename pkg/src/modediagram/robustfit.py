"""Robust log-log regression of delta on density and mode selection."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .density import DensityEstimate
from .diagram import DELTA_FLOOR, ModeDiagram
from .points import DataError, PointSet, row_distances

__all__ = [
    "FitError",
    "RobustFit",
    "ThresholdFunction",
    "fit_robust",
    "fit_line",
    "select_modes",
    "mode_diagnostic",
    "fit_report",
]

HUBER_T = 1.345
MAD_CONSISTENCY = 1.4826
_THEIL_SEN_MAX_PAIRS = 4_000_000


class FitError(DataError):
    """The regression cannot be fitted on the given diagram."""


@dataclass(frozen=True)
class RobustFit:
    beta0: float
    beta1: float
    s: float
    method: str = "huber"
    iterations: int = 0
    scale: str = "mad"
    n_used: int = 0
    converged: bool = True

    def residuals(self, x, y) -> np.ndarray:
        return np.asarray(y) - (self.beta0 + self.beta1 * np.asarray(x))


@dataclass(frozen=True)
class ThresholdFunction:
    """``t(u) = exp(beta0 + M*s) * u**beta1``."""

    fit: RobustFit
    M: float = 3.0

    def __post_init__(self):
        if not self.M > 0:
            raise ValueError(f"M must be positive, got {self.M}")

    def __call__(self, u):
        return threshold_value(self, u)

    @property
    def margin(self) -> float:
        return self.M * self.fit.s

    def above_log(self, log_density, log_delta) -> np.ndarray:
        """Outlier test in log space; the single source of truth for selection."""
        return self.fit.residuals(log_density, log_delta) > self.margin

    def above(self, density, delta, L: float = 1.0) -> np.ndarray:
        """``delta > t(density)``, evaluated through the same log-space test."""
        density = np.asarray(density, dtype=np.float64)
        delta = np.asarray(delta, dtype=np.float64)
        return self.above_log(np.log(density), np.log(np.maximum(delta, DELTA_FLOOR * L)))


def threshold_value(tf: ThresholdFunction, u):
    u_arr = np.asarray(u, dtype=np.float64)
    if np.any(~(u_arr > 0)):
        raise ValueError("threshold function is only defined for positive densities")
    out = np.exp(tf.fit.beta0 + tf.M * tf.fit.s) * u_arr ** tf.fit.beta1
    return float(out) if out.ndim == 0 else out


def _scale(resid, kind, n_params=2):
    if kind == "mad":
        return MAD_CONSISTENCY * float(np.median(np.abs(resid)))
    if kind == "classic":
        dof = max(len(resid) - n_params, 1)
        return math.sqrt(float(resid @ resid) / dof)
    raise ValueError(f"unknown scale {kind!r}")


def _check_xy(x, y):
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise FitError("predictor and response must be 1D arrays of equal length")
    if len(x) < 3:
        raise FitError(f"need at least 3 points for a robust fit, got {len(x)}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise FitError("non-finite values in regression input")
    if np.ptp(x) == 0:
        raise FitError("predictor has zero variance")
    return x, y


def _wls(x, y, w):
    A = np.column_stack([np.ones_like(x), x])
    sw = np.sqrt(w)
    coef, *_ = np.linalg.lstsq(A * sw[:, None], y * sw, rcond=None)
    return coef


def _huber(x, y, max_iter, tol):
    coef = _wls(x, y, np.ones_like(x))
    it = 0
    converged = False
    for it in range(1, max_iter + 1):
        r = y - (coef[0] + coef[1] * x)
        s = MAD_CONSISTENCY * float(np.median(np.abs(r)))
        a = np.abs(r)
        if s > 0:
            u = a / s
            w = np.where(u <= HUBER_T, 1.0, HUBER_T / np.maximum(u, HUBER_T))
        else:
            # more than half the points sit exactly on the line
            w = (a == 0).astype(np.float64)
        new = _wls(x, y, w)
        step = float(np.max(np.abs(new - coef)))
        coef = new
        if step < tol:
            converged = True
            break
    return coef, it, converged


def _theil_sen(x, y):
    n = len(x)
    i, j = np.triu_indices(n, k=1)
    if len(i) > _THEIL_SEN_MAX_PAIRS:
        pick = np.random.default_rng(0).choice(len(i), _THEIL_SEN_MAX_PAIRS, replace=False)
        i, j = i[np.sort(pick)], j[np.sort(pick)]
    dx = x[j] - x[i]
    ok = dx != 0
    slope = float(np.median((y[j] - y[i])[ok] / dx[ok]))
    intercept = float(np.median(y - slope * x))
    return np.array([intercept, slope])


def fit_line(x, y, method: str = "huber", max_iter: int = 100, scale: str = "mad", tol: float = 1e-8) -> RobustFit:
    """Robust straight-line fit of ``y`` on ``x``.

    ``huber`` runs IRLS with tuning constant 1.345, rescaling by
    ``1.4826 * median(|r|)`` at every step. ``theil-sen`` takes the median
    pairwise slope. ``scale`` picks the reported residual scale: ``mad``
    (robust) or ``classic`` (root mean square with n - 2 dof).
    """
    x, y = _check_xy(x, y)
    if method == "huber":
        coef, iters, converged = _huber(x, y, max_iter, tol)
    elif method == "theil-sen":
        coef, iters, converged = _theil_sen(x, y), 0, True
    else:
        raise ValueError(f"unknown robust method {method!r}")
    resid = y - (coef[0] + coef[1] * x)
    if method == "theil-sen" and scale == "mad":
        s = MAD_CONSISTENCY * float(np.median(np.abs(resid - np.median(resid))))
    else:
        s = _scale(resid, scale)
    return RobustFit(
        beta0=float(coef[0]), beta1=float(coef[1]), s=s, method=method,
        iterations=iters, scale=scale, n_used=len(x), converged=converged,
    )


def fit_robust(dia: ModeDiagram, method: str = "huber", max_iter: int = 100, scale: str = "mad") -> RobustFit:
    """Fit ``log delta`` on ``log density`` over the retained diagram entries."""
    return fit_line(dia.log_density, dia.log_delta, method=method, max_iter=max_iter, scale=scale)


def select_modes(dia: ModeDiagram, tf: ThresholdFunction, force_root: bool = True) -> np.ndarray:
    """Indices above the threshold, plus the density maximum."""
    above = tf.above_log(dia.log_density, dia.log_delta)
    modes = set(dia.index[above].tolist())
    if force_root:
        modes.add(dia.root)
    return np.array(sorted(modes), dtype=np.int64)


def mode_diagnostic(ps, dens, mode: int, k: int = 10) -> bool:
    """True when ``mode`` is denser than each of its ``k`` nearest neighbours.

    Advisory only; distance ties resolve to the lower index.
    """
    ps = PointSet.coerce(ps)
    values = dens.values if isinstance(dens, DensityEstimate) else np.asarray(dens, dtype=np.float64)
    if not 0 <= mode < ps.n:
        raise IndexError(f"mode index {mode} out of range for {ps.n} points")
    if not 1 <= k < ps.n:
        raise ValueError(f"k must be in [1, {ps.n - 1}], got {k}")
    dist = row_distances(ps.coords, slice(None), ps.coords[mode])
    dist[mode] = np.inf
    nbrs = np.lexsort((np.arange(ps.n), dist))[:k]
    return bool(np.all(values[mode] > values[nbrs]))


def fit_report(fit: RobustFit, M: float, modes, n_trimmed: int = 0) -> dict:
    return {
        "method": fit.method,
        "beta0": fit.beta0,
        "beta1": fit.beta1,
        "s": fit.s,
        "M": float(M),
        "iterations": fit.iterations,
        "n_used": fit.n_used,
        "n_trimmed": int(n_trimmed),
        "mode_indices": [int(i) for i in modes],
    }
