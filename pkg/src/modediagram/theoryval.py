"""Monte Carlo checks of the large-sample behaviour of the link distance.

For a point ``x`` that is not a mode, ``n * delta(x)**d`` approaches an
exponential law with rate ``p(x) * tau * v_d``, where ``v_d`` is the unit
ball volume and ``tau = 1/2`` for smooth densities. At a mode it diverges.
On the log-log diagram this gives a slope of about ``-1/d``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.special import gammaln

from .delta import compute_delta
from .diagram import ModeDiagram, build_diagram
from .points import DataError, PointSet, PreconditionError, diameter, row_distances
from .robustfit import fit_robust
from .synthgen import ShapeSpec, _mixture, generate, true_density

__all__ = [
    "LimitExperiment",
    "unit_ball_volume",
    "oracle_diagram",
    "sample_scaled_delta",
    "mode_scaled_delta",
    "ks_distance",
    "slope_check",
    "slope_band",
    "run_validation",
]

SLOPE_BANDS = {1: (-1.3, -0.7), 2: (-0.65, -0.35), 3: (-0.48, -0.19)}
KS_TOL = 0.10
MEAN_TOL = 0.10


def unit_ball_volume(d: int) -> float:
    return math.exp(0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1))


@dataclass(frozen=True)
class LimitExperiment:
    spec: ShapeSpec
    x: tuple
    n: int = 5000
    reps: int = 400
    seed: int = 0
    tau: float = 0.5
    dim: int = field(init=False)

    def __post_init__(self):
        _mixture(self.spec)  # closed-form density required
        x = tuple(float(v) for v in np.ravel(self.x))
        if len(x) != self.spec.dim:
            raise DataError(f"test point has {len(x)} coordinates, density has {self.spec.dim}")
        if not 0 < self.tau < 1:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")
        if self.n < 1 or self.reps < 1:
            raise ValueError("n and reps must be positive")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "dim", len(x))

    @property
    def v_d(self) -> float:
        return unit_ball_volume(self.dim)

    @property
    def density(self) -> float:
        return true_density(self.spec, np.array(self.x))

    @property
    def rate(self) -> float:
        return self.density * self.tau * self.v_d


def _is_critical(spec, x, rel=1e-6):
    x = np.asarray(x, dtype=np.float64)
    eps = 1e-5
    grad = np.empty(len(x))
    for k in range(len(x)):
        e = np.zeros(len(x))
        e[k] = eps
        grad[k] = (true_density(spec, x + e) - true_density(spec, x - e)) / (2 * eps)
    return np.linalg.norm(grad) <= rel * true_density(spec, x)


def oracle_diagram(ps, spec: ShapeSpec, L=None, threads: int = 1) -> ModeDiagram:
    """Diagram built from the true density rather than an estimate."""
    ps = PointSet.coerce(ps)
    values = np.asarray(true_density(spec, ps.coords), dtype=np.float64).reshape(-1)
    dt = compute_delta(ps, values, L=L, threads=threads)
    return build_diagram(values, dt, source="oracle", points=ps)


def _replicate_seeds(seed, reps):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(reps)]


def _draw(spec, n, seed):
    return generate(ShapeSpec(spec.shape, n=n, mu=spec.mu, d=spec.d, seed=seed)).X


def _scaled_deltas(exp: LimitExperiment, on_empty: str):
    x = np.array(exp.x)
    px = exp.density
    out = np.empty(exp.reps)
    for r, s in enumerate(_replicate_seeds(exp.seed, exp.reps)):
        X = _draw(exp.spec, exp.n, s)
        higher = np.flatnonzero(true_density(exp.spec, X) > px)
        if len(higher):
            delta = row_distances(X, higher, x).min()
        elif on_empty == "diameter":
            delta = diameter(X)
        else:
            delta = np.inf
        out[r] = exp.n * delta ** exp.dim
    return out


def sample_scaled_delta(exp: LimitExperiment) -> np.ndarray:
    """``n * delta(x)**d`` per replicate, using the true density ordering.

    Replicates with no higher-density sample point yield ``inf``.
    """
    if _is_critical(exp.spec, exp.x):
        raise PreconditionError(f"test point {exp.x} is a critical point of the density")
    return _scaled_deltas(exp, on_empty="inf")


def mode_scaled_delta(exp: LimitExperiment) -> np.ndarray:
    """Like :func:`sample_scaled_delta` but valid at a mode.

    When no sample point beats ``x`` the distance falls back to the sample
    diameter, the value the density maximum receives on the diagram.
    """
    return _scaled_deltas(exp, on_empty="diameter")


def ks_distance(samples, rate: float) -> float:
    """Kolmogorov-Smirnov distance to the exponential law with ``rate``."""
    s = np.sort(np.asarray(samples, dtype=np.float64))
    m = len(s)
    if m == 0:
        raise ValueError("no samples")
    if not rate > 0:
        raise ValueError(f"rate must be positive, got {rate}")
    cdf = -np.expm1(-rate * s)
    i = np.arange(1, m + 1)
    return float(max(np.max(i / m - cdf), np.max(cdf - (i - 1) / m)))


def slope_band(d: int) -> tuple:
    return SLOPE_BANDS.get(d, (-1.3 / d, -0.7 / d))


def slope_check(spec: ShapeSpec, n: int = 20000, seed: int = 0, top_k: int = 3, method: str = "huber") -> float:
    """Robust log-log slope of the oracle diagram, near-mode points removed.

    The ``top_k`` highest true-density points of every generating component
    are left out of the regression.
    """
    ds = generate(ShapeSpec(spec.shape, n=n, mu=spec.mu, d=spec.d, seed=seed, noise_n=0))
    dia = oracle_diagram(ds.X, spec)
    drop = []
    for lab in np.unique(ds.labels):
        members = np.flatnonzero(ds.labels == lab)
        top = members[np.lexsort((members, -dia.all_density[members]))[:top_k]]
        drop.extend(top.tolist())
    trimmed = replace(dia, trimmed=np.unique(np.asarray(drop, dtype=np.int64)))
    return fit_robust(trimmed, method=method).beta1


def run_validation(d: int = 2, x=None, n: int = 5000, reps: int = 400, seed: int = 0,
                   slope_n: int = 20000, mu: float = 0.0) -> dict:
    """Exponential-limit and slope checks on a standard normal (``mu = 0``).

    Returns a JSON-ready report with a ``pass`` block.
    """
    spec = ShapeSpec("gauss-pair", n=n, mu=mu, d=d, seed=seed)
    if x is None:
        x = np.zeros(d)
        x[0] = 1.0
    exp = LimitExperiment(spec, tuple(np.ravel(x)), n=n, reps=reps, seed=seed)
    values = sample_scaled_delta(exp)
    finite = values[np.isfinite(values)]
    n_inf = int(len(values) - len(finite))
    if len(finite):
        ks = ks_distance(finite, exp.rate)
        mean_ratio = float(finite.mean() * exp.rate)
    else:
        ks, mean_ratio = 1.0, float("nan")
    slope = slope_check(spec, n=slope_n, seed=seed)
    lo, hi = slope_band(d)
    passes = {
        "ks": bool(ks < KS_TOL),
        "mean": bool(abs(mean_ratio - 1) < MEAN_TOL),
        "slope": bool(lo <= slope <= hi),
    }
    passes["all"] = all(passes.values())
    return {
        "config": {"d": d, "x": list(exp.x), "n": n, "reps": reps, "seed": seed,
                   "tau": exp.tau, "slope_n": slope_n, "mu": mu},
        "density_at_x": exp.density,
        "rate": exp.rate,
        "v_d": exp.v_d,
        "n_no_higher": n_inf,
        "ks_distance": ks,
        "mean_ratio": mean_ratio,
        "slope": slope,
        "slope_band": [lo, hi],
        "pass": passes,
    }
