"""Seeded generators for the benchmark shapes, with ground-truth labels."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import multivariate_normal

from .points import DataError

__all__ = ["SHAPES", "ShapeSpec", "Dataset", "generate", "true_density", "UnsupportedShape"]

SHAPES = ("two-blobs", "broken-circle", "four-crescents", "blobs3d", "gauss-pair")

# fixed geometry; recorded in Dataset.meta
TWO_BLOBS_CENTERS = ((-3.0, 0.0), (3.0, 0.0))
CIRCLE_RADIUS = 1.0
CIRCLE_ARCS = 5
CIRCLE_ARC_FRACTION = 0.55  # share of each 72 degree sector covered by its arc
CIRCLE_JITTER = 0.05
CRESCENT_RADIUS = 1.0
CRESCENT_JITTER = 0.08
CRESCENT_CENTERS = ((0.0, 0.0), (3.5, 0.0), (0.0, 3.5), (3.5, 3.5))
CRESCENT_ROTATIONS = (0.0, 0.5 * math.pi, 1.5 * math.pi, math.pi)
BLOBS3D_CENTERS = ((0.0, 0.0, 0.0), (4.0, 4.0, 0.0), (4.0, 0.0, 4.0), (0.0, 4.0, 4.0))  # tetrahedron
BLOBS3D_SIGMA = 0.5
NOISE_BOX_INFLATION = 0.10

_DEFAULT_N = {
    "two-blobs": 500,
    "broken-circle": 500,
    "four-crescents": 400,
    "blobs3d": 400,
    "gauss-pair": 6000,
}


class UnsupportedShape(DataError):
    """The shape has no closed-form density."""


@dataclass(frozen=True)
class ShapeSpec:
    shape: str
    n: int | None = None
    noise_n: int = 0
    mu: float = 3.0
    d: int = 2
    seed: int = 0

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise DataError(f"unknown shape {self.shape!r}; choose from {', '.join(SHAPES)}")
        if self.n is None:
            object.__setattr__(self, "n", _DEFAULT_N[self.shape])
        if self.n < 1:
            raise DataError(f"n must be at least 1, got {self.n}")
        if self.noise_n < 0:
            raise DataError(f"noise_n must be non-negative, got {self.noise_n}")
        if self.shape == "gauss-pair" and self.d < 1:
            raise DataError(f"d must be at least 1, got {self.d}")

    @property
    def dim(self) -> int:
        if self.shape == "gauss-pair":
            return self.d
        return 3 if self.shape == "blobs3d" else 2

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True, eq=False)
class Dataset:
    X: np.ndarray
    labels: np.ndarray
    spec: ShapeSpec
    meta: dict


def _split(n, k):
    """Sizes of ``k`` near-equal groups summing to ``n``."""
    base, extra = divmod(n, k)
    return [base + (j < extra) for j in range(k)]


def _two_blobs(spec, rng):
    parts = []
    for center, m in zip(TWO_BLOBS_CENTERS, _split(spec.n, 2)):
        parts.append(np.asarray(center) + rng.standard_normal((m, 2)))
    return parts, {"centers": TWO_BLOBS_CENTERS, "sigma": 1.0}


def _broken_circle(spec, rng):
    sector = 2 * math.pi / CIRCLE_ARCS
    half = 0.5 * CIRCLE_ARC_FRACTION * sector
    parts = []
    for j, m in enumerate(_split(spec.n, CIRCLE_ARCS)):
        theta = j * sector + rng.uniform(-half, half, m)
        arc = CIRCLE_RADIUS * np.column_stack([np.cos(theta), np.sin(theta)])
        parts.append(arc + CIRCLE_JITTER * rng.standard_normal((m, 2)))
    meta = {"radius": CIRCLE_RADIUS, "arcs": CIRCLE_ARCS, "arc_fraction": CIRCLE_ARC_FRACTION,
            "jitter": CIRCLE_JITTER}
    return parts, meta


def _four_crescents(spec, rng):
    parts = []
    for center, rot, m in zip(CRESCENT_CENTERS, CRESCENT_ROTATIONS, _split(spec.n, 4)):
        theta = rot + rng.uniform(0.0, math.pi, m)
        arc = CRESCENT_RADIUS * np.column_stack([np.cos(theta), np.sin(theta)])
        parts.append(np.asarray(center) + arc + CRESCENT_JITTER * rng.standard_normal((m, 2)))
    meta = {"radius": CRESCENT_RADIUS, "jitter": CRESCENT_JITTER, "centers": CRESCENT_CENTERS,
            "rotations": CRESCENT_ROTATIONS}
    return parts, meta


def _blobs3d(spec, rng):
    parts = []
    for center, m in zip(BLOBS3D_CENTERS, _split(spec.n, 4)):
        parts.append(np.asarray(center) + BLOBS3D_SIGMA * rng.standard_normal((m, 3)))
    return parts, {"centers": BLOBS3D_CENTERS, "sigma": BLOBS3D_SIGMA}


def _gauss_pair(spec, rng):
    parts = []
    for sign, m in zip((-1.0, 1.0), _split(spec.n, 2)):
        parts.append(sign * spec.mu + rng.standard_normal((m, spec.d)))
    return parts, {"mu": spec.mu, "d": spec.d}


_GENERATORS = {
    "two-blobs": _two_blobs,
    "broken-circle": _broken_circle,
    "four-crescents": _four_crescents,
    "blobs3d": _blobs3d,
    "gauss-pair": _gauss_pair,
}


def generate(spec: ShapeSpec) -> Dataset:
    """Draw the dataset described by ``spec``; noise points are labelled -1."""
    rng = np.random.default_rng(spec.seed)
    parts, meta = _GENERATORS[spec.shape](spec, rng)
    X = np.concatenate(parts)
    labels = np.concatenate([np.full(len(p), j) for j, p in enumerate(parts)])
    if spec.noise_n:
        lo, hi = X.min(axis=0), X.max(axis=0)
        pad = 0.5 * NOISE_BOX_INFLATION * (hi - lo)
        noise = rng.uniform(lo - pad, hi + pad, size=(spec.noise_n, X.shape[1]))
        X = np.concatenate([X, noise])
        labels = np.concatenate([labels, np.full(spec.noise_n, -1)])
        meta["noise_box_inflation"] = NOISE_BOX_INFLATION
    return Dataset(X=X, labels=labels.astype(np.int64), spec=spec, meta=meta)


def _mixture(spec):
    if spec.shape == "gauss-pair":
        d = spec.d
        return [(-spec.mu * np.ones(d), 1.0), (spec.mu * np.ones(d), 1.0)], d
    if spec.shape == "two-blobs":
        return [(np.asarray(c), 1.0) for c in TWO_BLOBS_CENTERS], 2
    raise UnsupportedShape(f"shape {spec.shape!r} has no closed-form density")


def true_density(spec: ShapeSpec, x) -> np.ndarray | float:
    """Exact density of the (noise-free) mixture at ``x`` (one point or rows)."""
    comps, d = _mixture(spec)
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim <= 1 and (x.ndim == 0 or x.shape[0] == d) and not (d == 1 and x.ndim == 1 and len(x) > 1)
    pts = x.reshape(-1, d)
    out = np.zeros(len(pts))
    for mean, var in comps:
        out += 0.5 * multivariate_normal(mean, var * np.eye(d)).pdf(pts).reshape(-1)
    return float(out[0]) if single else out
