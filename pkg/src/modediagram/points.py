"""Sample storage, Euclidean distances and CSV ingestion."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "DataError",
    "PreconditionError",
    "PointSet",
    "diameter",
    "pairwise_distance",
    "row_distances",
    "read_points_csv",
]

_DIAMETER_CHUNK = 256


class DataError(ValueError):
    """Raised for invalid or degenerate input data."""


class PreconditionError(DataError):
    """An operation was called outside its documented domain."""


@dataclass(frozen=True, eq=False)
class PointSet:
    """Immutable ``(n, d)`` table of sample coordinates.

    Row ``i`` always refers to the same sample. Coordinates are kept in
    float64 and are never rescaled.
    """

    coords: np.ndarray

    def __post_init__(self):
        arr = np.array(self.coords, dtype=np.float64, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(-1, 1)
        if arr.ndim != 2:
            raise DataError(f"expected a 2D array, got {arr.ndim} dimensions")
        if arr.shape[0] < 1 or arr.shape[1] < 1:
            raise DataError(f"need at least one point and one column, got shape {arr.shape}")
        if not np.all(np.isfinite(arr)):
            bad = np.argwhere(~np.isfinite(arr))[0]
            raise DataError(f"non-finite coordinate at row {bad[0]}, column {bad[1]}")
        arr = np.ascontiguousarray(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "coords", arr)

    @property
    def n(self) -> int:
        return self.coords.shape[0]

    @property
    def d(self) -> int:
        return self.coords.shape[1]

    def __len__(self):
        return self.n

    def __getitem__(self, i):
        return self.coords[i]

    @classmethod
    def coerce(cls, X) -> "PointSet":
        return X if isinstance(X, cls) else cls(X)


def row_distances(X: np.ndarray, rows, x: np.ndarray) -> np.ndarray:
    """Euclidean distances from ``x`` to ``X[rows]``.

    Accumulates squared differences column by column so every caller gets
    bit-identical values for the same pair regardless of how many rows are
    evaluated at once.
    """
    sub = X[rows]
    acc = np.zeros(sub.shape[0])
    for k in range(X.shape[1]):
        diff = sub[:, k] - x[k]
        acc += diff * diff
    return np.sqrt(acc)


def pairwise_distance(ps: PointSet, i: int, j: int) -> float:
    n = ps.n
    for idx in (i, j):
        if not -n <= idx < n:
            raise IndexError(f"index {idx} out of range for {n} points")
    return float(row_distances(ps.coords, [j], ps.coords[i])[0])


def _max_sq_distance(A, B) -> float:
    best = 0.0
    for start in range(0, A.shape[0], _DIAMETER_CHUNK):
        block = A[start:start + _DIAMETER_CHUNK]
        acc = np.zeros((block.shape[0], B.shape[0]))
        for k in range(A.shape[1]):
            diff = block[:, k, None] - B[None, :, k]
            acc += diff * diff
        best = max(best, float(acc.max()))
    return best


def diameter(ps) -> float:
    """Exact maximum pairwise Euclidean distance (0 for a single point)."""
    ps = PointSet.coerce(ps)
    X = ps.coords
    if ps.n == 1:
        return 0.0
    if ps.d == 1:
        return float(X[:, 0].max() - X[:, 0].min())
    # Any pair reaching the maximum has both ends far from the centroid:
    # |Xi - Xj| <= |Xi - c| + R.  A lower bound from a double sweep prunes
    # everything else before the exhaustive scan.
    center = X.mean(axis=0)
    radial = row_distances(X, slice(None), center)
    R = radial.max()
    a = int(np.argmax(radial))
    b = int(np.argmax(row_distances(X, slice(None), X[a])))
    lower = float(row_distances(X, [b], X[a])[0])
    keep = radial + R >= lower * (1 - 1e-9)
    cand = X[keep]
    return float(np.sqrt(_max_sq_distance(cand, cand)))


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def read_points_csv(source) -> np.ndarray:
    """Parse a numeric CSV into an ``(n, d)`` array.

    The first row is treated as a header when any of its fields is not a
    number. Errors carry 1-based line numbers.
    """
    if isinstance(source, (str, Path)):
        text = Path(source).read_text(encoding="utf-8")
    else:
        text = source.read()
    rows = []
    width = None
    reader = csv.reader(io.StringIO(text))
    for lineno, fields in enumerate(reader, start=1):
        fields = [f.strip() for f in fields]
        if not fields or all(f == "" for f in fields):
            continue
        if lineno == 1 and not all(_is_number(f) for f in fields):
            continue
        if width is None:
            width = len(fields)
        elif len(fields) != width:
            raise DataError(f"line {lineno}: expected {width} fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError as exc:
            raise DataError(f"line {lineno}: {exc}") from None
        if not all(np.isfinite(rows[-1])):
            raise DataError(f"line {lineno}: non-finite value")
    if not rows:
        raise DataError("no data rows found")
    return np.asarray(rows, dtype=np.float64)
