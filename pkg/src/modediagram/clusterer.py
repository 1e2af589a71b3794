"""Cluster assignment along nearest-higher-density links."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .delta import DeltaTable
from .points import DataError

__all__ = ["ClusterResult", "assign_clusters", "adjusted_rand_index", "write_labels_csv"]


@dataclass(frozen=True, eq=False)
class ClusterResult:
    """Labels ``0..k-1``; ``modes[j]`` is the point that started cluster ``j``."""

    labels: np.ndarray
    modes: np.ndarray
    meta: dict = field(default_factory=dict)

    @property
    def n_clusters(self) -> int:
        return len(self.modes)

    def sizes(self) -> list[int]:
        return np.bincount(self.labels, minlength=self.n_clusters).tolist()


def assign_clusters(dt: DeltaTable, modes, trimmed=None, meta=None) -> ClusterResult:
    """Label every point by the first selected mode up its parent chain.

    Points are swept from highest to lowest density, so a point's parent
    is always labelled before the point itself. Cluster ids follow the
    density rank of the modes (the root's cluster is 0).
    """
    n = len(dt)
    modes = np.unique(np.asarray(modes, dtype=np.int64))
    if len(modes) == 0:
        raise DataError("at least one mode is required")
    if modes[0] < 0 or modes[-1] >= n:
        raise DataError(f"mode index out of range for {n} points")
    if trimmed is not None and len(np.intersect1d(modes, trimmed)):
        raise DataError("a selected mode was trimmed from the diagram")
    if dt.root not in modes:
        raise DataError("the density maximum must be among the modes")
    rank = dt.rank()
    modes = modes[np.argsort(rank[modes])]
    mode_label = np.full(n, -1, dtype=np.int64)
    mode_label[modes] = np.arange(len(modes))
    labels = np.full(n, -1, dtype=np.int64)
    parent = dt.parent
    for i in dt.order:
        own = mode_label[i]
        labels[i] = own if own >= 0 else labels[parent[i]]
    return ClusterResult(labels=labels, modes=modes, meta=dict(meta or {}))


def _comb2(x):
    x = np.asarray(x, dtype=np.float64)
    return x * (x - 1) / 2


def adjusted_rand_index(a, b) -> float:
    """Chance-corrected Rand index between two labelings."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise DataError("label vectors must be 1D and of equal length")
    n = len(a)
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    table = np.zeros((ai.max() + 1 if n else 0, bi.max() + 1 if n else 0), dtype=np.int64)
    np.add.at(table, (ai, bi), 1)
    index = _comb2(table).sum()
    sum_a = _comb2(table.sum(axis=1)).sum()
    sum_b = _comb2(table.sum(axis=0)).sum()
    total = _comb2(n)
    expected = sum_a * sum_b / total if total else 0.0
    max_index = (sum_a + sum_b) / 2
    if max_index == expected:
        # both partitions trivial (all-in-one or all singletons)
        return 1.0
    return float((index - expected) / (max_index - expected))


def write_labels_csv(result: ClusterResult, fh=None) -> str:
    modes = set(result.modes.tolist())
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "label", "is_mode"])
    for i, lab in enumerate(result.labels.tolist()):
        w.writerow([i, lab, int(i in modes)])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
