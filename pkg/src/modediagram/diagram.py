"""Mode diagram assembly: (density, delta) pairs and their log view."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field, replace

import numpy as np

from .delta import DeltaTable, compute_delta
from .density import Bandwidth, DensityEstimate, kde_many
from .points import DataError, PointSet

__all__ = [
    "DELTA_FLOOR",
    "ModeDiagram",
    "build_diagram",
    "density_floor",
    "trim_low_density",
    "bootstrap_diagram",
    "smoothed_bootstrap_sample",
    "write_diagram_csv",
]

# log(delta) is taken of max(delta, DELTA_FLOOR * L)
DELTA_FLOOR = 1e-12

SOURCES = ("estimated", "oracle", "bootstrap")


@dataclass(frozen=True, eq=False)
class ModeDiagram:
    """Per-point ``(density, delta)`` pairs.

    The ``all_*`` arrays cover every point. ``trimmed`` lists the indices
    removed by the low-density floor; ``index`` and the plain column
    properties describe the retained entries only.
    """

    all_density: np.ndarray
    all_delta: np.ndarray
    all_log_density: np.ndarray
    all_log_delta: np.ndarray
    source: str
    delta_table: DeltaTable
    trimmed: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    points: PointSet | None = None

    def __len__(self):
        return len(self.index)

    @property
    def n_total(self) -> int:
        return len(self.all_density)

    @property
    def kept(self) -> np.ndarray:
        mask = np.ones(self.n_total, dtype=bool)
        mask[self.trimmed] = False
        return mask

    @property
    def index(self) -> np.ndarray:
        return np.flatnonzero(self.kept)

    @property
    def density(self) -> np.ndarray:
        return self.all_density[self.kept]

    @property
    def delta(self) -> np.ndarray:
        return self.all_delta[self.kept]

    @property
    def log_density(self) -> np.ndarray:
        return self.all_log_density[self.kept]

    @property
    def log_delta(self) -> np.ndarray:
        return self.all_log_delta[self.kept]

    @property
    def root(self) -> int:
        return self.delta_table.root


def build_diagram(dens, dt: DeltaTable, source: str = "estimated", points=None) -> ModeDiagram:
    values = dens.values if isinstance(dens, DensityEstimate) else np.asarray(dens, dtype=np.float64)
    if len(values) != len(dt):
        raise DataError(f"density has {len(values)} entries but delta table has {len(dt)}")
    if source not in SOURCES:
        raise ValueError(f"unknown diagram source {source!r}")
    if np.any(values <= 0):
        raise DataError("densities must be strictly positive to take logs")
    floor = DELTA_FLOOR * dt.L
    return ModeDiagram(
        all_density=values.copy(),
        all_delta=dt.delta.copy(),
        all_log_density=np.log(values),
        all_log_delta=np.log(np.maximum(dt.delta, floor)),
        source=source,
        delta_table=dt,
        points=points,
    )


def density_floor(n: int, d: int) -> float:
    """``n ** (-1 / (d + 2))``, below which points leave the diagram."""
    return float(n) ** (-1.0 / (d + 2))


def trim_low_density(dia: ModeDiagram, n: int, d: int) -> ModeDiagram:
    drop = np.flatnonzero(dia.all_density < density_floor(n, d))
    trimmed = np.union1d(dia.trimmed, drop).astype(np.int64)
    if len(trimmed) == len(dia.trimmed):
        return dia
    return replace(dia, trimmed=trimmed)


def smoothed_bootstrap_sample(ps, bw: Bandwidth, N: int, rng) -> np.ndarray:
    """``N`` draws from the Gaussian kernel estimate: a resampled row plus ``h`` noise."""
    ps = PointSet.coerce(ps)
    rows = rng.integers(0, ps.n, size=N)
    return ps.coords[rows] + bw.h * rng.standard_normal((N, ps.d))


def bootstrap_diagram(ps, bw: Bandwidth, N: int, seed: int = 0, L=None, threads: int = 1) -> ModeDiagram:
    """Diagram of a smoothed bootstrap sample scored under the original estimate.

    The returned diagram indexes the bootstrap points, available as
    ``dia.points``.
    """
    if N < 2:
        raise DataError(f"bootstrap size must be at least 2, got {N}")
    ps = PointSet.coerce(ps)
    rng = np.random.default_rng(seed)
    boot = PointSet(smoothed_bootstrap_sample(ps, bw, N, rng))
    values = kde_many(ps, bw, boot.coords, threads=threads)
    dt = compute_delta(boot, values, L=L, threads=threads)
    return build_diagram(values, dt, source="bootstrap", points=boot)


def _fmt(x) -> str:
    return repr(float(x))


def write_diagram_csv(dia: ModeDiagram, fh=None, residual=None, is_mode=None) -> str:
    """Render the diagram as CSV text, optionally writing it to ``fh``.

    ``residual`` is aligned with ``dia.index``; ``is_mode`` is a collection
    of point indices. Trimmed points get empty log and residual cells.
    """
    res = {} if residual is None else dict(zip(dia.index.tolist(), residual))
    modes = None if is_mode is None else set(int(i) for i in is_mode)
    kept = dia.kept
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["index", "density", "delta", "log_density", "log_delta", "residual", "is_mode", "trimmed"])
    for i in range(dia.n_total):
        if kept[i]:
            logs = [_fmt(dia.all_log_density[i]), _fmt(dia.all_log_delta[i])]
            r = "" if residual is None else _fmt(res[i])
        else:
            logs = ["", ""]
            r = ""
        w.writerow([
            i, _fmt(dia.all_density[i]), _fmt(dia.all_delta[i]), *logs, r,
            "" if modes is None else int(i in modes),
            int(not kept[i]),
        ])
    text = buf.getvalue()
    if fh is not None:
        fh.write(text)
    return text
