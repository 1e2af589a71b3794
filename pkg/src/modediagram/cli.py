"""Command line entry point: ``modediagram {cluster,generate,validate,meanshift}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .clusterer import adjusted_rand_index, write_labels_csv
from .diagram import write_diagram_csv
from .estimator import ModeDiagramClustering
from .meanshift import MeanShiftClustering
from .points import DataError, PreconditionError, read_points_csv
from .robustfit import fit_report, threshold_value
from .svgplot import diagram_svg, residuals_svg
from .synthgen import SHAPES, ShapeSpec, generate
from .theoryval import run_validation

log = logging.getLogger("modediagram")

EXIT_OK, EXIT_DATA, EXIT_PRECONDITION = 0, 1, 2


class StageError(DataError):
    def __init__(self, stage, exc):
        super().__init__(f"{stage}: {exc}")
        self.precondition = isinstance(exc, PreconditionError)


def _dump_json(obj, path: Path):
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _bandwidth_arg(text):
    if text == "auto":
        return text
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected 'auto' or a number, got {text!r}") from None
    if not value > 0:
        raise argparse.ArgumentTypeError("bandwidth must be positive")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return value


def _load(path):
    try:
        return read_points_csv(path)
    except FileNotFoundError:
        raise DataError(f"input file not found: {path}") from None
    except DataError as exc:
        raise StageError(f"reading {path}", exc) from None


def _read_labels(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows or "label" not in rows[0]:
        raise DataError(f"{path}: expected a CSV with a 'label' column")
    rows.sort(key=lambda r: int(r.get("index", 0)))
    return np.array([int(r["label"]) for r in rows])


def cmd_cluster(args) -> int:
    X = _load(args.input)
    if len(X) < 2:
        raise DataError("need at least 2 data rows")
    est = ModeDiagramClustering(
        bandwidth=args.bandwidth, c0=args.c0, M=args.m, robust=args.robust, scale=args.scale,
        density_floor=args.density_floor, L=args.L, bootstrap=args.bootstrap, seed=args.seed,
        threads=args.threads,
    )
    try:
        est.fit(X)
    except DataError as exc:
        raise StageError("clustering", exc) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    dia = est.diagram_
    modes = est.modes_
    resid = est.residuals()
    (out / "labels.csv").write_text(write_labels_csv(est.result_), encoding="utf-8")
    (out / "diagram.csv").write_text(write_diagram_csv(dia, residual=resid, is_mode=modes), encoding="utf-8")
    mode_mask = np.isin(dia.index, modes)
    tf = est.threshold_
    (out / "diagram.svg").write_text(
        diagram_svg(dia.density, dia.delta, mode_mask, lambda u: threshold_value(tf, u)), encoding="utf-8")
    (out / "residuals.svg").write_text(
        residuals_svg(dia.log_density, resid, mode_mask, tf.margin), encoding="utf-8")
    report = {
        "config": {
            "input": str(args.input), "bandwidth": args.bandwidth, "c0": args.c0, "M": args.m,
            "robust": args.robust, "scale": args.scale, "density_floor": args.density_floor,
            "L": args.L, "bootstrap": args.bootstrap, "seed": args.seed,
        },
        "n": int(len(X)),
        "d": int(X.shape[1]),
        "bandwidth": est.bandwidth_.h,
        "bandwidth_rule": est.bandwidth_.rule,
        "L": est.delta_table_.L,
        "diagram_source": dia.source,
        "fit": fit_report(est.fit_, args.m, modes, n_trimmed=len(dia.trimmed)),
        "mode_count": int(est.n_clusters_),
        "cluster_sizes": est.result_.sizes(),
        "seed": args.seed,
    }
    if args.timings:
        report["timings_ms"] = est.timings_
    _dump_json(report, out / "report.json")
    print(f"{est.n_clusters_} modes; outputs in {out}")
    return EXIT_OK


def cmd_generate(args) -> int:
    spec = ShapeSpec(args.shape, n=args.n, noise_n=args.noise, mu=args.mu, d=args.d, seed=args.seed)
    ds = generate(spec)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "points.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([f"x{k}" for k in range(ds.X.shape[1])])
        w.writerows([repr(float(v)) for v in row] for row in ds.X)
    with open(out / "truth.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["index", "label"])
        w.writerows(enumerate(ds.labels.tolist()))
    _dump_json({"spec": spec.to_dict(), "meta": ds.meta}, out / "spec.json")
    print(f"wrote {len(ds.X)} points to {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    x = None
    if args.point is not None:
        x = [float(v) for v in args.point.split(",")]
        if len(x) != args.d:
            raise PreconditionError(f"--point has {len(x)} coordinates but --d is {args.d}")
    if args.reps < 30:
        log.warning("only %d replicates; the distribution checks are unreliable", args.reps)
    report = run_validation(d=args.d, x=x, n=args.n, reps=args.reps, seed=args.seed, slope_n=args.slope_n)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK if report["pass"]["all"] else EXIT_DATA


def cmd_meanshift(args) -> int:
    X = _load(args.input)
    est = MeanShiftClustering(bandwidth=args.bandwidth, c0=args.c0, max_iter=args.max_iter,
                              merge_radius=args.merge_radius)
    try:
        est.fit(X)
    except DataError as exc:
        raise StageError("mean shift", exc) from None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "labels.csv").write_text(write_labels_csv(est.result_), encoding="utf-8")
    meta = est.result_.meta
    report = {
        "config": {"input": str(args.input), "bandwidth": args.bandwidth, "c0": args.c0,
                   "max_iter": args.max_iter, "merge_radius": args.merge_radius},
        "n": int(len(X)),
        "bandwidth": est.bandwidth_.h,
        "mode_count": int(est.n_clusters_),
        "cluster_sizes": est.result_.sizes(),
        "mode_indices": est.modes_.tolist(),
        "mode_points": meta["mode_points"],
        "n_not_converged": meta["n_not_converged"],
    }
    if args.compare:
        other = _read_labels(args.compare)
        if len(other) != len(X):
            raise DataError(f"{args.compare} has {len(other)} labels for {len(X)} points")
        report["ari_vs_compare"] = adjusted_rand_index(est.labels_, other)
        print(f"ARI {report['ari_vs_compare']:.6f}")
    _dump_json(report, out / "report.json")
    print(f"{est.n_clusters_} clusters; outputs in {out}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="modediagram", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("cluster", help="cluster a CSV of points")
    p.add_argument("input")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--bandwidth", type=_bandwidth_arg, default="auto")
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--m", type=float, default=3.0, help="outlier multiplier M")
    p.add_argument("--robust", choices=("huber", "theil-sen"), default="huber")
    p.add_argument("--scale", choices=("mad", "classic"), default="mad")
    p.add_argument("--density-floor", action="store_true")
    p.add_argument("--L", type=float, default=None, help="distance given to the density maximum")
    p.add_argument("--bootstrap", type=_positive_int, default=None, metavar="N")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.add_argument("--timings", action="store_true", help="add wall-clock timings to report.json")
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("generate", help="write a synthetic benchmark dataset")
    p.add_argument("--shape", choices=SHAPES, required=True)
    p.add_argument("--n", type=_positive_int, default=None)
    p.add_argument("--noise", type=int, default=0)
    p.add_argument("--mu", type=float, default=3.0)
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=".")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("validate", help="Monte Carlo check of the exponential limit and log-log slope")
    p.add_argument("--d", type=_positive_int, default=2)
    p.add_argument("--point", default=None, help="comma separated test point (default: 1,0,...)")
    p.add_argument("--n", type=_positive_int, default=5000)
    p.add_argument("--reps", type=_positive_int, default=400)
    p.add_argument("--slope-n", type=_positive_int, default=20000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default=None, help="also write the JSON report here")
    p.add_argument("--threads", type=_positive_int, default=1)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("meanshift", help="mean-shift baseline clustering")
    p.add_argument("input")
    p.add_argument("--out", default=".")
    p.add_argument("--bandwidth", type=_bandwidth_arg, default="auto")
    p.add_argument("--c0", type=float, default=1.0)
    p.add_argument("--max-iter", type=_positive_int, default=500)
    p.add_argument("--merge-radius", type=float, default=None)
    p.add_argument("--compare", default=None, help="labels CSV to score with the adjusted Rand index")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--threads", type=_positive_int, default=1)
    p.set_defaults(func=cmd_meanshift)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except PreconditionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION if exc.precondition else EXIT_DATA
    except (DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
