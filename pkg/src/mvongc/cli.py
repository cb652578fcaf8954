"""Batch front end: manifest ingestion, pipeline runs, mu sweeps, JSON reports.

Manifest (JSON)::

    {"kind": "features" | "graphs",
     "views": ["view0.csv", "view1.csv"],
     "labels": "labels.csv",          # optional
     "n": 300}                        # optional expected sample count

Paths are resolved relative to the manifest. CSVs are comma-separated,
headerless, one sample per row; a labels CSV holds one integer per line.
"""
from __future__ import annotations

import argparse
import csv
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import AsymmetricGraph, MvongcError, ParseError, ShapeMismatch
from .graphs import (
    FeatureMatrix,
    MultiViewGraphSet,
    SimilarityMatrix,
    gaussian_similarity,
    knn_sparsify,
    normalize,
)
from .labels import accuracy, fit_labeler, pairwise_f1
from .sec import SecConfig, solve_sec
from .solver import SolverConfig, solve

DEFAULT_KNN = 10
ASYMMETRY_TOL = 1e-9
SWEEP_CSV_HEADER = ["mu", "acc", "f1", "iterations", "converged"]


class InvalidArgument(MvongcError, ValueError):
    code = "InvalidArgument"


def read_csv_matrix(path) -> np.ndarray:
    """Parse a headerless numeric CSV; errors name the file and 1-based line."""
    path = Path(path)
    rows = []
    width = None
    try:
        fh = open(path, newline="")
    except OSError as exc:
        raise ParseError(f"cannot open {path}: {exc.strerror}", where=str(path)) from exc
    with fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            if width is None:
                width = len(row)
            elif len(row) != width:
                raise ParseError(f"{path}:{lineno}: expected {width} columns, found {len(row)}",
                                 where=f"{path}:{lineno}")
            try:
                rows.append([float(cell) for cell in row])
            except ValueError as exc:
                raise ParseError(f"{path}:{lineno}: {exc}", where=f"{path}:{lineno}") from exc
    if not rows:
        raise ParseError(f"{path}: no data rows", where=str(path))
    return np.asarray(rows, dtype=np.float64)


def read_labels(path) -> np.ndarray:
    values = read_csv_matrix(path)
    if values.shape[1] != 1:
        raise ParseError(f"{path}: labels file must have a single column", where=str(path))
    labels = values[:, 0]
    if np.any(labels != np.round(labels)) or np.any(labels < 0):
        raise ParseError(f"{path}: labels must be nonnegative integers", where=str(path))
    return labels.astype(np.int64)


@dataclass
class DatasetManifest:
    views: list
    kind: str
    labels: Path | None = None
    n: int | None = None

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        try:
            obj = json.loads(path.read_text())
        except OSError as exc:
            raise ParseError(f"cannot read manifest {path}: {exc.strerror}", where=str(path)) from exc
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{exc.lineno}: {exc.msg}", where=f"{path}:{exc.lineno}") from exc
        if not isinstance(obj, dict):
            raise ParseError(f"{path}: manifest must be a JSON object", where=str(path))
        kind = obj.get("kind")
        if kind not in ("features", "graphs"):
            raise ParseError(f"{path}: 'kind' must be 'features' or 'graphs', got {kind!r}", where=str(path))
        views = obj.get("views")
        if not isinstance(views, list) or not views:
            raise ParseError(f"{path}: 'views' must be a non-empty list", where=str(path))
        base = path.parent
        labels = obj.get("labels")
        n = obj.get("n")
        return cls(
            views=[base / v for v in views],
            kind=kind,
            labels=None if labels is None else base / labels,
            n=None if n is None else int(n),
        )


def load_views(manifest_path, normalize_mode: str = "ds"):
    """Load the views and optional ground truth named by a manifest.

    Returns ``(data, labels)``: a list of :class:`FeatureMatrix` for
    ``features`` manifests, or a normalized :class:`MultiViewGraphSet` for
    ``graphs`` manifests. ``labels`` is ``None`` when the manifest has none.
    """
    manifest = DatasetManifest.load(manifest_path)
    mats = [read_csv_matrix(p) for p in manifest.views]
    n = manifest.n if manifest.n is not None else mats[0].shape[0]
    for p, a in zip(manifest.views, mats):
        if a.shape[0] != n:
            raise ShapeMismatch(f"{p}: {a.shape[0]} rows, expected {n}", where=str(p))
    labels = None
    if manifest.labels is not None:
        labels = read_labels(manifest.labels)
        if labels.shape[0] != n:
            raise ShapeMismatch(f"{manifest.labels}: {labels.shape[0]} labels, expected {n}",
                                where=str(manifest.labels))
    if manifest.kind == "features":
        return [FeatureMatrix(a, view_id=i) for i, a in enumerate(mats)], labels
    views = []
    for p, a in zip(manifest.views, mats):
        if a.shape != (n, n):
            raise ShapeMismatch(f"{p}: graph must be {n}x{n}, got {a.shape[0]}x{a.shape[1]}", where=str(p))
        asym = float(np.max(np.abs(a - a.T)))
        if asym > ASYMMETRY_TOL:
            raise AsymmetricGraph(f"{p}: max|A - A^T| = {asym:.3e}", where=str(p))
        if a.min() < 0:
            raise ShapeMismatch(f"{p}: graph has negative entries", where=str(p))
        views.append(normalize(SimilarityMatrix(a, "raw"), normalize_mode))
    return MultiViewGraphSet(tuple(views)), labels


@dataclass
class RunReport:
    labels: list
    alpha: list
    objective_trace: list
    iterations: int
    converged: bool
    config: dict
    metrics: dict | None = None
    wall_time_ms: float = 0.0
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "labels": [int(v) for v in self.labels],
            "alpha": [float(v) for v in self.alpha],
            "objective_trace": [float(v) for v in self.objective_trace],
            "iterations": int(self.iterations),
            "converged": bool(self.converged),
        }
        if self.metrics is not None:
            out["metrics"] = {k: float(v) for k, v in self.metrics.items()}
        out["config"] = self.config
        out.update(self.extra)
        out["wall_time_ms"] = float(self.wall_time_ms)
        return out

    @classmethod
    def from_dict(cls, obj: dict) -> "RunReport":
        known = {"labels", "alpha", "objective_trace", "iterations", "converged", "metrics", "config",
                 "wall_time_ms"}
        return cls(obj["labels"], obj["alpha"], obj["objective_trace"], obj["iterations"], obj["converged"],
                   obj["config"], obj.get("metrics"), obj.get("wall_time_ms", 0.0),
                   {k: v for k, v in obj.items() if k not in known})


def _sigma(text):
    if text == "auto":
        return "auto"
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive number or 'auto', got {text!r}")
    if not value > 0:
        raise argparse.ArgumentTypeError(f"sigma must be positive, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mvongc", description=__doc__.splitlines()[0])
    p.add_argument("--manifest", required=True, metavar="PATH")
    p.add_argument("--clusters", type=int, required=True, metavar="INT")
    p.add_argument("--mu", type=float, default=1.0, metavar="FLOAT")
    p.add_argument("--m", type=int, default=None, metavar="INT", help="embedding dimension (default: clusters)")
    p.add_argument("--graph", choices=["gaussian"], default="gaussian")
    p.add_argument("--knn", type=int, default=None, metavar="INT",
                   help=f"neighbours kept per row, 0 = dense (default: {DEFAULT_KNN}, capped at n-1)")
    p.add_argument("--sigma", type=_sigma, default="auto", metavar="FLOAT|auto")
    p.add_argument("--normalize", choices=["sym", "ds"], default="ds")
    p.add_argument("--assign", choices=["argmax", "kmeans"], default=None)
    p.add_argument("--sec", action="store_true", help="use the regression-coupled variant (features only)")
    p.add_argument("--gamma-hat", type=float, default=1.0, metavar="FLOAT")
    p.add_argument("--eta", type=float, default=1.0, metavar="FLOAT")
    p.add_argument("--max-iter", type=int, default=100, metavar="INT")
    p.add_argument("--tol", type=float, default=1e-6, metavar="FLOAT")
    p.add_argument("--seed", type=int, default=0, metavar="INT")
    p.add_argument("--sweep-mu", type=float, nargs=3, default=None, metavar=("LO", "HI", "STEP"),
                   help="run log10(mu) = LO, LO+STEP, ..., HI")
    p.add_argument("--out", default=None, metavar="PATH")
    p.add_argument("--model-out", default=None, metavar="PATH", help="write the fitted SEC model JSON (with --sec)")
    return p


def validate_args(args) -> None:
    if args.sweep_mu is None and not (math.isfinite(args.mu) and args.mu > 0):
        raise InvalidArgument(f"--mu must be positive, got {args.mu}", where="flags")
    if args.clusters < 2:
        raise InvalidArgument("--clusters must be at least 2", where="flags")
    if args.m is not None and args.m < 1:
        raise InvalidArgument("--m must be positive", where="flags")
    if args.knn is not None and args.knn < 0:
        raise InvalidArgument("--knn must be nonnegative", where="flags")
    if not args.tol > 0:
        raise InvalidArgument("--tol must be positive", where="flags")
    if args.max_iter < 1:
        raise InvalidArgument("--max-iter must be positive", where="flags")
    if args.sec and not (args.eta > 0 and args.gamma_hat >= 0):
        raise InvalidArgument("--eta must be positive and --gamma-hat nonnegative", where="flags")
    if args.sweep_mu is not None:
        lo, hi, step = args.sweep_mu
        if not lo <= hi:
            raise InvalidArgument("--sweep-mu needs LO <= HI", where="flags")
        if not step > 0:
            raise InvalidArgument("--sweep-mu needs STEP > 0", where="flags")
        if args.out is None:
            raise InvalidArgument("--sweep-mu requires --out", where="flags")
    m = args.clusters if args.m is None else args.m
    if args.assign == "argmax" and m != args.clusters:
        raise InvalidArgument("--assign argmax requires --m equal to --clusters", where="flags")


def config_echo(args) -> dict:
    m = args.clusters if args.m is None else args.m
    assign = args.assign or ("argmax" if m == args.clusters else "kmeans")
    echo = {
        "manifest": str(args.manifest),
        "clusters": args.clusters,
        "mu": args.mu,
        "m": m,
        "graph": args.graph,
        "knn": args.knn,
        "sigma": args.sigma,
        "normalize": args.normalize,
        "assign": assign,
        "sec": bool(args.sec),
        "max_iter": args.max_iter,
        "tol": args.tol,
        "seed": args.seed,
    }
    if args.sec:
        echo["gamma_hat"] = args.gamma_hat
        echo["eta"] = args.eta
    return echo


@dataclass
class Prepared:
    views: MultiViewGraphSet
    features: list | None
    truth: np.ndarray | None
    knn: int | None


def prepare(args) -> Prepared:
    """Load the manifest and build the normalized per-view graphs once."""
    data, truth = load_views(args.manifest, normalize_mode=args.normalize)
    if isinstance(data, MultiViewGraphSet):
        if args.sec:
            raise InvalidArgument("--sec needs a features manifest", where="flags")
        return Prepared(data, None, truth, None)
    n = data[0].n
    knn = min(DEFAULT_KNN, n - 1) if args.knn is None else args.knn
    views = []
    for X in data:
        A = gaussian_similarity(X, args.sigma)
        if knn:
            A = knn_sparsify(A, knn)
        views.append(normalize(A, args.normalize))
    return Prepared(MultiViewGraphSet(tuple(views)), data, truth, knn)


def run_cell(prep: Prepared, args, mu: float):
    """Solve, read out labels and score them; returns ``(RunReport, SecModel | None)``."""
    t0 = time.perf_counter()
    m = args.clusters if args.m is None else args.m
    config = SolverConfig(mu=mu, c=args.clusters, m=m, max_iter=args.max_iter, tol=args.tol, seed=args.seed)
    model = None
    if args.sec:
        X = np.hstack([f.data for f in prep.features])
        state, model = solve_sec(prep.views, X, SecConfig(config, args.gamma_hat, args.eta))
    else:
        state = solve(prep.views, config)
    echo = config_echo(args)
    echo["mu"] = mu
    echo["knn"] = prep.knn
    method = "argmax_g" if echo["assign"] == "argmax" else "kmeans_f"
    source = state.G if method == "argmax_g" else state.F
    labels, _ = fit_labeler(source, args.clusters, method, seed=args.seed)
    metrics = None
    if prep.truth is not None:
        metrics = {"acc": accuracy(labels, prep.truth), "f1": pairwise_f1(labels, prep.truth)}
    report = RunReport(labels.tolist(), state.alpha.tolist(), state.objective_trace.tolist(), state.iterations,
                       state.converged, echo, metrics, wall_time_ms=1000.0 * (time.perf_counter() - t0))
    return report, model


def sweep_exponents(lo: float, hi: float, step: float) -> list[float]:
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    return [round(lo + i * step, 12) for i in range(count)]


def error_payload(exc: BaseException, where: str = "") -> dict:
    if isinstance(exc, MvongcError):
        return {"error": exc.code, "detail": exc.detail or str(exc), "where": exc.where or where}
    return {"error": "InternalError", "detail": f"{type(exc).__name__}: {exc}", "where": where}


def dumps(obj) -> str:
    return json.dumps(obj, indent=2, ensure_ascii=False) + "\n"


def _write(path, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text, encoding="utf-8")


def run_pipeline(args) -> RunReport:
    """One full run; writes the report JSON to ``--out`` (or stdout)."""
    t0 = time.perf_counter()
    prep = prepare(args)
    report, model = run_cell(prep, args, args.mu)
    report.wall_time_ms = 1000.0 * (time.perf_counter() - t0)
    _write(args.out, dumps(report.to_dict()))
    if args.model_out is not None and model is not None:
        Path(args.model_out).write_text(model.to_json() + "\n", encoding="utf-8")
    return report


def sweep_mu(args) -> list[dict]:
    """Run the pipeline for ``mu = 10**p`` over the requested exponents.

    Writes a JSON array ordered by ``mu`` to ``--out`` and a CSV summary next
    to it (same stem, ``.csv`` suffix). Failed cells are recorded with their
    error payload and the sweep continues.
    """
    prep = prepare(args)
    rows = []
    for p in sweep_exponents(*args.sweep_mu):
        mu = 10.0**p
        try:
            report, _ = run_cell(prep, args, mu)
            cell = report.to_dict()
        except Exception as exc:  # noqa: BLE001 - recorded per cell
            cell = {"mu": mu, **error_payload(exc, where=f"mu={mu:g}")}
        cell["log10_mu"] = p
        rows.append(cell)
    _write(args.out, dumps(rows))
    csv_path = Path(args.out).with_suffix(".csv")
    with open(csv_path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(SWEEP_CSV_HEADER)
        for cell in rows:
            if "error" in cell:
                w.writerow([repr(cell["mu"]), "", "", "", ""])
                continue
            metrics = cell.get("metrics") or {}
            w.writerow([repr(cell["config"]["mu"]), metrics.get("acc", ""), metrics.get("f1", ""),
                        cell["iterations"], str(cell["converged"]).lower()])
    return rows


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        validate_args(args)
        if args.sweep_mu is not None:
            sweep_mu(args)
        else:
            run_pipeline(args)
    except Exception as exc:  # noqa: BLE001 - every failure becomes an error JSON
        payload = error_payload(exc, where="pipeline")
        text = dumps(payload)
        sys.stderr.write(text)
        if args.out is not None:
            try:
                _write(args.out, text)
            except OSError:
                pass
        return 2 if isinstance(exc, InvalidArgument) else 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
