"""ingest -> reduce -> train/evaluate -> report, with on-disk artifacts.

Every command reads and writes files under ``out.dir``:

    train.npz, test.npz, encoder.npz      ingest
    reducer.npz, <TAG>_train.npz, ...     reduce (TAG = ORIGDATA | LDADATA | GDADATA)
    classifier.npz, report.json, ...      train-eval
"""

from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import persist
from .classifiers import MlpModel, predict_mlp, predict_tree, train_mlp, train_tree
from .config import PipelineConfig
from .eigencore import KernelSpec
from .errors import ConfigError, DataError
from .gda import GdaModel, fit_gda, project_gda, rank_features_gda
from .ingest import (NumericDataset, encode, fit_encoder, histogram, load_label_map,
                     load_schema, map_labels, read_kdd_file, select_features,
                     stratified_sample)
from .lda import LdaModel, fit_lda, project_lda, rank_features_lda
from .metrics import ConfusionMatrix, Timings, class_report, confusion_matrix, timed
from .plotting import grouped_bars

log = logging.getLogger(__name__)

TAGS = {"none": "ORIGDATA", "lda": "LDADATA", "gda": "GDADATA"}
REPORT_SCHEMA = "gdaids-report/1"
CSV_COLUMNS = ("class", "variant", "DR", "FAR_tabular", "FAR_textual", "train_s", "test_s")
FIGURES = {
    "dr.svg": ("detection_rate", "Detection rate (%)", "Detection rate by class"),
    "far.svg": ("far_tabular", "False alarm rate (%)", "False alarm rate by class"),
    "train_time.svg": ("train_s", "Training time (s)", "Training time"),
    "test_time.svg": ("test_s", "Testing time (s)", "Testing time by class"),
}


def _write_json(path, obj) -> None:
    persist.atomic_write(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _floats(values) -> list:
    return [float(v) for v in np.asarray(values).ravel()]


# ---------------------------------------------------------------- ingest


def ingest(cfg: PipelineConfig):
    """Parse, label and encode the train/test pair. Returns ``(train, test, encoder)``."""
    cfg.validate()
    schema = load_schema(cfg.path("paths.schema"))
    lmap = load_label_map(cfg.path("paths.labels"), cfg["ingest.unknown_policy"],
                          cfg["ingest.unknown_category"])
    header = cfg["ingest.header"]
    raw_train = read_kdd_file(cfg.path("paths.train"), schema, header)
    raw_test = read_kdd_file(cfg.path("paths.test"), schema, header)
    y_train, _ = map_labels(raw_train, lmap)
    y_test, _ = map_labels(raw_test, lmap)
    enc = fit_encoder(raw_train)
    train = encode(enc, raw_train, y_train).replace(tag="ORIGDATA")
    test = encode(enc, raw_test, y_test).replace(tag="ORIGDATA")
    return train, test, enc


def dataset_summary(ds: NumericDataset) -> dict:
    return {"rows": ds.n_rows, "width": ds.n_features,
            "original_features": len(ds.original_features()), "tag": ds.tag,
            "histogram": histogram(ds.y, ds.class_names)}


def cmd_ingest(cfg: PipelineConfig) -> dict:
    train, test, enc = ingest(cfg)
    out = cfg.out_dir
    persist.save(out / "train.npz", train)
    persist.save(out / "test.npz", test)
    persist.save(out / "encoder.npz", enc)
    summary = {"train": dataset_summary(train), "test": dataset_summary(test)}
    _write_json(out / "ingest_summary.json", summary)
    return summary


# ---------------------------------------------------------------- reduce


@dataclass
class Reduction:
    model: LdaModel | GdaModel | None
    train: NumericDataset
    test: NumericDataset
    summary: dict


def _component_names(prefix, r):
    return tuple(f"{prefix}{i + 1}" for i in range(r))


def kernel_spec(cfg: PipelineConfig) -> KernelSpec:
    return KernelSpec(cfg["reducer.gda.kernel"], cfg["reducer.gda.sigma"],
                      cfg["reducer.gda.degree"], cfg["reducer.gda.offset"])


def reduce_datasets(train: NumericDataset, test: NumericDataset,
                    cfg: PipelineConfig) -> Reduction:
    kind = cfg["reducer.kind"]
    mode = cfg["reducer.mode"]
    tag = TAGS[kind]
    summary = {"kind": kind, "mode": mode, "tag": tag, "input_width": train.n_features,
               "original_features": len(train.original_features())}
    timings = Timings()
    if kind == "none":
        summary.update(components=0, eigenvalues=[], output_width=train.n_features,
                       fit_s=0.0)
        return Reduction(None, train.replace(tag=tag), test.replace(tag=tag), summary)

    fit_set, kept = train.compact()
    if kind == "lda":
        model = timings.timed("fit", lambda: fit_lda(fit_set, cfg["reducer.lda.r"],
                                                     cfg["reducer.lda.ridge"]))
        project = project_lda
        summary["basis_rows"] = fit_set.n_rows
    else:
        basis = stratified_sample(fit_set, cfg["reducer.gda.budget"],
                                  min(cfg["reducer.gda.min_per_class"],
                                      cfg["reducer.gda.budget"] // fit_set.class_count),
                                  cfg["run.seed"])
        spec = kernel_spec(cfg)
        model = timings.timed("fit", lambda: fit_gda(basis, spec, cfg["reducer.gda.r"],
                                                     cfg["reducer.gda.ridge"],
                                                     cfg["reducer.gda.rank_tol"]))
        project = project_gda
        summary["basis_rows"] = basis.n_rows
        summary["basis_histogram"] = histogram(basis.y, basis.class_names)
        summary["kernel"] = spec.to_dict()
    summary["components"] = model.n_components
    summary["eigenvalues"] = _floats(model.eigenvalues)
    summary["fit_classes"] = [train.class_names[k] for k in kept]

    if mode == "select":
        if kind == "lda":
            ranking = rank_features_lda(model)
        else:
            ranking = rank_features_gda(model, basis)
        chosen = [name for name, _ in ranking[:cfg["reducer.select_k"]]]
        summary["ranking"] = [[n, float(s)] for n, s in ranking]
        summary["selected_features"] = chosen
        new_train = select_features(train, chosen).replace(tag=tag)
        new_test = select_features(test, chosen).replace(tag=tag)
    else:
        names = _component_names("ld" if kind == "lda" else "gd", model.n_components)
        proj = timings.timed("project", lambda: (project(model, train.X),
                                                 project(model, test.X)))
        new_train = train.replace(X=proj[0], feature_names=names, feature_origins=names,
                                  tag=tag)
        new_test = test.replace(X=proj[1], feature_names=names, feature_origins=names, tag=tag)
    summary["output_width"] = new_train.n_features
    summary["fit_s"] = timings["fit"]
    return Reduction(model, new_train, new_test, summary)


def cmd_reduce(cfg: PipelineConfig) -> dict:
    out = cfg.out_dir
    train = persist.load(out / "train.npz")
    test = persist.load(out / "test.npz")
    red = reduce_datasets(train, test, cfg)
    tag = red.summary["tag"]
    if red.model is not None:
        persist.save(out / "reducer.npz", red.model)
    persist.save(out / f"{tag}_train.npz", red.train)
    persist.save(out / f"{tag}_test.npz", red.test)
    _write_json(out / "reduce_summary.json", red.summary)
    return red.summary


# ---------------------------------------------------------------- train / evaluate


def train_classifier(train: NumericDataset, cfg: PipelineConfig):
    if cfg["classifier.kind"] == "tree":
        return train_tree(train, cfg["classifier.tree.min_leaf"],
                          cfg["classifier.tree.max_depth"], cfg["classifier.tree.min_gain"])
    return train_mlp(train, cfg["classifier.mlp.hidden"], cfg["classifier.mlp.epochs"],
                     cfg["classifier.mlp.rate"], cfg["classifier.mlp.batch"], cfg["run.seed"])


def predict(model, X) -> np.ndarray:
    if isinstance(model, MlpModel):
        return predict_mlp(model, X)[0]
    return predict_tree(model, X)[0]


def evaluate(train: NumericDataset, test: NumericDataset, cfg: PipelineConfig,
             reduce_summary: dict | None = None):
    """Train on ``train``, score ``test``. Returns ``(classifier, report_dict)``."""
    if train.class_names != test.class_names:
        raise DataError("train and test class sets differ")
    timings = Timings()
    model = timings.timed("train", lambda: train_classifier(train, cfg))
    pred = timings.timed("test", lambda: predict(model, test.X))
    per_class = {}
    for c, name in enumerate(test.class_names):
        rows = np.flatnonzero(test.y == c)
        _, per_class[name] = _timed_predict(model, test.X[rows])
    cm = confusion_matrix(test.y, pred, test.class_count, test.class_names)
    reduce_summary = reduce_summary or {}
    report = {
        "schema": REPORT_SCHEMA,
        "variant": cfg.variant_name(),
        "config": cfg.echo(),
        "datasets": {"train": dataset_summary(train), "test": dataset_summary(test)},
        "reducer": {k: v for k, v in reduce_summary.items() if k != "fit_s"},
        "classifier": {"kind": cfg["classifier.kind"],
                       "params": cfg.section(f"classifier.{cfg['classifier.kind']}")},
        "confusion_matrix": {"layout": "actual-row/predicted-column",
                             "class_names": list(cm.class_names),
                             "counts": cm.counts.tolist()},
        "classes": [r.to_dict() for r in class_report(cm)],
        "accuracy": float(np.trace(cm.counts) / cm.total) if cm.total else None,
        "timings": {"reduce_fit_s": float(reduce_summary.get("fit_s", 0.0)),
                    "train_s": timings["train"], "test_s": timings["test"],
                    "test_per_class_s": per_class},
    }
    return model, report


def _timed_predict(model, X):
    return timed("predict", lambda: predict(model, X) if len(X) else np.zeros(0))


def strip_timings(report: dict) -> dict:
    out = dict(report)
    out.pop("timings", None)
    return out


def report_rows(report: dict) -> list[dict]:
    t = report["timings"]
    rows = []
    for cr in report["classes"]:
        rows.append({"class": cr["name"], "variant": report["variant"],
                     "DR": cr["detection_rate"], "FAR_tabular": cr["far_tabular"],
                     "FAR_textual": cr["far_textual"], "train_s": t["train_s"],
                     "test_s": t["test_per_class_s"].get(cr["name"])})
    return rows


def render_csv(reports: list[dict]) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        for row in report_rows(report):
            writer.writerow({k: "" if v is None else (f"{v:.6g}" if isinstance(v, float) else v)
                             for k, v in row.items()})
    return buf.getvalue()


def write_comparison(reports: list[dict], out_dir, csv_name="comparison.csv",
                     svg=True, write_csv=True) -> dict:
    """Combined CSV plus the four per-class grouped bar charts."""
    if not reports:
        raise ConfigError("no reports given")
    classes = [c["name"] for c in reports[0]["classes"]]
    for r in reports[1:]:
        if [c["name"] for c in r["classes"]] != classes:
            raise DataError(f"report {r['variant']!r} has a different class set")
    out_dir = Path(out_dir)
    paths = {}
    if write_csv:
        paths["csv"] = out_dir / csv_name
        persist.atomic_write(paths["csv"], render_csv(reports))
    if svg:
        labels = _unique_labels([r["variant"] for r in reports])
        for fname, (field, ylabel, title) in FIGURES.items():
            series = {}
            for label, report in zip(labels, reports):
                rows = {row["class"]: row for row in report_rows(report)}
                if field in ("detection_rate", "far_tabular"):
                    key = {"detection_rate": "DR", "far_tabular": "FAR_tabular"}[field]
                else:
                    key = field
                series[label] = [rows[c][key] for c in classes]
            paths[fname] = out_dir / fname
            persist.atomic_write(paths[fname], grouped_bars(classes, series, ylabel, title))
    return paths


def _unique_labels(labels):
    seen, out = {}, []
    for lab in labels:
        seen[lab] = seen.get(lab, 0) + 1
        out.append(lab if seen[lab] == 1 else f"{lab} ({seen[lab]})")
    return out


def cmd_train_eval(cfg: PipelineConfig) -> dict:
    out = cfg.out_dir
    summary_path = out / "reduce_summary.json"
    if not summary_path.is_file():
        raise DataError(f"no reduced datasets in {out}; run 'reduce' first")
    reduce_summary = json.loads(summary_path.read_text())
    tag = reduce_summary["tag"]
    train = persist.load(out / f"{tag}_train.npz")
    test = persist.load(out / f"{tag}_test.npz")
    model, report = evaluate(train, test, cfg, reduce_summary)
    formats = cfg.formats
    artifacts = {"classifier": "classifier.npz"}
    if "json" in formats:
        artifacts["json"] = "report.json"
    if "csv" in formats:
        artifacts["csv"] = "report.csv"
    if "svg" in formats:
        artifacts.update({f: f for f in FIGURES})
    artifacts["confusion"] = "confusion.txt"
    report["artifacts"] = artifacts
    persist.save(out / "classifier.npz", model)
    cm = ConfusionMatrix(np.array(report["confusion_matrix"]["counts"]),
                         report["confusion_matrix"]["class_names"])
    persist.atomic_write(out / "confusion.txt", cm.render() + "\n")
    write_comparison([report], out, "report.csv", svg="svg" in formats,
                     write_csv="csv" in formats)
    if "json" in formats:
        _write_json(out / "report.json", report)
    return report


def cmd_report(report_paths, out_dir) -> dict:
    reports = []
    for p in report_paths:
        p = Path(p)
        if not p.is_file():
            raise DataError(f"report not found: {p}")
        reports.append(json.loads(p.read_text()))
    return write_comparison(reports, out_dir)


def cmd_run(cfg: PipelineConfig) -> dict:
    cmd_ingest(cfg)
    cmd_reduce(cfg)
    return cmd_train_eval(cfg)
