"""Multiclass confusion matrices, detection/false-alarm rates and timing capture.

Counts are stored actual-row / predicted-column. Two false-alarm conventions are
provided: :func:`far_textual` is the one-vs-rest ``FP / (FP + TN)``;
:func:`far_tabular` is ``100 - precision``, which is what per-class
summary tables of this kind usually list under "FAR".
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError


@dataclass(frozen=True, eq=False)
class ConfusionMatrix:
    counts: np.ndarray
    class_names: tuple

    def __post_init__(self):
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape[0] != counts.shape[1]:
            raise DataError(f"confusion matrix must be square, got {counts.shape}")
        if np.any(counts < 0):
            raise DataError("confusion matrix counts must be nonnegative")
        if len(self.class_names) != counts.shape[0]:
            raise DataError("class name count does not match matrix order")
        object.__setattr__(self, "counts", counts.astype(np.int64))
        object.__setattr__(self, "class_names", tuple(self.class_names))

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def index(self, c) -> int:
        if isinstance(c, str):
            try:
                return self.class_names.index(c)
            except ValueError:
                raise DataError(f"unknown class {c!r}") from None
        if not 0 <= c < self.n_classes:
            raise DataError(f"class id {c} out of range")
        return int(c)

    def one_vs_rest(self, c):
        """``(TP, FP, FN, TN)`` for class ``c``."""
        c = self.index(c)
        tp = int(self.counts[c, c])
        fn = int(self.counts[c].sum()) - tp
        fp = int(self.counts[:, c].sum()) - tp
        return tp, fp, fn, self.total - tp - fp - fn

    def transposed(self) -> np.ndarray:
        """Predicted-row / actual-column layout."""
        return self.counts.T.copy()

    def to_predictions(self):
        """Expand back to ``(truth, pred)`` streams in row-major cell order."""
        truth, pred = [], []
        for a in range(self.n_classes):
            for p in range(self.n_classes):
                k = int(self.counts[a, p])
                truth.append(np.full(k, a, dtype=np.int64))
                pred.append(np.full(k, p, dtype=np.int64))
        return np.concatenate(truth), np.concatenate(pred)

    def render(self, predicted_rows: bool = False, digits: int = 2) -> str:
        """Text table with a "% Correct" column and row."""
        counts = self.transposed() if predicted_rows else self.counts
        rowp, colp = table_percentages(self)
        if predicted_rows:
            rowp, colp = colp, rowp
        names = self.class_names
        width = max(8, max(len(n) for n in names) + 1, len(str(counts.max())) + 1)
        head = "".ljust(width) + "".join(n.rjust(width) for n in names) + "% Correct".rjust(11)
        lines = [head]

        def pct(v):
            return "-" if v is None else f"{v:.{digits}f}"

        for i, n in enumerate(names):
            lines.append(n.ljust(width) + "".join(str(v).rjust(width) for v in counts[i])
                         + pct(rowp[i]).rjust(11))
        lines.append("% Correct".ljust(width) + "".join(pct(v).rjust(width) for v in colp))
        return "\n".join(lines)


def confusion_matrix(truth, pred, C: int, class_names=None) -> ConfusionMatrix:
    truth = np.asarray(truth, dtype=np.int64).ravel()
    pred = np.asarray(pred, dtype=np.int64).ravel()
    if truth.shape != pred.shape:
        raise DataError(f"length mismatch: {truth.size} truths vs {pred.size} predictions")
    for name, v in (("truth", truth), ("prediction", pred)):
        if v.size and (v.min() < 0 or v.max() >= C):
            raise DataError(f"{name} id out of range [0, {C})")
    counts = np.bincount(truth * C + pred, minlength=C * C).reshape(C, C)
    names = tuple(class_names) if class_names is not None else tuple(str(i) for i in range(C))
    return ConfusionMatrix(counts, names)


def detection_rate(cm: ConfusionMatrix, c) -> float:
    """``100 * TP / (TP + FN)``."""
    c = cm.index(c)
    support = int(cm.counts[c].sum())
    if support == 0:
        raise DataError(f"class {cm.class_names[c]!r} has no support")
    return 100.0 * cm.counts[c, c] / support


def far_textual(cm: ConfusionMatrix, c) -> float:
    """One-vs-rest ``100 * FP / (FP + TN)``."""
    tp, fp, fn, tn = cm.one_vs_rest(c)
    if fp + tn == 0:
        raise DataError(f"class {cm.class_names[cm.index(c)]!r}: no negatives, FAR undefined")
    return 100.0 * fp / (fp + tn)


def precision(cm: ConfusionMatrix, c) -> float:
    c = cm.index(c)
    col = int(cm.counts[:, c].sum())
    if col == 0:
        raise DataError(f"class {cm.class_names[c]!r} was never predicted")
    return 100.0 * cm.counts[c, c] / col


def far_tabular(cm: ConfusionMatrix, c) -> float:
    """``100 - precision``: share of the predictions for ``c`` that were wrong."""
    c = cm.index(c)
    col = int(cm.counts[:, c].sum())
    if col == 0:
        raise DataError(f"class {cm.class_names[c]!r} was never predicted")
    return 100.0 * (col - cm.counts[c, c]) / col


def table_percentages(cm: ConfusionMatrix):
    """Row and column "% Correct" lists; ``None`` where the sum is zero."""
    diag = np.diag(cm.counts).astype(np.float64)
    rows = cm.counts.sum(axis=1)
    cols = cm.counts.sum(axis=0)
    rowp = [100.0 * d / s if s else None for d, s in zip(diag, rows)]
    colp = [100.0 * d / s if s else None for d, s in zip(diag, cols)]
    return rowp, colp


@dataclass(frozen=True)
class ClassReport:
    name: str
    tp: int
    fp: int
    fn: int
    tn: int
    support: int
    detection_rate: float | None
    far_textual: float | None
    far_tabular: float | None
    precision: float | None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def _maybe(fn, *args):
    try:
        return fn(*args)
    except DataError:
        return None


def class_report(cm: ConfusionMatrix) -> list[ClassReport]:
    out = []
    for c, name in enumerate(cm.class_names):
        tp, fp, fn, tn = cm.one_vs_rest(c)
        out.append(ClassReport(name, tp, fp, fn, tn, tp + fn,
                               _maybe(detection_rate, cm, c), _maybe(far_textual, cm, c),
                               _maybe(far_tabular, cm, c), _maybe(precision, cm, c)))
    return out


@dataclass
class Timings:
    """Wall-clock durations (seconds) keyed by tag, in insertion order."""

    durations: dict = field(default_factory=dict)

    def timed(self, tag: str, thunk):
        result, elapsed = timed(tag, thunk)
        self.durations[tag] = elapsed
        return result

    def __getitem__(self, tag):
        return self.durations[tag]


def timed(tag: str, thunk, report: Timings | None = None):
    """Run ``thunk()``; return ``(result, seconds)`` measured on the monotonic clock."""
    start = time.perf_counter()
    result = thunk()
    elapsed = time.perf_counter() - start
    if report is not None:
        report.durations[tag] = elapsed
    return result, elapsed
