"""Parsing, label mapping, encoding and subsampling of KDD-style connection records."""

from __future__ import annotations

import io
import logging
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import ConfigError, DataError, ParseError

log = logging.getLogger(__name__)

CATEGORIES = ("Normal", "DOS", "R2L", "U2R", "Probe")
CONTINUOUS = "continuous"
DISCRETE = "discrete"
_KINDS = (CONTINUOUS, DISCRETE)


def _read_pairs(text: str, source: str) -> list[tuple[str, str]]:
    pairs = []
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split(",")]
        if len(parts) != 2 or not all(parts):
            raise ConfigError(f"{source}:{lineno}: expected 'a,b', got {line!r}")
        pairs.append((parts[0], parts[1]))
    return pairs


def _data_text(name: str) -> str:
    return resources.files("gdaids.data").joinpath(name).read_text()


def load_schema(path: str | Path | None = None) -> list[tuple[str, str]]:
    """Read a ``name,kind`` schema file; ``None`` gives the built-in 41-column KDD schema."""
    if path is None:
        text, source = _data_text("kdd_schema.txt"), "<kdd_schema>"
    else:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"schema file not found: {path}")
        text, source = path.read_text(), str(path)
    schema = _read_pairs(text, source)
    for name, kind in schema:
        if kind not in _KINDS:
            raise ConfigError(f"{source}: column {name!r} has unknown kind {kind!r}")
    names = [n for n, _ in schema]
    if len(set(names)) != len(names):
        raise ConfigError(f"{source}: duplicate column names")
    if not schema:
        raise ConfigError(f"{source}: empty schema")
    return schema


@dataclass(frozen=True)
class LabelMap:
    """Attack name to category. ``unknown_policy`` is ``"error"`` or ``"assign-category"``;
    the latter sends unknown names to ``fallback``."""

    entries: dict
    unknown_policy: str = "error"
    fallback: str | None = None

    def __post_init__(self):
        if self.entries.get("normal") != "Normal":
            raise ConfigError("label map must send 'normal' to Normal")
        bad = {c for c in self.entries.values() if c not in CATEGORIES}
        if bad:
            raise ConfigError(f"label map uses unknown categories {sorted(bad)}")
        if self.unknown_policy not in ("error", "assign-category"):
            raise ConfigError("unknown_policy must be 'error' or 'assign-category'")
        if self.unknown_policy == "assign-category" and self.fallback not in CATEGORIES:
            raise ConfigError(f"fallback category {self.fallback!r} is not one of {CATEGORIES}")

    def category(self, name: str) -> str:
        cat = self.entries.get(name.lower())
        if cat is not None:
            return cat
        if self.unknown_policy == "error":
            raise DataError(f"unknown attack name {name!r}")
        return self.fallback


def load_label_map(path: str | Path | None = None, unknown_policy="error",
                   fallback=None) -> LabelMap:
    if path is None:
        text, source = _data_text("kdd_labels.txt"), "<kdd_labels>"
    else:
        path = Path(path)
        if not path.is_file():
            raise ConfigError(f"label map file not found: {path}")
        text, source = path.read_text(), str(path)
    entries = {name.lower(): cat for name, cat in _read_pairs(text, source)}
    return LabelMap(entries, unknown_policy, fallback)


@dataclass(frozen=True, eq=False)
class RawDataset:
    """Parsed records stored column-wise: a float block for continuous columns and a
    string block for discrete ones, both in schema order."""

    columns: tuple
    continuous: np.ndarray
    discrete: np.ndarray
    labels: np.ndarray
    source: str | None = None
    line_count: int = 0

    @property
    def n_rows(self) -> int:
        return len(self.labels)

    @property
    def continuous_names(self) -> list[str]:
        return [n for n, k in self.columns if k == CONTINUOUS]

    @property
    def discrete_names(self) -> list[str]:
        return [n for n, k in self.columns if k == DISCRETE]

    def row(self, i: int) -> list:
        ci = di = 0
        out = []
        for _, kind in self.columns:
            if kind == CONTINUOUS:
                out.append(float(self.continuous[i, ci]))
                ci += 1
            else:
                out.append(self.discrete[i, di])
                di += 1
        return out + [self.labels[i]]


def _lines(stream) -> Iterable[str]:
    if isinstance(stream, (bytes, bytearray)):
        return io.StringIO(stream.decode("utf-8"))
    if isinstance(stream, str):
        return io.StringIO(stream)
    if isinstance(stream, io.TextIOBase):
        return stream
    return io.TextIOWrapper(stream, encoding="utf-8", newline=None)


def parse_kdd_csv(stream, schema: Sequence[tuple[str, str]] | None = None, *,
                  header: bool = False, source: str | None = None) -> RawDataset:
    """Parse comma-separated connection records (features then label).

    ``stream`` may be a binary or text file object, bytes, or a string. A trailing
    period on the label is stripped. With ``header=True`` the first non-empty line is
    skipped.
    """
    schema = list(schema) if schema is not None else load_schema()
    n_fields = len(schema) + 1
    cont_idx = [i for i, (_, k) in enumerate(schema) if k == CONTINUOUS]
    disc_idx = [i for i, (_, k) in enumerate(schema) if k == DISCRETE]

    rows, linenos = [], []
    total_lines = 0
    skip_header = header
    for lineno, line in enumerate(_lines(stream), 1):
        total_lines = lineno
        line = line.strip()
        if not line:
            continue
        if skip_header:
            skip_header = False
            continue
        fields = line.split(",")
        if len(fields) != n_fields:
            raise ParseError(f"expected {n_fields} fields, found {len(fields)}", lineno, source)
        rows.append(fields)
        linenos.append(lineno)
    if not rows:
        raise ParseError("empty input", None, source or "<stream>")

    cont = np.empty((len(rows), len(cont_idx)), dtype=np.float64)
    for j, col in enumerate(cont_idx):
        values = [r[col].strip() for r in rows]
        try:
            cont[:, j] = np.asarray(values, dtype=np.float64)
        except ValueError:
            cont[:, j] = 0.0
            _locate_bad_number(values, linenos, schema[col][0], source)
        if not np.isfinite(cont[:, j]).all():
            bad = int(np.flatnonzero(~np.isfinite(cont[:, j]))[0])
            raise ParseError(f"non-finite value in column {schema[col][0]!r}",
                             linenos[bad], source)
    disc = np.empty((len(rows), len(disc_idx)), dtype=object)
    for j, col in enumerate(disc_idx):
        disc[:, j] = [r[col].strip() for r in rows]
    labels = np.empty(len(rows), dtype=object)
    for i, r in enumerate(rows):
        lab = r[-1].strip()
        if lab.endswith("."):
            lab = lab[:-1]
        if not lab:
            raise ParseError("empty label", linenos[i], source)
        labels[i] = lab
    return RawDataset(tuple(schema), cont, disc, labels, source, total_lines)


def _locate_bad_number(values, linenos, column, source):
    for v, lineno in zip(values, linenos):
        try:
            float(v)
        except ValueError:
            raise ParseError(f"column {column!r}: cannot parse {v!r} as a number",
                             lineno, source) from None
    raise ParseError(f"column {column!r}: unparseable number", None, source)


def read_kdd_file(path: str | Path, schema=None, header=False) -> RawDataset:
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with open(path, "rb") as fh:
        return parse_kdd_csv(fh, schema, header=header, source=str(path))


def map_labels(ds: RawDataset, label_map: LabelMap):
    """Return ``(y, histogram)``: class ids into :data:`CATEGORIES` and a
    category -> count dict covering all five categories."""
    index = {c: i for i, c in enumerate(CATEGORIES)}
    cache = {}
    y = np.empty(ds.n_rows, dtype=np.int64)
    for i, lab in enumerate(ds.labels):
        cid = cache.get(lab)
        if cid is None:
            cid = cache[lab] = index[label_map.category(lab)]
        y[i] = cid
    counts = np.bincount(y, minlength=len(CATEGORIES))
    return y, dict(zip(CATEGORIES, (int(c) for c in counts)))


@dataclass(frozen=True, eq=False)
class Encoder:
    """Frozen one-hot vocabularies and standardization statistics."""

    columns: tuple
    vocabularies: dict
    means: np.ndarray
    stds: np.ndarray
    zero_variance: frozenset = field(default_factory=frozenset)

    @property
    def feature_names(self) -> list[str]:
        names = []
        for name, kind in self.columns:
            if kind == CONTINUOUS:
                names.append(name)
            else:
                names.extend(f"{name}={tok}" for tok in self.vocabularies[name])
        return names

    @property
    def feature_origins(self) -> list[str]:
        origins = []
        for name, kind in self.columns:
            width = 1 if kind == CONTINUOUS else len(self.vocabularies[name])
            origins.extend([name] * width)
        return origins


def fit_encoder(ds: RawDataset) -> Encoder:
    if ds.n_rows == 0:
        raise DataError("cannot fit an encoder on an empty dataset")
    vocab = {}
    for j, name in enumerate(ds.discrete_names):
        # dict preserves first-occurrence order
        vocab[name] = tuple(dict.fromkeys(ds.discrete[:, j]))
    means = ds.continuous.mean(axis=0)
    stds = ds.continuous.std(axis=0)
    # exact test: a column is zero-variance only when every value is identical
    flat = np.ptp(ds.continuous, axis=0) == 0 if ds.n_rows else np.ones(0, bool)
    zero = frozenset(n for n, f in zip(ds.continuous_names, flat) if f)
    return Encoder(ds.columns, vocab, means, stds, zero)


@dataclass(frozen=True, eq=False)
class NumericDataset:
    X: np.ndarray
    y: np.ndarray
    class_names: tuple = CATEGORIES
    feature_names: tuple = ()
    feature_origins: tuple = ()
    tag: str | None = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim != 2:
            raise DataError("X must be two-dimensional")
        y = np.asarray(self.y, dtype=np.int64)
        if y.shape != (X.shape[0],):
            raise DataError(f"label vector has length {y.shape}, expected {X.shape[0]}")
        C = len(self.class_names)
        if y.size and (y.min() < 0 or y.max() >= C):
            raise DataError(f"class ids must lie in [0, {C})")
        fnames = tuple(self.feature_names) or tuple(f"f{j}" for j in range(X.shape[1]))
        origins = tuple(self.feature_origins) or fnames
        if len(fnames) != X.shape[1] or len(origins) != X.shape[1]:
            raise DataError("feature name count does not match column count")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "class_names", tuple(self.class_names))
        object.__setattr__(self, "feature_names", fnames)
        object.__setattr__(self, "feature_origins", origins)

    @property
    def n_rows(self) -> int:
        return self.X.shape[0]

    @property
    def n_features(self) -> int:
        return self.X.shape[1]

    @property
    def class_count(self) -> int:
        return len(self.class_names)

    @property
    def class_sizes(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.class_count)

    def subset(self, rows) -> "NumericDataset":
        rows = np.asarray(rows)
        return NumericDataset(self.X[rows], self.y[rows], self.class_names,
                              self.feature_names, self.feature_origins, self.tag)

    def replace(self, **changes) -> "NumericDataset":
        fields = dict(X=self.X, y=self.y, class_names=self.class_names,
                      feature_names=self.feature_names, feature_origins=self.feature_origins,
                      tag=self.tag)
        fields.update(changes)
        return NumericDataset(**fields)

    def compact(self):
        """Drop empty classes. Returns ``(dataset, kept_class_ids)``."""
        kept = np.flatnonzero(self.class_sizes > 0)
        remap = np.full(self.class_count, -1, dtype=np.int64)
        remap[kept] = np.arange(len(kept))
        return (self.replace(y=remap[self.y],
                             class_names=tuple(self.class_names[k] for k in kept)), kept)

    def original_features(self) -> list[str]:
        return list(dict.fromkeys(self.feature_origins))


def encode(enc: Encoder, ds: RawDataset, labels=None, class_names=CATEGORIES) -> NumericDataset:
    """One-hot the discrete columns, standardize the continuous ones."""
    if tuple(ds.columns) != tuple(enc.columns):
        raise DataError("dataset columns do not match the encoder's columns")
    if labels is None:
        labels = np.zeros(ds.n_rows, dtype=np.int64)
    blocks = []
    ci = di = 0
    for name, kind in enc.columns:
        if kind == CONTINUOUS:
            if name in enc.zero_variance:
                col = np.zeros(ds.n_rows)
            else:
                col = (ds.continuous[:, ci] - enc.means[ci]) / enc.stds[ci]
            blocks.append(col[:, None])
            ci += 1
        else:
            vocab = enc.vocabularies[name]
            lookup = {tok: k for k, tok in enumerate(vocab)}
            block = np.zeros((ds.n_rows, len(vocab)))
            idx = np.fromiter((lookup.get(t, -1) for t in ds.discrete[:, di]),
                              dtype=np.int64, count=ds.n_rows)
            seen = idx >= 0
            block[np.flatnonzero(seen), idx[seen]] = 1.0
            blocks.append(block)
            di += 1
    X = np.hstack(blocks) if blocks else np.zeros((ds.n_rows, 0))
    return NumericDataset(X, labels, class_names, tuple(enc.feature_names),
                          tuple(enc.feature_origins))


def allocate(class_sizes: Sequence[int], budget: int, min_per_class: int) -> np.ndarray:
    """Per-class sample counts summing to ``budget``.

    Each class first receives ``min(min_per_class, size)``. The remaining budget is
    shared in proportion to each class's leftover rows with largest-remainder
    rounding (ties to the lower class id), which never exceeds a class's size.
    """
    sizes = np.asarray(class_sizes, dtype=np.int64)
    total = int(sizes.sum())
    if budget >= total:
        return sizes.copy()
    floors = np.minimum(min_per_class, sizes)
    rest = budget - int(floors.sum())
    room = sizes - floors
    # exact rational quotas: rest * room_c / sum(room)
    denom = int(room.sum())
    num = rest * room
    share = num // denom
    remainder = num - share * denom
    short = rest - int(share.sum())
    order = sorted(range(len(sizes)), key=lambda c: (-int(remainder[c]), c))
    for c in order[:short]:
        share[c] += 1
    return floors + share


def stratified_sample(ds: NumericDataset, budget: int, min_per_class: int,
                      seed: int) -> NumericDataset:
    """Class-stratified subsample. Rows keep their original relative order."""
    if budget < 1 or min_per_class < 1:
        raise ConfigError("budget and min_per_class must be positive")
    if budget < ds.class_count * min_per_class:
        raise ConfigError(f"budget {budget} is below {ds.class_count} classes x "
                          f"{min_per_class} minimum rows")
    if budget >= ds.n_rows:
        return ds
    counts = allocate(ds.class_sizes, budget, min_per_class)
    rng = np.random.default_rng(seed)
    keep = []
    for c, k in enumerate(counts):
        members = np.flatnonzero(ds.y == c)
        if k:
            keep.append(rng.choice(members, size=int(k), replace=False))
    rows = np.sort(np.concatenate(keep)) if keep else np.zeros(0, dtype=np.int64)
    log.debug("stratified sample allocation %s", counts.tolist())
    return ds.subset(rows)


def resolve_features(ds: NumericDataset, names_or_indices) -> np.ndarray:
    by_origin = {}
    for j, origin in enumerate(ds.feature_origins):
        by_origin.setdefault(origin.lower(), []).append(j)
    by_name = {n.lower(): j for j, n in enumerate(ds.feature_names)}
    cols = set()
    for item in names_or_indices:
        if isinstance(item, (int, np.integer)):
            if not 0 <= item < ds.n_features:
                raise DataError(f"feature index {item} out of range")
            cols.add(int(item))
            continue
        key = str(item).strip().lower()
        if key in by_origin:
            cols.update(by_origin[key])
        elif key in by_name:
            cols.add(by_name[key])
        else:
            raise DataError(f"unknown feature {item!r}")
    return np.array(sorted(cols), dtype=np.int64)


def select_features(ds: NumericDataset, names_or_indices) -> NumericDataset:
    """Keep the encoded columns of the named features (a discrete feature brings its
    whole one-hot block). Integers address encoded columns directly."""
    cols = resolve_features(ds, names_or_indices)
    return ds.replace(X=ds.X[:, cols],
                      feature_names=tuple(ds.feature_names[j] for j in cols),
                      feature_origins=tuple(ds.feature_origins[j] for j in cols))


def histogram(y, class_names=CATEGORIES) -> dict:
    counts = np.bincount(np.asarray(y, dtype=np.int64), minlength=len(class_names))
    return dict(zip(class_names, (int(c) for c in counts)))
