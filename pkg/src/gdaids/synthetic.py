"""Small seeded datasets used by tests, examples and the CLI demo."""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .ingest import NumericDataset


def rings(n: int = 400, radii=(1.0, 1.3), noise: float = 0.05, seed: int = 0,
          class_names=("inner", "outer")) -> NumericDataset:
    """Two noisy concentric circles, ``n // 2`` points each."""
    rng = np.random.default_rng(seed)
    half = n // 2
    parts, labels = [], []
    for c, (radius, m) in enumerate(zip(radii, (half, n - half))):
        theta = rng.uniform(0.0, 2.0 * np.pi, m)
        rad = radius + noise * rng.standard_normal(m)
        parts.append(np.column_stack([rad * np.cos(theta), rad * np.sin(theta)]))
        labels.append(np.full(m, c))
    X = np.vstack(parts)
    y = np.concatenate(labels)
    order = rng.permutation(n)
    return NumericDataset(X[order], y[order], class_names, ("x", "y"))


def two_blobs(n: int = 60, seed: int = 0, shift=(2.0, 1.0), scale=(1.0, 0.5)) -> NumericDataset:
    """Two anisotropic Gaussian classes in 2-D (full-rank scatter)."""
    rng = np.random.default_rng(seed)
    half = n // 2
    X = rng.standard_normal((n, 2)) * np.asarray(scale)
    y = np.repeat([0, 1], [half, n - half])
    X[y == 1] += np.asarray(shift)
    return NumericDataset(X, y, ("a", "b"), ("x1", "x2"))


def split(ds: NumericDataset, test_fraction: float = 0.5, seed: int = 0):
    """Class-stratified train/test split."""
    rng = np.random.default_rng(seed)
    test = []
    for c in range(ds.class_count):
        members = np.flatnonzero(ds.y == c)
        k = int(round(test_fraction * len(members)))
        test.extend(rng.choice(members, size=k, replace=False))
    mask = np.zeros(ds.n_rows, bool)
    mask[np.asarray(test, dtype=np.int64)] = True
    return ds.subset(np.flatnonzero(~mask)), ds.subset(np.flatnonzero(mask))


_KDD_TOKENS = {
    "protocol_type": ("tcp", "udp", "icmp"),
    "service": ("http", "smtp", "ftp_data", "private", "ecr_i", "domain_u", "telnet"),
    "flag": ("SF", "S0", "REJ", "RSTO"),
}
_KDD_ATTACKS = {"Normal": ("normal",), "DOS": ("smurf", "neptune", "back"),
                "R2L": ("guess_passwd", "warezclient"), "U2R": ("buffer_overflow", "rootkit"),
                "Probe": ("ipsweep", "portsweep", "satan")}


def kdd_like_lines(n: int = 200, seed: int = 0, schema=None, weights=None) -> str:
    """Random records in the 41-column KDD text format (label with trailing period).

    Values carry a mild class-dependent shift so the classes are learnable. This is
    a format fixture, not a model of real traffic.
    """
    from .ingest import CATEGORIES, CONTINUOUS, load_schema

    schema = load_schema() if schema is None else schema
    rng = np.random.default_rng(seed)
    weights = np.full(len(CATEGORIES), 1 / len(CATEGORIES)) if weights is None else weights
    classes = rng.choice(len(CATEGORIES), size=n, p=np.asarray(weights, float))
    lines = []
    for c in classes:
        fields = []
        for j, (name, kind) in enumerate(schema):
            if kind == CONTINUOUS:
                v = max(0.0, rng.normal(loc=(c + 1) * (j % 5), scale=1.0))
                fields.append(f"{v:.4g}")
            elif name in _KDD_TOKENS:
                toks = _KDD_TOKENS[name]
                fields.append(toks[(c + int(rng.integers(0, 2))) % len(toks)])
            else:
                fields.append(str(int(rng.random() < 0.2 + 0.15 * c)))
        fields.append(rng.choice(_KDD_ATTACKS[CATEGORIES[c]]) + ".")
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


def write_csv(ds: NumericDataset, path, labels) -> None:
    """Write ``ds`` in the comma-separated record format, class c labelled ``labels[c]``."""
    from .persist import atomic_write

    lines = [",".join([*(repr(float(v)) for v in row), labels[c] + "."])
             for row, c in zip(ds.X, ds.y)]
    atomic_write(path, "\n".join(lines) + "\n")


def write_rings_corpus(directory, n: int = 400, seed: int = 1, split_seed: int = 2,
                       labels=("normal", "smurf"), config: dict | None = None) -> Path:
    """Write a rings train/test pair, a two-column schema and a config file into
    ``directory``; returns the config path. ``config`` adds or overrides entries."""
    from .persist import atomic_write

    directory = Path(directory)
    train, test = split(rings(n, seed=seed), 0.5, seed=split_seed)
    write_csv(train, directory / "train.csv", labels)
    write_csv(test, directory / "test.csv", labels)
    atomic_write(directory / "schema.txt", "x,continuous\ny,continuous\n")
    entries = {"paths.train": "train.csv", "paths.test": "test.csv",
               "paths.schema": "schema.txt", "reducer.gda.sigma": "0.5", "run.seed": "0"}
    entries.update({k: str(v) for k, v in (config or {}).items()})
    cfg = directory / "rings.cfg"
    atomic_write(cfg, "".join(f"{k}={v}\n" for k, v in entries.items()))
    return cfg
