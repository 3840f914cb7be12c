"""Flat ``section.key=value`` pipeline configuration."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import ConfigError

# key -> (type, default); a default of None means "unset"
DEFAULTS = {
    "paths.train": (str, None),
    "paths.test": (str, None),
    "paths.schema": (str, None),
    "paths.labels": (str, None),
    "ingest.header": (bool, False),
    "ingest.unknown_policy": (str, "error"),
    "ingest.unknown_category": (str, None),
    "reducer.kind": (str, "none"),
    "reducer.mode": (str, "project"),
    "reducer.select_k": (int, 12),
    "reducer.lda.r": (int, 4),
    "reducer.lda.ridge": (float, None),
    "reducer.gda.r": (int, 4),
    "reducer.gda.kernel": (str, "gaussian"),
    "reducer.gda.sigma": (float, 0.1),
    "reducer.gda.degree": (int, 2),
    "reducer.gda.offset": (float, 1.0),
    "reducer.gda.ridge": (float, None),
    "reducer.gda.rank_tol": (float, 1e-10),
    "reducer.gda.budget": (int, 2000),
    "reducer.gda.min_per_class": (int, 50),
    "classifier.kind": (str, "tree"),
    "classifier.tree.min_leaf": (int, 2),
    "classifier.tree.max_depth": (int, 30),
    "classifier.tree.min_gain": (float, 1e-6),
    "classifier.mlp.hidden": (int, 20),
    "classifier.mlp.epochs": (int, 50),
    "classifier.mlp.rate": (float, 0.1),
    "classifier.mlp.batch": (int, 32),
    "run.seed": (int, 0),
    "run.name": (str, None),
    "out.dir": (str, "out"),
    "report.formats": (str, "json,csv,svg"),
}

CHOICES = {
    "reducer.kind": ("none", "lda", "gda"),
    "reducer.mode": ("project", "select"),
    "reducer.gda.kernel": ("gaussian", "linear", "polynomial"),
    "classifier.kind": ("tree", "mlp"),
    "ingest.unknown_policy": ("error", "assign-category"),
}

PATH_KEYS = ("paths.train", "paths.test", "paths.schema", "paths.labels")
REPORT_FORMATS = ("json", "csv", "svg")


def _convert(key, raw: str):
    typ, _ = DEFAULTS[key]
    raw = raw.strip()
    if raw.lower() in ("", "auto", "none") and key not in CHOICES:
        return None
    try:
        if typ is bool:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        return typ(raw)
    except ValueError:
        raise ConfigError(f"{key}: cannot read {raw!r} as {typ.__name__}") from None


@dataclass
class PipelineConfig:
    values: dict = field(default_factory=lambda: {k: d for k, (_, d) in DEFAULTS.items()})
    base_dir: Path = field(default_factory=Path.cwd)

    def __getitem__(self, key):
        return self.values[key]

    def set(self, key: str, raw) -> None:
        if key not in DEFAULTS:
            raise ConfigError(f"unknown config key {key!r}")
        value = _convert(key, raw) if isinstance(raw, str) else raw
        if key in CHOICES and value not in CHOICES[key]:
            raise ConfigError(f"{key} must be one of {CHOICES[key]}, got {value!r}")
        self.values[key] = value

    def path(self, key) -> Path | None:
        v = self.values[key]
        if v is None:
            return None
        p = Path(v)
        return p if p.is_absolute() else self.base_dir / p

    @property
    def out_dir(self) -> Path:
        return self.path("out.dir")

    @property
    def formats(self) -> list[str]:
        fmts = [f.strip() for f in self.values["report.formats"].split(",") if f.strip()]
        bad = [f for f in fmts if f not in REPORT_FORMATS]
        if bad:
            raise ConfigError(f"unknown report formats {bad}")
        return fmts

    def section(self, prefix: str) -> dict:
        prefix = prefix.rstrip(".") + "."
        return {k[len(prefix):]: v for k, v in self.values.items() if k.startswith(prefix)
                and "." not in k[len(prefix):]}

    def variant_name(self) -> str:
        if self.values["run.name"]:
            return self.values["run.name"]
        red = {"none": "ORIG", "lda": "LDA", "gda": "GDA"}[self.values["reducer.kind"]]
        clf = {"tree": "C4.5", "mlp": "ANN"}[self.values["classifier.kind"]]
        return f"{red}/{clf}"

    def validate(self, require=("paths.train", "paths.test")) -> "PipelineConfig":
        for key in require:
            if self.values[key] is None:
                raise ConfigError(f"missing required key {key}")
        for key in PATH_KEYS:
            p = self.path(key)
            if p is not None and not p.is_file():
                raise ConfigError(f"{key}: file not found: {p}")
        if (self.values["ingest.unknown_policy"] == "assign-category"
                and not self.values["ingest.unknown_category"]):
            raise ConfigError("ingest.unknown_category is required with assign-category")
        self.formats
        return self

    def echo(self) -> dict:
        """Config values with paths as written, for embedding in reports."""
        return {k: self.values[k] for k in sorted(self.values)}


def parse_config(text: str, base_dir: Path | None = None, source="<config>") -> PipelineConfig:
    cfg = PipelineConfig(base_dir=base_dir or Path.cwd())
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected key=value")
        key, raw = (s.strip() for s in line.split("=", 1))
        try:
            cfg.set(key, raw)
        except ConfigError as e:
            raise ConfigError(f"{source}:{lineno}: {e}") from None
    return cfg


def load_config(path) -> PipelineConfig:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    return parse_config(path.read_text(), path.parent.resolve(), str(path))
