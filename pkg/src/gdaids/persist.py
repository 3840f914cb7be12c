"""Single-file container for models and datasets.

A container is an uncompressed ``.npz`` archive holding named little-endian arrays
(floats as ``<f8``, integers as ``<i8``) plus a ``__header__`` entry: UTF-8 JSON with
the format name, version, object kind, free-form metadata and an array manifest.
Nothing is pickled.
"""

from __future__ import annotations

import json
import os
import tempfile
import zipfile
from pathlib import Path

import numpy as np

from .classifiers import MlpModel, Node, TreeModel
from .eigencore import CenteringStats, KernelSpec
from .errors import DataError
from .gda import GdaModel
from .ingest import Encoder, NumericDataset
from .lda import LdaModel, ScatterPair

FORMAT = "gdaids-container"
VERSION = 1


def atomic_write(path, data: bytes | str) -> None:
    """Write to a sibling temp file, then rename over ``path``."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if isinstance(data, str):
        data = data.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _le(a) -> np.ndarray:
    a = np.asarray(a)
    if a.dtype.kind == "f":
        return a.astype("<f8")
    if a.dtype.kind in "iub":
        return a.astype("<i8")
    raise DataError(f"unsupported array dtype {a.dtype}")


def save_container(path, kind: str, meta: dict, arrays: dict) -> None:
    arrays = {k: _le(v) for k, v in arrays.items()}
    header = {"format": FORMAT, "version": VERSION, "kind": kind, "meta": meta,
              "arrays": {k: {"dtype": v.dtype.str, "shape": list(v.shape)}
                         for k, v in arrays.items()}}
    blob = np.frombuffer(json.dumps(header, sort_keys=True).encode("utf-8"), dtype=np.uint8)
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    os.close(fd)
    try:
        with open(tmp, "wb") as fh:
            np.savez(fh, __header__=blob, **arrays)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def load_container(path):
    """Return ``(kind, meta, arrays)``."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"container not found: {path}")
    try:
        z = np.load(path, allow_pickle=False)
    except (ValueError, OSError, zipfile.BadZipFile) as e:
        raise DataError(f"{path}: not a {FORMAT} file ({e})") from None
    if not isinstance(z, np.lib.npyio.NpzFile):
        raise DataError(f"{path}: not a {FORMAT} file")
    with z:
        if "__header__" not in z.files:
            raise DataError(f"{path}: not a {FORMAT} file")
        header = json.loads(bytes(z["__header__"]).decode("utf-8"))
        if header.get("format") != FORMAT:
            raise DataError(f"{path}: not a {FORMAT} file")
        if header.get("version") != VERSION:
            raise DataError(f"{path}: unsupported container version {header.get('version')}")
        arrays = {k: z[k] for k in header["arrays"]}
    return header["kind"], header["meta"], arrays


# ---------------------------------------------------------------- object codecs


def _dataset_parts(ds: NumericDataset):
    meta = {"class_names": list(ds.class_names), "feature_names": list(ds.feature_names),
            "feature_origins": list(ds.feature_origins), "tag": ds.tag}
    return meta, {"X": ds.X, "y": ds.y}


def _encode(obj):
    if isinstance(obj, NumericDataset):
        meta, arrays = _dataset_parts(obj)
        return "NumericDataset", meta, arrays
    if isinstance(obj, Encoder):
        meta = {"columns": [list(c) for c in obj.columns],
                "vocabularies": {k: list(v) for k, v in obj.vocabularies.items()},
                "zero_variance": sorted(obj.zero_variance)}
        return "Encoder", meta, {"means": obj.means, "stds": obj.stds}
    if isinstance(obj, LdaModel):
        sp = obj.scatter
        meta = {"ridge": obj.ridge, "feature_names": list(obj.feature_names),
                "feature_origins": list(obj.feature_origins),
                "dims": {"d": int(obj.U.shape[0]), "r": int(obj.U.shape[1])}}
        arrays = {"U": obj.U, "eigenvalues": obj.eigenvalues, "B": sp.B, "W": sp.W,
                  "class_means": sp.class_means, "global_mean": sp.global_mean,
                  "class_sizes": sp.class_sizes}
        return "LdaModel", meta, arrays
    if isinstance(obj, GdaModel):
        meta = {"kernel": obj.kernel.to_dict(), "ridge": obj.ridge, "rank_tol": obj.rank_tol,
                "class_sizes": list(obj.class_sizes),
                "grand_mean": obj.centering.grand_mean,
                "feature_names": list(obj.feature_names),
                "feature_origins": list(obj.feature_origins),
                "dims": {"M": int(obj.basis.shape[0]), "d": int(obj.basis.shape[1]),
                         "r": int(obj.alphas.shape[1])}}
        arrays = {"basis": obj.basis, "basis_labels": obj.basis_labels, "alphas": obj.alphas,
                  "eigenvalues": obj.eigenvalues, "col_means": obj.centering.col_means,
                  "permutation": obj.permutation}
        return "GdaModel", meta, arrays
    if isinstance(obj, TreeModel):
        meta = {"tree": json.loads(obj.to_json())}
        return "TreeModel", meta, {}
    if isinstance(obj, MlpModel):
        arrays = dict(zip(("W1", "b1", "W2", "b2"), obj.params()))
        return "MlpModel", {"config": obj.config}, arrays
    raise TypeError(f"cannot persist {type(obj).__name__}")


def _decode(kind, meta, a):
    if kind == "NumericDataset":
        return NumericDataset(a["X"], a["y"], tuple(meta["class_names"]),
                              tuple(meta["feature_names"]), tuple(meta["feature_origins"]),
                              meta.get("tag"))
    if kind == "Encoder":
        return Encoder(tuple(tuple(c) for c in meta["columns"]),
                       {k: tuple(v) for k, v in meta["vocabularies"].items()},
                       a["means"], a["stds"], frozenset(meta["zero_variance"]))
    if kind == "LdaModel":
        sp = ScatterPair(a["B"], a["W"], a["class_means"], a["global_mean"], a["class_sizes"])
        return LdaModel(a["U"], a["eigenvalues"], sp, meta["ridge"],
                        tuple(meta["feature_names"]), tuple(meta["feature_origins"]))
    if kind == "GdaModel":
        return GdaModel(a["basis"], a["basis_labels"], KernelSpec(**meta["kernel"]),
                        a["alphas"], a["eigenvalues"],
                        CenteringStats(a["col_means"], meta["grand_mean"]),
                        tuple(meta["class_sizes"]), a["permutation"], meta["ridge"],
                        meta["rank_tol"], tuple(meta["feature_names"]),
                        tuple(meta["feature_origins"]))
    if kind == "TreeModel":
        t = meta["tree"]
        return TreeModel([Node.from_dict(n) for n in t["nodes"]], t["n_features"],
                         t["n_classes"], t["config"])
    if kind == "MlpModel":
        return MlpModel(a["W1"], a["b1"], a["W2"], a["b2"], meta["config"])
    raise DataError(f"unknown container kind {kind!r}")


def save(path, obj, **extra_meta) -> None:
    """Persist a dataset, encoder or model. ``extra_meta`` is stored alongside."""
    kind, meta, arrays = _encode(obj)
    if extra_meta:
        meta = dict(meta, extra=extra_meta)
    save_container(path, kind, meta, arrays)


def load(path):
    kind, meta, arrays = load_container(path)
    return _decode(kind, meta, arrays)


def load_extra(path) -> dict:
    _, meta, _ = load_container(path)
    return meta.get("extra", {})
