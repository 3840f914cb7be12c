"""Fisher linear discriminant analysis."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigencore import RANK_TOL, default_ridge, generalized_sym_eig
from .errors import ConfigError, DataError
from .ingest import NumericDataset


@dataclass(frozen=True, eq=False)
class ScatterPair:
    B: np.ndarray
    W: np.ndarray
    class_means: np.ndarray
    global_mean: np.ndarray
    class_sizes: np.ndarray

    @property
    def total(self) -> np.ndarray:
        return self.B + self.W


def scatter_matrices(ds: NumericDataset) -> ScatterPair:
    """Between-class scatter ``sum_c M_c (m_c - m)(m_c - m)^T`` and within-class
    scatter ``sum_c sum_{x in c} (x - m_c)(x - m_c)^T``."""
    if ds.n_rows < 2:
        raise DataError("need at least two samples")
    sizes = ds.class_sizes
    empty = [ds.class_names[c] for c in np.flatnonzero(sizes == 0)]
    if empty:
        raise DataError(f"empty class: {', '.join(empty)}")
    X = ds.X
    m = X.mean(axis=0)
    d = X.shape[1]
    means = np.empty((ds.class_count, d))
    B = np.zeros((d, d))
    W = np.zeros((d, d))
    for c in range(ds.class_count):
        Xc = X[ds.y == c]
        means[c] = Xc.mean(axis=0)
        diff = means[c] - m
        B += sizes[c] * np.outer(diff, diff)
        Z = Xc - means[c]
        W += Z.T @ Z
    return ScatterPair(0.5 * (B + B.T), 0.5 * (W + W.T), means, m, sizes)


@dataclass(frozen=True, eq=False)
class LdaModel:
    """Discriminant directions as columns of ``U`` (d x r) with descending eigenvalues."""

    U: np.ndarray
    eigenvalues: np.ndarray
    scatter: ScatterPair
    ridge: float
    feature_names: tuple = ()
    feature_origins: tuple = ()

    @property
    def global_mean(self) -> np.ndarray:
        return self.scatter.global_mean

    @property
    def n_components(self) -> int:
        return self.U.shape[1]


def fit_lda(ds: NumericDataset, r: int = 4, ridge: float | None = None,
            rank_tol: float = RANK_TOL) -> LdaModel:
    """Solve ``B u = lam (W + ridge I) u`` and keep the leading ``min(r, C-1, rank)``
    directions, where rank counts eigenvalues above ``rank_tol``."""
    if r < 1:
        raise ConfigError("r must be at least 1")
    if ds.class_count < 2:
        raise DataError("LDA needs at least two classes")
    sp = scatter_matrices(ds)
    if ridge is None:
        ridge = default_ridge(sp.W)
        if ridge == 0.0:
            ridge = default_ridge(sp.total) or 1e-12
    pairs = generalized_sym_eig(sp.B, sp.W, ridge)
    rank = int(np.sum(pairs.values > rank_tol))
    k = min(r, ds.class_count - 1, rank)
    top = pairs.top(k)
    return LdaModel(top.vectors, top.values, sp, float(ridge),
                    ds.feature_names, ds.feature_origins)


def project_lda(model: LdaModel, X) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    if X.shape[1] != model.U.shape[0]:
        raise DataError(f"expected {model.U.shape[0]} columns, got {X.shape[1]}")
    return (X - model.global_mean) @ model.U


def aggregate_scores(col_scores, origins) -> list[tuple[str, float]]:
    """Sum per-column scores into their original features; sort descending,
    ties broken by the feature's first column."""
    totals, first = {}, {}
    for j, (origin, s) in enumerate(zip(origins, col_scores)):
        totals[origin] = totals.get(origin, 0.0) + float(s)
        first.setdefault(origin, j)
    return sorted(totals.items(), key=lambda kv: (-kv[1], first[kv[0]]))


def rank_features_lda(model: LdaModel) -> list[tuple[str, float]]:
    """Score each encoded column by ``sum_i lam_i U[j, i]^2``; one-hot blocks summed."""
    scores = (model.U ** 2) @ model.eigenvalues
    origins = model.feature_origins or tuple(f"f{j}" for j in range(model.U.shape[0]))
    return aggregate_scores(scores, origins)
