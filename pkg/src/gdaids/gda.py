"""Generalized (kernel) discriminant analysis.

The discriminant directions live in the span of the mapped training samples, so
each one is a coefficient vector ``alpha`` over the (class-grouped) training basis.
They are the stationary points of

    lam(alpha) = alpha' K D K alpha / alpha' K K alpha

with ``K`` the centered Gram matrix and ``D`` the block-diagonal class-averaging
projector. The problem is solved inside the range of ``K``: with ``K = P diag(k) P'``
restricted to eigenvalues above ``rank_tol * k_max`` and ``alpha = P beta`` it reads
``diag(k) P'DP diag(k) beta = lam diag(k)^2 beta``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .eigencore import (RANK_TOL, CenteringStats, KernelSpec, center_kernel,
                        center_test_kernel, check_symmetric, fix_signs,
                        generalized_sym_eig, gram_matrix, sym_eig)
from .errors import ConfigError, DataError, NumericError
from .ingest import NumericDataset
from .lda import aggregate_scores

PROJECT_CHUNK = 4096


@dataclass(frozen=True)
class BlockDiagD:
    """Block-diagonal matrix whose c-th diagonal block is ``J / M_c``."""

    class_sizes: tuple

    @property
    def n(self) -> int:
        return int(sum(self.class_sizes))

    @property
    def bounds(self) -> np.ndarray:
        return np.concatenate([[0], np.cumsum(self.class_sizes)]).astype(np.int64)

    def dense(self) -> np.ndarray:
        D = np.zeros((self.n, self.n))
        b = self.bounds
        for c, m in enumerate(self.class_sizes):
            D[b[c]:b[c + 1], b[c]:b[c + 1]] = 1.0 / m
        return D

    def __matmul__(self, V):
        """``D @ V`` without forming D: each row becomes its class block's mean."""
        V = np.asarray(V, dtype=np.float64)
        out = np.empty_like(V)
        b = self.bounds
        for c in range(len(self.class_sizes)):
            out[b[c]:b[c + 1]] = V[b[c]:b[c + 1]].mean(axis=0)
        return out


def build_d_matrix(class_sizes, ordering=None) -> BlockDiagD:
    """``ordering`` (row -> class id), when given, must list classes in contiguous
    blocks matching ``class_sizes``."""
    sizes = tuple(int(m) for m in class_sizes)
    if not sizes:
        raise DataError("no classes")
    if any(m <= 0 for m in sizes):
        raise DataError(f"class sizes must be positive, got {sizes}")
    if ordering is not None:
        expected = np.repeat(np.arange(len(sizes)), sizes)
        if not np.array_equal(np.asarray(ordering), expected):
            raise DataError("rows are not grouped contiguously by class")
    return BlockDiagD(sizes)


@dataclass(frozen=True, eq=False)
class GdaModel:
    basis: np.ndarray
    basis_labels: np.ndarray
    kernel: KernelSpec
    alphas: np.ndarray
    eigenvalues: np.ndarray
    centering: CenteringStats
    class_sizes: tuple
    permutation: np.ndarray
    ridge: float = 0.0
    rank_tol: float = RANK_TOL
    feature_names: tuple = ()
    feature_origins: tuple = ()

    @property
    def n_components(self) -> int:
        return self.alphas.shape[1]


def rayleigh_quotient(K_centered, D, alpha) -> float:
    """``alpha' K D K alpha / alpha' K K alpha`` for the centered Gram matrix."""
    K = check_symmetric(K_centered, "K")
    alpha = np.asarray(alpha, dtype=np.float64).ravel()
    if alpha.shape[0] != K.shape[0]:
        raise DataError(f"alpha has length {alpha.shape[0]}, expected {K.shape[0]}")
    Ka = K @ alpha
    den = float(Ka @ Ka)
    scale = np.linalg.norm(K) * np.linalg.norm(alpha)
    if den == 0.0 or np.sqrt(den) <= 1e-12 * scale:
        raise NumericError("alpha lies in the null space of K (zero denominator)")
    DKa = D @ Ka
    return float(Ka @ DKa) / den


def _grouped(ds: NumericDataset):
    perm = np.argsort(ds.y, kind="stable")
    return perm, ds.X[perm], ds.y[perm]


def fit_gda(ds: NumericDataset, spec: KernelSpec | None = None, r: int = 4,
            ridge: float | None = None, rank_tol: float = RANK_TOL) -> GdaModel:
    """Fit kernel discriminant directions on every row of ``ds``.

    Memory is O(M^2) and time O(M^3) in the row count; subsample large sets first.
    ``ridge=None`` regularizes the denominator with ``1e-8 * trace(K K) / M``. When K is
    nonsingular the criterion saturates at 1 on a (C-1)-dimensional subspace; the
    ridge then picks the directions with the smallest coefficient norm. Reported
    eigenvalues are the unregularized criterion values of the returned directions.
    """
    spec = spec or KernelSpec()
    if r < 1:
        raise ConfigError("r must be at least 1")
    C = ds.class_count
    if C < 2:
        raise DataError("GDA needs at least two classes")
    sizes = ds.class_sizes
    empty = [ds.class_names[c] for c in np.flatnonzero(sizes == 0)]
    if empty:
        raise DataError(f"empty class: {', '.join(empty)}")

    perm, basis, yb = _grouped(ds)
    D = build_d_matrix(sizes, yb)
    K = gram_matrix(basis, basis, spec)
    Kc, stats = center_kernel(K)
    if np.abs(Kc).max() <= 1e-12 * max(1.0, np.abs(K).max()):
        raise NumericError("centered kernel matrix is numerically zero (degenerate data)")

    eig = sym_eig(Kc)
    top = eig.values[0]
    keep = eig.values > rank_tol * top
    P = eig.vectors[:, keep]
    k = eig.values[keep]
    PtDP = P.T @ (D @ P)
    A = (k[:, None] * PtDP) * k[None, :]
    den = np.diag(k ** 2)
    if ridge is None:
        ridge = 1e-8 * float(np.sum(k ** 2)) / ds.n_rows
    pairs = generalized_sym_eig(A, den, ridge)

    n_sig = int(np.sum(pairs.values > rank_tol))
    n = min(r, C - 1, n_sig)
    beta = pairs.vectors[:, :n]
    # criterion value without the ridge: beta' A beta / beta' diag(k)^2 beta
    lam = np.einsum("ij,ik,kj->j", beta, A, beta) / np.einsum("ij,i,ij->j", beta, k ** 2, beta)
    order = np.argsort(-lam, kind="stable")
    beta, lam = beta[:, order], lam[order]
    # unit feature-space norm: alpha' Kc alpha = beta' diag(k) beta = 1
    norms = np.sqrt(np.einsum("ij,i,ij->j", beta, k, beta))
    alphas = fix_signs((P @ beta) / norms)
    return GdaModel(basis, yb, spec, alphas, lam, stats,
                    tuple(int(m) for m in sizes), perm, float(ridge), rank_tol,
                    ds.feature_names, ds.feature_origins)


def training_projections(model: GdaModel) -> np.ndarray:
    K = gram_matrix(model.basis, model.basis, model.kernel)
    Kc, _ = center_kernel(K)
    return Kc @ model.alphas


def project_gda(model: GdaModel, X_test) -> np.ndarray:
    X_test = np.atleast_2d(np.asarray(X_test, dtype=np.float64))
    if X_test.shape[1] != model.basis.shape[1]:
        raise DataError(f"expected {model.basis.shape[1]} columns, got {X_test.shape[1]}")
    out = np.empty((X_test.shape[0], model.n_components))
    for start in range(0, X_test.shape[0], PROJECT_CHUNK):
        chunk = X_test[start:start + PROJECT_CHUNK]
        Kt = center_test_kernel(gram_matrix(chunk, model.basis, model.kernel), model.centering)
        out[start:start + PROJECT_CHUNK] = Kt @ model.alphas
    return out


def projection_gradients(model: GdaModel, X) -> np.ndarray:
    """Analytic ``d projection_i / d x`` at each row of X, shape (n, r, d)."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    B = model.basis
    # test-side centering subtracts the mean kernel row, so weights lose their mean
    Wt = model.alphas - model.alphas.mean(axis=0)
    spec = model.kernel
    out = np.empty((X.shape[0], model.n_components, X.shape[1]))
    if spec.family == "gaussian":
        Kt = gram_matrix(X, B, spec)
        S = Kt @ Wt
        for i in range(model.n_components):
            T = (Kt * Wt[:, i]) @ B
            out[:, i, :] = -(2.0 / spec.s) * (S[:, i, None] * X - T)
    elif spec.family in ("polynomial", "linear"):
        if spec.family == "linear":
            Kp = np.ones((X.shape[0], B.shape[0]))
        else:
            Kp = spec.degree * (X @ B.T + spec.offset) ** (spec.degree - 1)
        for i in range(model.n_components):
            out[:, i, :] = (Kp * Wt[:, i]) @ B
    else:
        raise ConfigError(f"no gradient for kernel family {spec.family!r}")
    return out


def rank_features_gda(model: GdaModel, ds: NumericDataset) -> list[tuple[str, float]]:
    """Score input feature j by the mean over training points and components of
    ``|d projection_i / d x_j|``; one-hot blocks summed, descending."""
    if ds.n_features != model.basis.shape[1]:
        raise DataError("dataset does not match the model's input dimension")
    grads = projection_gradients(model, model.basis)
    scores = np.abs(grads).mean(axis=(0, 1)) if grads.size else np.zeros(ds.n_features)
    return aggregate_scores(scores, ds.feature_origins)
