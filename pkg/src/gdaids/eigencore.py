"""Dense symmetric eigensolvers, kernel Gram matrices and Gram-matrix centering."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular
from scipy.spatial.distance import cdist

from .errors import ConfigError, DataError, NotPositiveDefiniteError, NumericError

SYMMETRY_TOL = 1e-12
RANK_TOL = 1e-10


def check_symmetric(A, name="matrix") -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DataError(f"{name} must be square, got shape {A.shape}")
    if not np.isfinite(A).all():
        raise NumericError(f"{name} has non-finite entries")
    scale = np.maximum(1.0, np.abs(A))
    if np.any(np.abs(A - A.T) > SYMMETRY_TOL * scale):
        raise DataError(f"{name} is not symmetric")
    return A


@dataclass(frozen=True, eq=False)
class EigenPairs:
    """Eigenvalues in non-increasing order with matching eigenvector columns."""

    values: np.ndarray
    vectors: np.ndarray
    residual_bound: float

    def __len__(self):
        return len(self.values)

    def top(self, k: int) -> "EigenPairs":
        return EigenPairs(self.values[:k], self.vectors[:, :k], self.residual_bound)


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Flip columns so each one's largest-magnitude entry (first on ties) is positive."""
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def _descending(w, V):
    order = np.argsort(-w, kind="stable")
    return w[order], fix_signs(V[:, order])


def sym_eig(A) -> EigenPairs:
    A = check_symmetric(A)
    A = 0.5 * (A + A.T)
    w, V = np.linalg.eigh(A)
    w, V = _descending(w, V)
    resid = np.linalg.norm(A @ V - V * w, axis=0).max() if len(w) else 0.0
    return EigenPairs(w, V, float(resid))


def default_ridge(M) -> float:
    M = np.asarray(M)
    n = M.shape[0]
    return 1e-8 * float(np.trace(M)) / n if n else 0.0


def generalized_sym_eig(A, M, ridge: float | None = None) -> EigenPairs:
    """Solve ``A v = lam (M + ridge I) v`` for symmetric ``A`` and SPD ``M + ridge I``.

    Cholesky-whitens the right-hand matrix, solves the standard problem, and maps the
    eigenvectors back, so they come out ``(M + ridge I)``-orthonormal. ``ridge=None``
    uses ``1e-8 * trace(M) / n``.
    """
    A = check_symmetric(A, "A")
    M = check_symmetric(M, "M")
    if A.shape != M.shape:
        raise DataError(f"shape mismatch {A.shape} vs {M.shape}")
    if ridge is None:
        ridge = default_ridge(M)
    if ridge < 0:
        raise ConfigError("ridge must be nonnegative")
    Mr = M + ridge * np.eye(M.shape[0])
    try:
        L = np.linalg.cholesky(Mr)
    except np.linalg.LinAlgError:
        raise NotPositiveDefiniteError(
            f"M + ridge*I is not positive definite (ridge={ridge:g}); use a larger ridge"
        ) from None
    Linv_A = solve_triangular(L, A, lower=True)
    Cmat = solve_triangular(L, Linv_A.T, lower=True)
    Cmat = 0.5 * (Cmat + Cmat.T)
    w, Y = np.linalg.eigh(Cmat)
    V = solve_triangular(L.T, Y, lower=False)
    w, V = _descending(w, V)
    resid = np.linalg.norm(A @ V - (Mr @ V) * w, axis=0).max() if len(w) else 0.0
    return EigenPairs(w, V, float(resid))


@dataclass(frozen=True)
class KernelSpec:
    """``gaussian``: exp(-||x-y||^2 / s); ``linear``: x.y; ``polynomial``: (x.y + offset)^degree."""

    family: str = "gaussian"
    s: float = 0.1
    degree: int = 2
    offset: float = 1.0

    def __post_init__(self):
        if self.family not in ("gaussian", "linear", "polynomial"):
            raise ConfigError(f"unknown kernel family {self.family!r}")
        if not self.s > 0:
            raise ConfigError("gaussian denominator s must be positive")
        if self.degree < 1:
            raise ConfigError("polynomial degree must be at least 1")

    def to_dict(self) -> dict:
        return {"family": self.family, "s": self.s, "degree": self.degree,
                "offset": self.offset}


def gram_matrix(X, Y, spec: KernelSpec) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    Y = np.atleast_2d(np.asarray(Y, dtype=np.float64))
    if X.shape[1] != Y.shape[1]:
        raise DataError(f"dimension mismatch: {X.shape[1]} vs {Y.shape[1]}")
    if spec.family == "gaussian":
        return np.exp(-cdist(X, Y, "sqeuclidean") / spec.s)
    G = X @ Y.T
    if spec.family == "linear":
        return G
    return (G + spec.offset) ** spec.degree


@dataclass(frozen=True, eq=False)
class CenteringStats:
    col_means: np.ndarray
    grand_mean: float


def center_kernel(K):
    """Double-center a training Gram matrix. Returns ``(K_centered, stats)``."""
    K = check_symmetric(K, "K")
    col = K.mean(axis=0)
    grand = float(col.mean())
    Kc = K - col[None, :] - col[:, None] + grand
    Kc = 0.5 * (Kc + Kc.T)
    return Kc, CenteringStats(col, grand)


def center_test_kernel(K_test, stats: CenteringStats) -> np.ndarray:
    K_test = np.atleast_2d(np.asarray(K_test, dtype=np.float64))
    if K_test.shape[1] != len(stats.col_means):
        raise DataError(f"test kernel has {K_test.shape[1]} columns, "
                        f"expected {len(stats.col_means)}")
    row = K_test.mean(axis=1, keepdims=True)
    return K_test - row - stats.col_means[None, :] + stats.grand_mean
