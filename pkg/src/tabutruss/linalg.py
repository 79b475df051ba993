"""Dense kernels for the small symmetric systems produced by truss assembly."""

from __future__ import annotations

import numpy as np


class NotPositiveDefiniteError(np.linalg.LinAlgError):
    """Raised when a Cholesky factorization meets a non-positive pivot."""

    def __init__(self, pivot: int, value: float):
        super().__init__(f"matrix is not positive definite (pivot {pivot} = {value:.6g})")
        self.pivot = pivot
        self.value = value


def cholesky(a: np.ndarray) -> np.ndarray:
    """Lower-triangular ``L`` with ``L @ L.T == a``.

    Only the lower triangle of ``a`` is read. Pivots are checked against a
    threshold relative to the largest diagonal entry so that numerically
    singular matrices are reported rather than factorized into garbage.
    """
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    lower = np.zeros_like(a)
    tol = 1e-13 * max(float(np.max(np.abs(np.diag(a)))), np.finfo(float).tiny)
    for j in range(n):
        row = lower[j, :j]
        pivot = a[j, j] - row @ row
        if not pivot > tol:
            raise NotPositiveDefiniteError(j, float(pivot))
        d = np.sqrt(pivot)
        lower[j, j] = d
        if j + 1 < n:
            lower[j + 1:, j] = (a[j + 1:, j] - lower[j + 1:, :j] @ row) / d
    return lower


def forward_substitution(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``lower @ x = b``; ``b`` may be a vector or a matrix of columns."""
    b = np.asarray(b, dtype=float)
    x = np.array(b, dtype=float, copy=True)
    for i in range(lower.shape[0]):
        x[i] = (b[i] - lower[i, :i] @ x[:i]) / lower[i, i]
    return x


def back_substitution(upper: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``upper @ x = b``."""
    b = np.asarray(b, dtype=float)
    x = np.array(b, dtype=float, copy=True)
    n = upper.shape[0]
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - upper[i, i + 1:] @ x[i + 1:]) / upper[i, i]
    return x


def cho_solve(lower: np.ndarray, b: np.ndarray) -> np.ndarray:
    return back_substitution(lower.T, forward_substitution(lower, b))


def spd_solve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve ``a @ x = b`` for symmetric positive definite ``a``."""
    return cho_solve(cholesky(a), b)


def reduce_generalized(k: np.ndarray, m: np.ndarray) -> np.ndarray:
    """Map ``K x = lam M x`` to the standard symmetric problem ``C y = lam y``.

    With ``M = L L^T``, ``C = L^-1 K L^-T``. The result is symmetrized to
    remove round-off asymmetry.
    """
    lower = cholesky(m)
    tmp = forward_substitution(lower, k)            # L^-1 K
    c = forward_substitution(lower, tmp.T)          # L^-1 (L^-1 K)^T = L^-1 K L^-T
    return 0.5 * (c + c.T)


def smallest_generalized_eigenvalue(k: np.ndarray, m: np.ndarray) -> float:
    """Smallest ``lam`` with ``det(K - lam M) = 0`` for SPD ``K`` and ``M``."""
    c = reduce_generalized(k, m)
    return float(np.linalg.eigvalsh(c)[0])
