"""Dirichlet Laplacian eigenpairs by block inverse iteration."""

from __future__ import annotations

from functools import lru_cache

import numpy as np
import scipy.linalg as sla

from .errors import BadParams, ConvergenceFailure


def eigenpairs(grid, k: int, tol: float = 1e-10, max_iter: int = 1000):
    """Lowest ``k`` eigenpairs of the discrete Dirichlet Laplacian.

    Solves ``K x = lam M x`` (stiffness ``K``, diagonal quadrature mass ``M``)
    by subspace inverse iteration with Rayleigh-Ritz, using a guard block so
    convergence is governed by ``lam_k / lam_{block+1}``.  Eigenvectors are
    ``M``-orthonormal, sign-fixed so their largest entry is positive.

    Returns
    -------
    list of (float, ndarray), eigenvalues ascending.
    """
    vals, vecs = _eigenpairs(grid, int(k), float(tol), int(max_iter))
    return [(float(vals[i]), vecs[:, i].copy()) for i in range(len(vals))]


def eigenbasis(grid, k: int):
    """``(values, basis)`` with the eigenvectors as columns (cached)."""
    vals, vecs = _eigenpairs(grid, int(k), 1e-10, 1000)
    return vals.copy(), vecs.copy()


@lru_cache(maxsize=32)
def _eigenpairs(grid, k, tol, max_iter):
    n = grid.size
    if k < 1 or k > max(1, n // 2):
        raise BadParams(f"need 1 <= k <= n/2, got k={k} for n={n}")
    K, w = grid.stiffness, grid.weights
    from scipy.sparse.linalg import factorized

    solve = factorized(K.tocsc())
    m = min(n, k + max(4, k))
    rng = np.random.default_rng(12345)
    X = rng.standard_normal((n, m))
    lam = None
    for it in range(max_iter):
        Y = np.column_stack([solve(w * X[:, j]) for j in range(m)])
        A = Y.T @ (K @ Y)
        B = Y.T @ (w[:, None] * Y)
        lam, Z = sla.eigh((A + A.T) / 2, (B + B.T) / 2)
        X = Y @ Z
        R = K @ X[:, :k] - (w[:, None] * X[:, :k]) * lam[:k]
        res = np.sqrt(np.sum(R**2 / w[:, None], axis=0)) / lam[:k]
        # residual floor from rounding in K: eps * lam_max / lam
        floor = 50 * np.finfo(float).eps * _lam_max(grid) / lam[:k]
        if np.all(res <= np.maximum(tol, floor)):
            break
    else:
        raise ConvergenceFailure(f"eigenpairs: residual {res.max():.3e} after {max_iter} iterations")
    X = X[:, :k]
    X /= np.sqrt(np.sum(w[:, None] * X**2, axis=0))
    idx = np.argmax(np.abs(X), axis=0)
    X *= np.sign(X[idx, np.arange(k)])
    return lam[:k], X


def _lam_max(grid):
    # Gershgorin bound on the largest eigenvalue of M^{-1} K
    K = grid.stiffness
    return float(np.max(np.asarray(abs(K).sum(axis=1)).ravel() / grid.weights))
