"""Slow reference implementations used to cross-check the fast pipeline.

Nothing here is used on the identification path. Costs are up to O(d^8), so
the explicit permutation matrix is restricted to small dimensions.
"""
from __future__ import annotations

import numpy as np

from .linalg import as_matrix, hs_norm, unvectorize, vectorize

__all__ = [
    "MAX_ORACLE_DIM",
    "brute_force_nearest_unitary",
    "build_B",
    "build_B_from_products",
    "direct_D",
    "exact_lambda_rows",
    "haar_unitaries",
    "is_permutation",
]

MAX_ORACLE_DIM = 6


def _check_dim(d: int) -> None:
    if not 2 <= d <= MAX_ORACLE_DIM:
        raise ValueError(f"oracle dimension must lie in 2..{MAX_ORACLE_DIM}, got {d}")


def _as_B_matrix(b8: np.ndarray, d: int) -> np.ndarray:
    """Lay out ``b8[s,t,p,q,m,n,g,h] = B_{(s,t)(p,q),(m,n)(g,h)}`` as a matrix.

    Rows follow ``vec(Lambda)`` and columns follow ``vec(X)`` (column stacking),
    so that ``B @ vec(X) = vec(Lambda)``.
    """
    d2 = d * d
    b4 = b8.reshape(d2, d2, d2, d2)  # [M, N, J, K] for B_{MN,JK}
    return b4.transpose(1, 0, 3, 2).reshape(d2 * d2, d2 * d2)


def build_B(d: int) -> np.ndarray:
    """Permutation matrix from the delta formula ``dqg dpm dth dsn``."""
    _check_dim(d)
    eye = np.eye(d)
    b8 = np.einsum("qg,pm,th,sn->stpqmngh", eye, eye, eye, eye)
    return _as_B_matrix(b8, d)


def build_B_from_products(d: int) -> np.ndarray:
    """Same matrix, from ``E_j rho_m E_k^dagger = sum_n B_{mn,jk} rho_n`` directly."""
    _check_dim(d)
    d2 = d * d
    units = np.zeros((d2, d, d))
    for i in range(d2):
        units[i, i // d, i % d] = 1.0
    b4 = np.zeros((d2, d2, d2, d2))
    for j in range(d2):
        for k in range(d2):
            for m in range(d2):
                out = units[j] @ units[m] @ units[k].T
                # natural-basis coefficients are the entries, flattened row-major
                b4[m, :, j, k] = out.reshape(-1)
    return b4.transpose(1, 0, 3, 2).reshape(d2 * d2, d2 * d2)


def is_permutation(b) -> bool:
    b = np.asarray(b)
    if b.ndim != 2 or b.shape[0] != b.shape[1]:
        return False
    if not np.all((b == 0) | (b == 1)):
        return False
    return bool(np.all(b.sum(axis=0) == 1) and np.all(b.sum(axis=1) == 1))


def direct_D(lam, b) -> np.ndarray:
    """``vec^{-1}(B^T vec(Lambda))``.

    ``lam`` is either the full ``d^2 x d^2`` matrix or its first ``d`` rows, in
    which case the remaining rows are taken as zero.
    """
    lam = np.asarray(lam, dtype=np.complex128)
    d2 = lam.shape[1]
    if lam.shape[0] != d2:
        full = np.zeros((d2, d2), dtype=np.complex128)
        full[: lam.shape[0]] = lam
        lam = full
    b = np.asarray(b)
    if b.shape != (d2 * d2, d2 * d2):
        raise ValueError(f"B has shape {b.shape}, expected {(d2 * d2, d2 * d2)}")
    return unvectorize(b.T @ vectorize(lam), d2, d2)


def exact_lambda_rows(u) -> np.ndarray:
    """Rows ``a`` = row-major flattening of ``U|1><a|U^dagger = u_1 u_a^dagger``."""
    u = as_matrix(u, "gate")
    d = u.shape[0]
    return np.stack([np.outer(u[:, 0], u[:, a].conj()).reshape(-1) for a in range(d)])


def haar_unitaries(d: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` Haar-random ``d x d`` unitaries (QR of Ginibre matrices, phase fixed)."""
    z = (rng.standard_normal((size, d, d)) + 1j * rng.standard_normal((size, d, d))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    diag = np.diagonal(r, axis1=1, axis2=2)
    return q * (diag / np.abs(diag))[:, None, :]


def brute_force_nearest_unitary(s, samples: int, rng: np.random.Generator, refine_steps: int = 2000) -> np.ndarray:
    """Best of ``samples`` Haar-random unitaries, then a random local search."""
    s = as_matrix(s, "S")
    d = s.shape[0]
    best = None
    best_err = np.inf
    for start in range(0, samples, 10_000):
        batch = haar_unitaries(d, min(10_000, samples - start), rng)
        errs = np.linalg.norm(batch - s, axis=(1, 2))
        i = int(np.argmin(errs))
        if errs[i] < best_err:
            best, best_err = batch[i], errs[i]
    step = 0.1
    for _ in range(refine_steps):
        h = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
        h = (h + h.conj().T) / 2
        w, v = np.linalg.eigh(h)
        cand = (v * np.exp(1j * step * w)) @ v.conj().T @ best
        err = hs_norm(cand - s)
        if err < best_err:
            best, best_err = cand, err
        else:
            step = max(step * 0.995, 1e-6)
    return best
