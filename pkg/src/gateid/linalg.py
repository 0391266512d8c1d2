"""Dense complex matrix primitives used throughout the identification pipeline.

Conventions
-----------
* ``vectorize`` stacks columns: ``[A11, A21, ..., Am1, A12, ..., Amn]``.
* ``svd`` returns ``(U1, sigma, U2)`` with ``A = U1 @ diag(sigma) @ U2``; there is
  no conjugate transpose on ``U2``.
"""
from __future__ import annotations

import numpy as np

__all__ = [
    "as_matrix",
    "vectorize",
    "unvectorize",
    "partial_trace_first",
    "hs_norm",
    "svd",
    "nearest_unitary",
    "is_unitary",
]


def as_matrix(a, name: str = "matrix") -> np.ndarray:
    """Coerce ``a`` to a finite 2-D complex128 array."""
    arr = np.asarray(a, dtype=np.complex128)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


def vectorize(a) -> np.ndarray:
    """Column-stacked vector of ``a`` (length ``m * n``)."""
    return as_matrix(a).reshape(-1, order="F")


def unvectorize(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vectorize` for an ``rows x cols`` matrix."""
    v = np.asarray(v, dtype=np.complex128).ravel()
    if v.size != rows * cols:
        raise ValueError(f"cannot reshape vector of length {v.size} into {rows}x{cols}")
    return v.reshape(rows, cols, order="F")


def partial_trace_first(x, d: int) -> np.ndarray:
    """Trace out the first factor of ``H1 (x) H2`` for a ``d^2 x d^2`` operator.

    Row/column index ``i`` of ``x`` is split as ``i = j*d + k`` (0-based), ``j``
    labelling the first factor.
    """
    x = as_matrix(x, "X")
    if x.shape != (d * d, d * d):
        raise ValueError(f"expected a {d * d}x{d * d} matrix, got {x.shape}")
    return np.einsum("jkjl->kl", x.reshape(d, d, d, d))


def hs_norm(a) -> float:
    """Hilbert-Schmidt (Frobenius) norm; also the Euclidean norm for vectors."""
    return float(np.linalg.norm(np.asarray(a, dtype=np.complex128)))


def svd(a) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    a = as_matrix(a)
    u1, sigma, u2 = np.linalg.svd(a)
    return u1, sigma, u2


def nearest_unitary(s) -> np.ndarray:
    """Unitary closest to ``s`` in Hilbert-Schmidt norm.

    Computed as the product of the two singular-vector factors, which stays
    well defined when ``s`` is singular (the minimiser is then not unique).
    """
    s = as_matrix(s, "S")
    if s.shape[0] != s.shape[1]:
        raise ValueError(f"S must be square, got {s.shape}")
    u1, _, u2 = svd(s)
    return u1 @ u2


def is_unitary(u, atol: float = 1e-10) -> bool:
    u = np.asarray(u, dtype=np.complex128)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol))
