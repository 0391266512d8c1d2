"""Fast tomography of pure states from ``2d - 1`` measurement settings.

A rank-one density matrix is fixed (up to normalisation) by any nonzero column.
The protocol measures the computational basis, anchors on the most populated
basis state ``s``, and then estimates column ``s`` entry by entry from the two
binary settings ``{P_j, I - P_j}`` and ``{Q_j, I - Q_j}`` for every ``j != s``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .measurement import ShotPlan
from .quantum import Setting

__all__ = [
    "ColumnEstimate",
    "estimate_column",
    "fast_qst",
    "offdiagonal_estimate",
    "reconstruct_pure_state",
    "select_anchor",
]


@dataclass(frozen=True)
class ColumnEstimate:
    """Estimated column ``s`` of an output density matrix.

    ``s`` is 0-based. ``shots[j]`` is the number of shots behind ``column[j]``
    (``0`` in exact-probability mode).
    """

    s: int
    column: np.ndarray
    rho_ss: float
    shots: np.ndarray


def select_anchor(diag_estimates) -> int:
    """0-based index of the largest diagonal estimate; ties go to the smallest index."""
    diag = np.asarray(diag_estimates, dtype=np.float64)
    if diag.size < 2:
        raise ValueError("need at least two diagonal estimates")
    if not np.any(diag > 0):
        raise ValueError("no population detected in any basis state")
    return int(np.argmax(diag))


def offdiagonal_estimate(f_plus, f_minus_i, rho_ss, rho_jj):
    """``rho_js`` from the P_j and Q_j outcome frequencies and two diagonals.

    Works elementwise on arrays.
    """
    c = (1 + 1j) / 2
    return f_plus + 1j * f_minus_i - c * rho_ss - c * rho_jj


def reconstruct_pure_state(column) -> np.ndarray:
    """Rank-one, unit-trace density matrix built from an estimated column."""
    c = column.column if isinstance(column, ColumnEstimate) else np.asarray(column, dtype=np.complex128)
    norm2 = float(np.vdot(c, c).real)
    if norm2 == 0.0:
        raise ValueError("cannot reconstruct a state from an all-zero column")
    return np.outer(c, c.conj()) / norm2


def estimate_column(sampler, plan: ShotPlan | None = None) -> ColumnEstimate:
    """Run the adaptive measurement sequence against ``sampler``.

    ``plan=None`` is only accepted for exact-probability samplers.
    """
    if plan is None:
        if not getattr(sampler, "exact", False):
            raise ValueError("a shot plan is required for a finite-shot sampler")
        n_diag = n_off = None
    else:
        if plan.n_per_setting < 1 or plan.n_diagonal < 1:
            raise ValueError("shot plan assigns zero shots to a setting")
        n_diag, n_off = plan.n_diagonal, plan.n_per_setting
    d = sampler.d

    # the anchor depends on the diagonal outcome, so this stage comes first
    diag = np.asarray(sampler.measure(Setting("diag"), n_diag), dtype=np.float64)
    s = select_anchor(diag)

    others = [j for j in range(d) if j != s]
    f_plus = np.empty(d - 1)
    f_minus = np.empty(d - 1)
    for i, j in enumerate(others):
        f_plus[i] = sampler.measure(Setting("plus", s, j), n_off)[0]
        f_minus[i] = sampler.measure(Setting("minus_i", s, j), n_off)[0]

    column = np.empty(d, dtype=np.complex128)
    column[others] = offdiagonal_estimate(f_plus, f_minus, diag[s], diag[others])
    column[s] = diag[s]

    shots = np.zeros(d, dtype=np.int64)
    if plan is not None:
        shots[:] = n_off
        shots[s] = n_diag
    return ColumnEstimate(s, column, float(diag[s]), shots)


def fast_qst(sampler, plan: ShotPlan | None = None) -> np.ndarray:
    """Estimate the (assumed pure) state behind ``sampler``."""
    return reconstruct_pure_state(estimate_column(sampler, plan))
