"""Unitary gate identification from reconstructed pure output states.

Pipeline: tomography of the ``3d - 2`` probe outputs, recombination into the
images of ``|1><k|``, rearrangement of those ``d^3`` numbers into the rows of the
rank-one matrix ``D`` whose ``a'``-th extracted row is ``G_{1a'} vec(G)^dagger``
(``G = U^T``), selection of the row with the largest norm, and projection of the
corresponding ``d x d`` matrix onto the unitaries.
"""
from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .linalg import as_matrix, is_unitary, nearest_unitary, svd, unvectorize
from .measurement import ShotPlan, StateSampler, allocate_shots
from .quantum import (
    apply_gate,
    combine_to_nonhermitian,
    mix_with_maximally_mixed,
    probe_family,
    projector,
)
from .tomography import fast_qst

__all__ = [
    "GateEstimate",
    "assemble_lambda_rows",
    "calibrate_phase",
    "first_entry_real",
    "gauge_distance",
    "identify_from_samplers",
    "identify_gate",
    "rearrange_to_D",
    "reconstruct_gate",
    "select_best_row",
    "squared_error",
]

DEGENERATE_ENTRY = 1e-10


@dataclass(frozen=True)
class GateEstimate:
    """Estimated gate and the diagnostics of the run that produced it.

    ``selected_row_j`` and ``phase_entry`` are 1-based. Timing fields are kept
    out of the serialised form so that output files stay reproducible.
    """

    u_hat: np.ndarray
    selected_row_j: int
    row_norms: np.ndarray
    min_singular_value: float
    phase_convention: str = "uncalibrated"
    phase_entry: int | None = None
    seed: int | None = None
    n_total_nominal: int | None = None
    n_total_consumed: int | None = None
    online_seconds: float = field(default=0.0, compare=False)
    sampling_seconds: float = field(default=0.0, compare=False)

    @property
    def d(self) -> int:
        return self.u_hat.shape[0]

    def to_dict(self) -> dict:
        out = asdict(self)
        del out["online_seconds"], out["sampling_seconds"]
        u = out.pop("u_hat").ravel()
        out = {
            "d": self.d,
            "matrix": [[float(z.real), float(z.imag)] for z in u],
            **out,
        }
        out["row_norms"] = [float(x) for x in self.row_norms]
        out["min_singular_value"] = float(self.min_singular_value)
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2) + "\n"

    @classmethod
    def from_dict(cls, data: dict) -> "GateEstimate":
        d = data["d"]
        u = np.array([complex(re, im) for re, im in data["matrix"]]).reshape(d, d)
        kwargs = {k: v for k, v in data.items() if k not in ("d", "matrix")}
        kwargs["row_norms"] = np.asarray(kwargs["row_norms"], dtype=np.float64)
        return cls(u_hat=u, **kwargs)


def assemble_lambda_rows(outputs) -> np.ndarray:
    """Stack the images of ``|1><a|`` (a = 1..d) as rows of length ``d^2``.

    Row ``a``, entry ``(j'-1)d + k'`` holds entry ``(j', k')`` of the image, i.e.
    each image is flattened row by row.
    """
    mats = [np.asarray(m, dtype=np.complex128) for m in outputs]
    d = len(mats)
    for m in mats:
        if m.shape != (d, d):
            raise ValueError(f"expected {d} matrices of shape ({d}, {d}), got {m.shape}")
    return np.stack([m.reshape(-1) for m in mats])


def rearrange_to_D(lambda_rows) -> np.ndarray:
    """Extracted rows ``(a'-1)d + 1`` of ``D``, without forming the permutation.

    With 1-based indices, ``Lambda[a, b]`` lands in row ``b - (b-1) mod d`` and
    column ``((b-1) mod d) d + a`` of ``D``. Row ``r`` of ``D`` is returned as
    row ``(r - 1) / d`` (0-based) of the result.
    """
    lam = np.asarray(lambda_rows, dtype=np.complex128)
    d = lam.shape[0]
    if lam.shape != (d, d * d):
        raise ValueError(f"expected a {d}x{d * d} array, got {lam.shape}")
    a = np.arange(1, d + 1)[:, None]
    b = np.arange(1, d * d + 1)[None, :]
    rows = b - (b - 1) % d
    cols = ((b - 1) % d) * d + a
    out = np.zeros_like(lam)
    out[(rows - 1) // d, cols - 1] = lam
    return out


def select_best_row(drows) -> int:
    """0-based index of the row with the largest norm (ties: smallest index)."""
    norms = np.linalg.norm(np.asarray(drows), axis=1)
    if not np.any(norms > 0):
        raise ValueError("all rows of D are zero")
    return int(np.argmax(norms))


def reconstruct_gate(drow, selected_row: int = 1, row_norms=None) -> GateEstimate:
    """Nearest-unitary gate from one extracted row of ``D``.

    The unknown prefactor ``G_{1j}`` is divided out: the row is scaled to unit
    norm and its largest entry rotated to be real, so the estimate carries an
    arbitrary but reproducible global phase. ``min_singular_value`` refers to
    the unnormalised row.
    """
    drow = np.asarray(drow, dtype=np.complex128).ravel()
    d = int(round(np.sqrt(drow.size)))
    if d * d != drow.size:
        raise ValueError(f"row length {drow.size} is not a perfect square")
    if not np.any(drow != 0):
        raise ValueError("cannot reconstruct a gate from an all-zero row")
    norm = float(np.linalg.norm(drow))
    pivot = drow[int(np.argmax(np.abs(drow)))]
    s = unvectorize((drow * (np.conj(pivot) / abs(pivot)) / norm).conj(), d, d)
    _, sigma, _ = svd(s)
    g = nearest_unitary(s)
    norms = np.array([norm]) if row_norms is None else np.asarray(row_norms)
    return GateEstimate(g.T, selected_row, norms, float(sigma[-1]) * norm)


def first_entry_real(u) -> tuple[np.ndarray, int]:
    """Rotate the global phase so the (1,1) entry is real and nonnegative.

    If ``|u[0, 0]| <= 1e-10`` the largest-magnitude entry of the first column is
    used instead. Returns the rotated matrix and the 1-based row that was used.
    """
    u = np.asarray(u, dtype=np.complex128)
    row = 0
    if abs(u[0, 0]) <= DEGENERATE_ENTRY:
        row = int(np.argmax(np.abs(u[:, 0])))
    z = u[row, 0]
    return u * (np.conj(z) / abs(z)), row + 1


def calibrate_phase(estimate: GateEstimate, convention="first-entry-real", fallback: bool = True) -> GateEstimate:
    """Fix the global phase of ``estimate``.

    ``convention`` is ``"first-entry-real"`` or a reference unitary, in which case
    the phase minimising ``||e^{i theta} U_hat - U_ref||`` is applied.
    """
    u = estimate.u_hat
    if isinstance(convention, str):
        if convention != "first-entry-real":
            raise ValueError(f"unknown phase convention {convention!r}")
        if abs(u[0, 0]) <= DEGENERATE_ENTRY and not fallback:
            raise ValueError("U_hat[1,1] vanishes; use a reference gate to fix the phase")
        rotated, row = first_entry_real(u)
        return replace(estimate, u_hat=rotated, phase_convention="first-entry-real", phase_entry=row)
    ref = as_matrix(convention, "reference gate")
    if ref.shape != u.shape:
        raise ValueError(f"reference gate {ref.shape} does not match estimate {u.shape}")
    theta = -np.angle(np.trace(ref.conj().T @ u))
    return replace(estimate, u_hat=np.exp(1j * theta) * u, phase_convention="reference-gate", phase_entry=None)


def gauge_distance(u_hat, u) -> float:
    """``min_theta ||e^{i theta} U_hat - U||`` for unitaries of equal size."""
    u_hat = np.asarray(u_hat, dtype=np.complex128)
    u = np.asarray(u, dtype=np.complex128)
    if u_hat.shape != u.shape:
        raise ValueError(f"dimension mismatch: {u_hat.shape} vs {u.shape}")
    overlap = np.trace(u_hat.conj().T @ u)
    # equals sqrt(2d - 2|overlap|), evaluated without cancellation near zero
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(phase * u_hat - u))


def squared_error(u_hat, u, metric: str = "gauge") -> float:
    """Squared identification error under ``metric`` (``gauge`` or ``first-entry-real``)."""
    if metric == "gauge":
        return gauge_distance(u_hat, u) ** 2
    if metric == "first-entry-real":
        a, _ = first_entry_real(u_hat)
        b, _ = first_entry_real(u)
        return float(np.linalg.norm(a - b) ** 2)
    raise ValueError(f"unknown error metric {metric!r}")


def identify_from_samplers(samplers, plan: ShotPlan | None = None) -> GateEstimate:
    """Identify a gate given one measurement oracle per probe.

    ``samplers`` follows the :func:`probe_family` ordering. Each oracle needs a
    ``d`` attribute and ``measure(setting, shots)``; an ``elapsed`` attribute, if
    present, is treated as time spent outside the online computation.
    """
    samplers = list(samplers)
    d = samplers[0].d
    if len(samplers) != 3 * d - 2:
        raise ValueError(f"expected {3 * d - 2} probe oracles for d={d}, got {len(samplers)}")
    family = probe_family(d)

    t0 = time.perf_counter()
    outputs = [fast_qst(sampler, plan) for sampler in samplers]
    images = [outputs[family.index("diag", 1)]]
    for k in range(2, d + 1):
        images.append(
            combine_to_nonhermitian(
                outputs[family.index("plus", k)],
                outputs[family.index("minus_i", k)],
                outputs[family.index("diag", 1)],
                outputs[family.index("diag", k)],
            )
        )
    drows = rearrange_to_D(assemble_lambda_rows(images))
    j = select_best_row(drows)
    estimate = reconstruct_gate(drows[j], j + 1, np.linalg.norm(drows, axis=1))
    total = time.perf_counter() - t0

    sampling = sum(getattr(s, "elapsed", 0.0) for s in samplers)
    return replace(
        estimate,
        n_total_nominal=None if plan is None else plan.n_total,
        n_total_consumed=None if plan is None else plan.n_consumed,
        online_seconds=total - sampling,
        sampling_seconds=sampling,
    )


def identify_gate(
    gate,
    n_total: int | None = None,
    mix_alpha: float = 1.0,
    seed: int = 0,
    exact: bool = False,
) -> GateEstimate:
    """Simulate the full identification experiment on ``gate``.

    ``exact=True`` replaces sampled frequencies by Born probabilities and
    ignores ``n_total``. Otherwise ``n_total`` probe copies are split evenly
    over the ``3d - 2`` probes.
    """
    u = as_matrix(gate, "gate")
    d = u.shape[0]
    if u.shape != (d, d) or not is_unitary(u, atol=1e-8):
        raise ValueError("gate must be a square unitary matrix")
    if not 0.0 < mix_alpha <= 1.0:
        raise ValueError(f"mix_alpha must lie in (0, 1], got {mix_alpha}")
    if exact:
        plan = None
    elif n_total is None:
        raise ValueError("n_total is required unless exact=True")
    else:
        plan = allocate_shots(n_total, d)

    samplers = []
    for p, psi in enumerate(probe_family(d).states):
        rho_in = mix_with_maximally_mixed(projector(psi), mix_alpha)
        samplers.append(StateSampler(apply_gate(u, rho_in), seed=seed, probe=p, exact=exact))
    estimate = identify_from_samplers(samplers, plan)
    return replace(estimate, seed=seed)
