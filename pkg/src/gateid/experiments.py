"""Experiment drivers behind the command line: scaling sweeps, timing, self-checks."""
from __future__ import annotations

import csv
import hashlib
import io
import json
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Callable, NamedTuple

import numpy as np
from scipy import stats

from . import oracle
from .identification import (
    identify_gate,
    rearrange_to_D,
    reconstruct_gate,
    select_best_row,
    squared_error,
    gauge_distance,
)
from .linalg import nearest_unitary, partial_trace_first, vectorize, hs_norm
from .measurement import allocate_shots, min_total_shots
from .quantum import load_gate, named_gate

__all__ = [
    "CheckResult",
    "ExperimentConfig",
    "ScalingResult",
    "SlopeFit",
    "default_n_grid",
    "derive_seed",
    "fit_slope",
    "scaled_shots",
    "run_scaling",
    "run_timing",
    "run_verification",
    "timing_csv",
    "write_scaling",
]

METRICS = ("gauge", "first-entry-real")
RAW_HEADER = ["n_nominal", "n_consumed", "rep", "seed", "sq_error"]
SUMMARY_HEADER = ["n_nominal", "mean_mse", "std_mse", "reps"]
TIMING_HEADER = [
    "qubits",
    "d",
    "n_nominal",
    "n_consumed",
    "online_seconds",
    "sampling_seconds",
    "sq_error",
    "online_ratio_vs_half_d",
]


def default_n_grid() -> list[int]:
    """Seven log-spaced budgets from 1e4 to 1e7."""
    return [int(round(x)) for x in np.logspace(4, 7, 7)]


def derive_seed(master: int, n_total: int, rep: int) -> int:
    """Per-repetition seed: ``master + blake2b("{n_total}:{rep}")`` modulo 2**63."""
    digest = hashlib.blake2b(f"{n_total}:{rep}".encode(), digest_size=8).digest()
    return (master + int.from_bytes(digest, "big")) % 2**63


@dataclass
class ExperimentConfig:
    gate: str = "hadamard"
    qubits: int = 1
    matrix_file: str | None = None
    n_grid: list[int] = field(default_factory=default_n_grid)
    repetitions: int = 50
    mix_alpha: float = 1.0
    seed: int = 0
    metric: str = "gauge"
    workers: int = 1

    def gate_matrix(self) -> np.ndarray:
        if self.matrix_file:
            return load_gate(self.matrix_file)
        return named_gate(self.gate, self.qubits)

    def gate_spec(self) -> dict:
        if self.matrix_file:
            return {"matrix_file": str(self.matrix_file)}
        return {"name": self.gate, "qubits": self.qubits}

    def validate(self, d: int) -> None:
        grid = list(self.n_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("n_grid must be strictly increasing")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")
        if not 0.0 < self.mix_alpha <= 1.0:
            raise ValueError(f"mix_alpha must lie in (0, 1], got {self.mix_alpha}")
        if self.metric not in METRICS:
            raise ValueError(f"metric must be one of {METRICS}, got {self.metric!r}")
        low = min_total_shots(d)
        for n in grid:
            if n < low:
                raise ValueError(f"N={n} is below the minimum (3d-2)(2d-1) = {low} for d={d}")


class SlopeFit(NamedTuple):
    slope: float
    stderr: float
    intercept: float


def fit_slope(points) -> SlopeFit:
    """Ordinary least squares on ``(x, y)`` pairs (typically log10 N, log10 MSE)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2 or pts.shape[0] < 3:
        raise ValueError("need at least three (x, y) points")
    x, y = pts[:, 0], pts[:, 1]
    if np.ptp(x) == 0:
        raise ValueError("all x values are identical")
    res = stats.linregress(x, y)
    return SlopeFit(float(res.slope), float(res.stderr), float(res.intercept))


@dataclass
class ScalingResult:
    config: ExperimentConfig
    raw: list[tuple[int, int, int, int, float]]
    summary: list[tuple[int, float, float, int]]
    fit: SlopeFit

    def mean_mse(self) -> dict[int, float]:
        return {n: m for n, m, _, _ in self.summary}

    def raw_csv(self) -> str:
        return _csv(RAW_HEADER, self.raw)

    def summary_csv(self) -> str:
        return _csv(SUMMARY_HEADER, self.summary)

    def summary_json(self) -> str:
        doc = {
            "slope": self.fit.slope,
            "slope_stderr": self.fit.stderr,
            "intercept": self.fit.intercept,
            "metric": self.config.metric,
            "gate": self.config.gate_spec(),
            "n_grid": list(self.config.n_grid),
            "config": asdict(self.config),
        }
        return json.dumps(doc, indent=2) + "\n"


def _fmt(v) -> str:
    return repr(float(v)) if isinstance(v, (float, np.floating)) else str(v)


def _csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_fmt(v) for v in row])
    return buf.getvalue()


def _one_run(args):
    u, n_total, rep, seed, alpha, metric = args
    est = identify_gate(u, n_total, mix_alpha=alpha, seed=seed)
    return n_total, est.n_total_consumed, rep, seed, squared_error(est.u_hat, u, metric)


def run_scaling(config: ExperimentConfig) -> ScalingResult:
    """Squared error of repeated identifications over a grid of budgets."""
    u = config.gate_matrix()
    config.validate(u.shape[0])
    if len(config.n_grid) < 3:
        raise ValueError("a scaling sweep needs at least three grid points")
    tasks = [
        (u, n, rep, derive_seed(config.seed, n, rep), config.mix_alpha, config.metric)
        for n in config.n_grid
        for rep in range(config.repetitions)
    ]
    if config.workers > 1:
        with ProcessPoolExecutor(config.workers) as pool:
            raw = list(pool.map(_one_run, tasks, chunksize=8))
    else:
        raw = [_one_run(t) for t in tasks]
    raw.sort(key=lambda r: (r[0], r[2]))

    summary = []
    for n in config.n_grid:
        errs = np.array([r[4] for r in raw if r[0] == n])
        std = float(np.std(errs, ddof=1)) if errs.size > 1 else 0.0
        summary.append((n, float(errs.mean()), std, int(errs.size)))
    fit = fit_slope([(np.log10(n), np.log10(m)) for n, m, _, _ in summary])
    return ScalingResult(config, raw, summary, fit)


def write_scaling(result: ScalingResult, out_dir) -> dict[str, Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {"raw": out / "raw.csv", "summary": out / "summary.csv", "json": out / "summary.json"}
    paths["raw"].write_text(result.raw_csv(), encoding="utf-8")
    paths["summary"].write_text(result.summary_csv(), encoding="utf-8")
    paths["json"].write_text(result.summary_json(), encoding="utf-8")
    return paths


def scaled_shots(d: int) -> int:
    """Budget ``N = 1e3 * d^2 * (3d - 2)`` used for the multi-qubit runs."""
    return 1000 * d * d * (3 * d - 2)


def run_timing(qubit_list, shots_rule: str = "scaled", seed: int = 0, repeats: int = 3) -> list[tuple]:
    """Online computation time and squared error of identifying ``H^{(x) q}``.

    The online time excludes state preparation and sampling; the best of
    ``repeats`` runs is reported. ``shots_rule`` is ``"scaled"`` or ``"exact"``.
    """
    if shots_rule not in ("scaled", "exact"):
        raise ValueError(f"unknown shots rule {shots_rule!r}")
    qubit_list = sorted(set(int(q) for q in qubit_list))
    if not qubit_list or qubit_list[0] < 1 or qubit_list[-1] > 7:
        raise ValueError("qubit counts must lie in 1..7")
    rows = []
    online_by_d = {}
    for q in qubit_list:
        u = named_gate("hadamard", q)
        d = u.shape[0]
        exact = shots_rule == "exact"
        n_total = None if exact else scaled_shots(d)
        runs = [identify_gate(u, n_total, seed=seed, exact=exact) for _ in range(max(1, repeats))]
        est = runs[0]
        online = min(r.online_seconds for r in runs)
        sampling = min(r.sampling_seconds for r in runs)
        online_by_d[d] = online
        half = online_by_d.get(d // 2)
        ratio = online / half if half else ""
        consumed = "" if exact else allocate_shots(n_total, d).n_consumed
        rows.append((q, d, "" if exact else n_total, consumed, online, sampling,
                     squared_error(est.u_hat, u), ratio))
    return rows


def timing_csv(rows) -> str:
    return _csv(TIMING_HEADER, rows)


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str


def _random_complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def run_verification(
    max_dim: int,
    seed: int = 0,
    rearrange: Callable = rearrange_to_D,
    procrustes_samples: int = 10_000,
) -> list[CheckResult]:
    """Cross-check the fast pipeline against the reference implementations."""
    if not 2 <= max_dim <= oracle.MAX_ORACLE_DIM:
        raise ValueError(f"max_dim must lie in 2..{oracle.MAX_ORACLE_DIM}, got {max_dim}")
    rng = np.random.default_rng(seed)
    dims = range(2, max_dim + 1)
    results = []

    def check(name, ok, detail=""):
        results.append(CheckResult(name, bool(ok), detail))

    Bs = {d: oracle.build_B(d) for d in dims}
    for d in dims:
        check(f"permutation d={d}", oracle.is_permutation(Bs[d]))
        check(f"delta-vs-products d={d}", np.array_equal(Bs[d], oracle.build_B_from_products(d)))

    for d in dims:
        bad = 0
        for _ in range(20):
            lam = _random_complex(rng, d, d * d)
            full = oracle.direct_D(lam, Bs[d])
            if not np.array_equal(rearrange(lam), full[::d]):
                bad += 1
        check(f"mapping-equivalence d={d}", bad == 0, f"{bad}/20 mismatches")

    for d in dims:
        worst = 0.0
        for _ in range(10):
            g = oracle.haar_unitaries(d, 1, rng)[0]
            v = vectorize(g)
            worst = max(worst, np.abs(partial_trace_first(np.outer(v, v.conj()), d) - np.eye(d)).max())
        check(f"partial-trace d={d}", worst <= 1e-12, f"max deviation {worst:.2e}")

    for d in dims:
        worst_pipeline = worst_rows = 0.0
        for _ in range(5):
            u = oracle.haar_unitaries(d, 1, rng)[0]
            worst_pipeline = max(worst_pipeline, gauge_distance(identify_gate(u, exact=True).u_hat, u))
            drows = rearrange_to_D(oracle.exact_lambda_rows(u))
            est = reconstruct_gate(drows[select_best_row(drows)])
            worst_rows = max(worst_rows, gauge_distance(est.u_hat, u))
        check(
            f"noiseless-roundtrip d={d}",
            max(worst_pipeline, worst_rows) <= 1e-10,
            f"pipeline {worst_pipeline:.2e}, exact rows {worst_rows:.2e}",
        )

    worst_gap = -np.inf
    for _ in range(5):
        s = _random_complex(rng, 2, 2)
        fast = hs_norm(nearest_unitary(s) - s)
        brute = hs_norm(oracle.brute_force_nearest_unitary(s, procrustes_samples, rng) - s)
        worst_gap = max(worst_gap, fast - brute)
    check("procrustes-optimality d=2", worst_gap <= 1e-6, f"worst gap {worst_gap:.2e}")
    return results
