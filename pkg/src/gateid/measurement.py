"""Finite-shot measurement simulation.

Every (probe, setting) pair draws from its own random stream, derived from the
master seed by ``SeedSequence(seed, spawn_key=(probe, setting.key))``. Results
therefore do not depend on the order in which probes or settings are sampled.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .quantum import Setting

__all__ = [
    "CountsRecord",
    "ShotPlan",
    "StateSampler",
    "allocate_shots",
    "frequencies",
    "min_total_shots",
    "sample_counts",
    "stream_rng",
]

REMAINDER_POLICY = "probe-level remainder discarded; setting-level remainder to diagonal"


@dataclass(frozen=True)
class ShotPlan:
    n_total: int
    d: int
    n_per_probe: int
    n_per_setting: int
    n_diagonal: int
    policy: str = REMAINDER_POLICY

    @property
    def n_probes(self) -> int:
        return 3 * self.d - 2

    @property
    def n_settings(self) -> int:
        return 2 * self.d - 1

    @property
    def n_consumed(self) -> int:
        return self.n_probes * (self.n_diagonal + (self.n_settings - 1) * self.n_per_setting)


def min_total_shots(d: int) -> int:
    return (3 * d - 2) * (2 * d - 1)


def allocate_shots(n_total: int, d: int) -> ShotPlan:
    """Split ``n_total`` probe copies evenly over probes, then over settings."""
    minimum = min_total_shots(d)
    if n_total < minimum:
        raise ValueError(
            f"n_total={n_total} is too small for d={d}: need at least (3d-2)(2d-1) = {minimum}"
        )
    n_per_probe = n_total // (3 * d - 2)
    n_per_setting = n_per_probe // (2 * d - 1)
    remainder = n_per_probe - n_per_setting * (2 * d - 1)
    return ShotPlan(n_total, d, n_per_probe, n_per_setting, n_per_setting + remainder)


@dataclass(frozen=True)
class CountsRecord:
    povm_id: str
    counts: np.ndarray
    shots: int


def stream_rng(seed: int, probe: int, setting_key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(probe, setting_key)))


def sample_counts(probs, shots: int, rng: np.random.Generator, povm_id: str = "") -> CountsRecord:
    """Multinomial draw of ``shots`` outcomes from ``probs``."""
    p = np.asarray(probs, dtype=np.float64)
    if shots < 0:
        raise ValueError(f"shots must be >= 0, got {shots}")
    if np.any(p < -1e-12):
        raise ValueError(f"negative probability {p.min():.3g}")
    if abs(p.sum() - 1.0) > 1e-9:
        raise ValueError(f"probabilities sum to {p.sum():.12g}, not 1")
    p = np.clip(p, 0.0, None)
    p = p / p.sum()
    counts = rng.multinomial(shots, p)
    return CountsRecord(povm_id, counts, shots)


def frequencies(record: CountsRecord) -> np.ndarray:
    if record.shots <= 0:
        raise ValueError("cannot form frequencies from zero shots")
    return record.counts / record.shots


class StateSampler:
    """Measurement oracle for one fixed (unknown to the estimator) state.

    With ``exact=True`` the oracle returns Born probabilities instead of sampled
    frequencies (the infinite-shot limit). ``elapsed`` accumulates the time
    spent answering requests so callers can separate it from their own work.
    """

    def __init__(self, rho, seed: int | None = None, probe: int = 0, exact: bool = False):
        self.rho = np.asarray(rho, dtype=np.complex128)
        self.d = self.rho.shape[0]
        self.seed = seed
        self.probe = probe
        self.exact = exact
        self.elapsed = 0.0
        if not exact and seed is None:
            raise ValueError("a seed is required unless exact=True")

    def measure(self, setting: Setting, shots: int | None = None) -> np.ndarray:
        t0 = time.perf_counter()
        probs = setting.probabilities(self.rho)
        if self.exact:
            out = probs
        else:
            if shots is None or shots < 1:
                raise ValueError(f"need at least one shot per setting, got {shots}")
            rng = stream_rng(self.seed, self.probe, setting.key)
            out = frequencies(sample_counts(probs, shots, rng, setting.kind))
        self.elapsed += time.perf_counter() - t0
        return out
