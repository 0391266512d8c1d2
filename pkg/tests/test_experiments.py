import numpy as np
import pytest

from gateid.experiments import (
    ExperimentConfig,
    default_n_grid,
    derive_seed,
    fit_slope,
    scaled_shots,
    run_scaling,
    run_timing,
    run_verification,
    timing_csv,
    write_scaling,
)
from gateid.oracle import build_B, direct_D
from gateid.identification import rearrange_to_D


def test_default_grid():
    grid = default_n_grid()
    assert len(grid) == 7 and grid[0] == 10_000 and grid[-1] == 10_000_000
    assert all(b > a for a, b in zip(grid, grid[1:]))


def test_fit_slope_exact_line():
    x = np.log10([1e3, 1e4, 1e5, 1e6])
    fit = fit_slope(np.c_[x, 2 - x])
    assert fit.slope == pytest.approx(-1)
    assert fit.intercept == pytest.approx(2)
    assert fit.stderr == pytest.approx(0, abs=1e-12)


def test_fit_slope_rejects():
    with pytest.raises(ValueError):
        fit_slope([(1, 1), (2, 2)])
    with pytest.raises(ValueError):
        fit_slope([(1, 1), (1, 2), (1, 3)])


def test_derive_seed():
    assert derive_seed(0, 100, 1) == derive_seed(0, 100, 1)
    seeds = {derive_seed(0, n, r) for n in (100, 1000) for r in range(50)}
    assert len(seeds) == 100
    assert 0 <= derive_seed(2**63 - 1, 5, 5) < 2**63


def test_scaled_shots():
    assert scaled_shots(2) == 16_000
    assert scaled_shots(16) == 1000 * 256 * 46


def test_config_validation():
    cfg = ExperimentConfig(n_grid=[100, 50, 200])
    with pytest.raises(ValueError, match="increasing"):
        cfg.validate(2)
    with pytest.raises(ValueError, match="minimum"):
        ExperimentConfig(n_grid=[5, 50, 200]).validate(2)
    with pytest.raises(ValueError):
        ExperimentConfig(mix_alpha=0).validate(2)
    with pytest.raises(ValueError):
        ExperimentConfig(metric="l1").validate(2)


def test_small_scaling_run(tmp_path):
    cfg = ExperimentConfig(n_grid=[1000, 4000, 16000], repetitions=20, seed=4)
    res = run_scaling(cfg)
    assert len(res.raw) == 60
    assert [r[0] for r in res.raw] == sorted(r[0] for r in res.raw)
    assert -1.5 < res.fit.slope < -0.5
    paths = write_scaling(res, tmp_path)
    lines = paths["raw"].read_text().splitlines()
    assert lines[0] == "n_nominal,n_consumed,rep,seed,sq_error" and len(lines) == 61
    assert paths["summary"].read_text().splitlines()[0] == "n_nominal,mean_mse,std_mse,reps"
    assert run_scaling(cfg).raw_csv() == res.raw_csv()


def test_parallel_matches_serial():
    base = dict(n_grid=[500, 1000, 2000], repetitions=6, seed=1)
    serial = run_scaling(ExperimentConfig(**base))
    parallel = run_scaling(ExperimentConfig(**base, workers=2))
    assert serial.raw_csv() == parallel.raw_csv()


def test_timing_rows():
    rows = run_timing([1, 2], "exact", repeats=1)
    assert [r[1] for r in rows] == [2, 4]
    assert rows[0][-1] == "" and rows[1][-1] > 0
    assert all(r[6] < 1e-18 for r in rows)
    assert timing_csv(rows).splitlines()[0].startswith("qubits,d,n_nominal")
    with pytest.raises(ValueError):
        run_timing([8])


def test_verification_passes():
    results = run_verification(3, procrustes_samples=2000)
    assert all(r.passed for r in results), [r for r in results if not r.passed]


def test_verification_catches_broken_mapping():
    def shifted(lam):
        out = rearrange_to_D(lam)
        return np.roll(out, 1, axis=1)

    results = run_verification(2, rearrange=shifted, procrustes_samples=1000)
    failed = {r.name for r in results if not r.passed}
    assert failed == {"mapping-equivalence d=2"}


def test_verification_with_full_oracle_is_consistent(rng):
    # the production mapping and the explicit permutation agree on every row it fills
    lam = rng.standard_normal((4, 16))
    assert np.array_equal(direct_D(lam, build_B(4))[::4], rearrange_to_D(lam))
