"""Command-line interface.

Exit codes: 0 success, 1 usage error, 2 runtime or numerical error,
3 verification failure. Every option may also be given in a JSON file passed
with ``--config``; command-line flags take precedence over the file.
"""
from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .experiments import (
    ExperimentConfig,
    default_n_grid,
    fit_slope,
    run_scaling,
    run_timing,
    run_verification,
    timing_csv,
    write_scaling,
)
from .identification import calibrate_phase, identify_gate
from .measurement import allocate_shots
from .quantum import GATE_NAMES

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


DEFAULTS = {
    "identify": {
        "gate": "hadamard", "qubits": 1, "matrix_file": None, "n_total": None, "seed": 0,
        "mix_alpha": 1.0, "exact": False, "phase": "first-entry-real", "output": "estimate.json",
    },
    "scaling": {
        "gate": "hadamard", "qubits": 1, "matrix_file": None, "n_grid": None, "repetitions": 50,
        "mix_alpha": 1.0, "seed": 0, "metric": "gauge", "workers": 1, "out_dir": "scaling-out",
    },
    "verify": {"max_dim": 4, "seed": 0, "report": None},
    "timing": {"qubits": [1, 2, 3, 4], "shots_rule": "scaled", "seed": 0, "repeats": 3, "output": "timing.csv"},
    "fit-slope": {"input": None, "output": None},
}


def _add_gate_options(p):
    p.add_argument("--gate", choices=GATE_NAMES, help="built-in gate name (default hadamard)")
    p.add_argument("--qubits", type=int, help="number of qubits for a built-in gate (default 1)")
    p.add_argument("--matrix-file", help="gate-matrix file; overrides --gate/--qubits")
    p.add_argument("--mix-alpha", type=float, help="probe purity parameter alpha in (0, 1] (default 1)")
    p.add_argument("--seed", type=int, help="master random seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="gateid", description="Unitary gate identification from pure probe states.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("identify", help="identify one gate and write the estimate as JSON")
    p.add_argument("--config", help="JSON file with option values")
    _add_gate_options(p)
    p.add_argument("--n-total", type=int, help="total number of probe copies N")
    p.add_argument("--exact", action="store_true", default=None, help="use exact probabilities (infinite shots)")
    p.add_argument("--phase", choices=["first-entry-real", "reference", "none"],
                   help="global phase convention; 'reference' aligns to the simulated gate")
    p.add_argument("-o", "--output", help="output JSON path (default estimate.json, '-' for stdout)")

    p = sub.add_parser("scaling", help="error versus total copies N, with a log-log slope fit")
    p.add_argument("--config", help="JSON file with option values")
    _add_gate_options(p)
    p.add_argument("--n-grid", type=int, nargs="+", help="strictly increasing budgets (default 7 points in 1e4..1e7)")
    p.add_argument("--repetitions", type=int, help="repetitions per budget (default 50)")
    p.add_argument("--metric", choices=["gauge", "first-entry-real"], help="error metric (default gauge)")
    p.add_argument("--workers", type=int, help="worker processes (default 1)")
    p.add_argument("--out-dir", help="directory for raw.csv, summary.csv, summary.json")

    p = sub.add_parser("verify", help="cross-check the pipeline against reference implementations")
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--max-dim", type=int, help="largest dimension checked, 2..6 (default 4)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--report", help="optional JSON report path")

    p = sub.add_parser("timing", help="online computation time for Hadamard tensor powers")
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("--qubits", type=int, nargs="+", help="qubit counts, each <= 7 (default 1 2 3 4)")
    p.add_argument("--shots-rule", choices=["scaled", "exact"],
                   help="'scaled': N = 1e3 d^2 (3d-2); 'exact': infinite shots (default scaled)")
    p.add_argument("--seed", type=int, help="random seed (default 0)")
    p.add_argument("--repeats", type=int, help="timing repeats, best is kept (default 3)")
    p.add_argument("-o", "--output", help="output CSV path (default timing.csv)")

    p = sub.add_parser("fit-slope", help="fit log10(mean_mse) against log10(n_nominal)")
    p.add_argument("input", nargs="?", help="summary CSV with n_nominal and mean_mse columns")
    p.add_argument("--config", help="JSON file with option values")
    p.add_argument("-o", "--output", help="write the fit as JSON here instead of stdout")
    return parser


def _resolve(args) -> dict:
    opts = dict(DEFAULTS[args.command])
    if getattr(args, "config", None):
        try:
            file_opts = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {args.config}: {exc}") from None
        unknown = set(file_opts) - set(opts)
        if unknown:
            raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
        opts.update(file_opts)
    for key in opts:
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _experiment_config(opts) -> ExperimentConfig:
    grid = opts.get("n_grid") or default_n_grid()
    return ExperimentConfig(
        gate=opts["gate"],
        qubits=int(opts["qubits"]),
        matrix_file=opts["matrix_file"],
        n_grid=[int(n) for n in grid],
        repetitions=int(opts.get("repetitions", 1)),
        mix_alpha=float(opts["mix_alpha"]),
        seed=int(opts["seed"]),
        metric=opts.get("metric", "gauge"),
        workers=int(opts.get("workers", 1)),
    )


def _load_gate(config: ExperimentConfig) -> np.ndarray:
    try:
        return config.gate_matrix()
    except (OSError, ValueError) as exc:
        raise UsageError(str(exc)) from None


def _write(text: str, path) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(text, encoding="utf-8")


def cmd_identify(opts) -> int:
    config = _experiment_config({**opts, "n_grid": [opts["n_total"] or 1]})
    u = _load_gate(config)
    d = u.shape[0]
    if not opts["exact"]:
        if opts["n_total"] is None:
            raise UsageError("--n-total is required unless --exact is given")
        try:
            allocate_shots(int(opts["n_total"]), d)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if not 0.0 < config.mix_alpha <= 1.0:
        raise UsageError(f"mix_alpha must lie in (0, 1], got {config.mix_alpha}")
    est = identify_gate(u, opts["n_total"], mix_alpha=config.mix_alpha, seed=config.seed, exact=bool(opts["exact"]))
    if opts["phase"] == "first-entry-real":
        est = calibrate_phase(est, "first-entry-real")
    elif opts["phase"] == "reference":
        est = calibrate_phase(est, u)
    _write(est.to_json(), opts["output"])
    return EXIT_OK


def cmd_scaling(opts) -> int:
    config = _experiment_config(opts)
    u = _load_gate(config)
    try:
        config.validate(u.shape[0])
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if len(config.n_grid) < 3:
        raise UsageError("n_grid needs at least three points")
    result = run_scaling(config)
    paths = write_scaling(result, opts["out_dir"])
    print(f"slope {result.fit.slope:.4f} +/- {result.fit.stderr:.4f}; wrote {', '.join(map(str, paths.values()))}")
    return EXIT_OK


def cmd_verify(opts) -> int:
    max_dim = int(opts["max_dim"])
    if not 2 <= max_dim <= 6:
        raise UsageError(f"--max-dim must lie in 2..6, got {max_dim}")
    results = run_verification(max_dim, seed=int(opts["seed"]))
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  {r.detail}".rstrip())
    if opts["report"]:
        doc = [{"name": r.name, "passed": r.passed, "detail": r.detail} for r in results]
        _write(json.dumps(doc, indent=2) + "\n", opts["report"])
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY


def cmd_timing(opts) -> int:
    qubits = [int(q) for q in opts["qubits"]]
    if not qubits or min(qubits) < 1 or max(qubits) > 7:
        raise UsageError("qubit counts must lie in 1..7")
    rows = run_timing(qubits, opts["shots_rule"], seed=int(opts["seed"]), repeats=int(opts["repeats"]))
    _write(timing_csv(rows), opts["output"])
    for row in rows:
        if row[1] == 16 and row[-1] != "":
            print(f"online-time ratio d=16/d=8: {row[-1]:.2f}")
    return EXIT_OK


def cmd_fit_slope(opts) -> int:
    if not opts["input"]:
        raise UsageError("an input summary CSV is required")
    try:
        with open(opts["input"], newline="", encoding="utf-8") as fh:
            rows = list(csv.DictReader(fh))
        points = [(np.log10(float(r["n_nominal"])), np.log10(float(r["mean_mse"]))) for r in rows]
    except (OSError, KeyError, ValueError) as exc:
        raise UsageError(f"cannot read {opts['input']}: {exc}") from None
    if len(points) < 3:
        raise UsageError("need at least three points to fit a slope")
    fit = fit_slope(points)
    doc = {"slope": fit.slope, "slope_stderr": fit.stderr, "intercept": fit.intercept, "points": len(points)}
    _write(json.dumps(doc, indent=2) + "\n", opts["output"])
    return EXIT_OK


COMMANDS = {
    "identify": cmd_identify,
    "scaling": cmd_scaling,
    "verify": cmd_verify,
    "timing": cmd_timing,
    "fit-slope": cmd_fit_slope,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = _resolve(args)
        return COMMANDS[args.command](opts)
    except UsageError as exc:
        print(f"gateid {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, np.linalg.LinAlgError, OSError) as exc:
        print(f"gateid {args.command}: runtime error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
