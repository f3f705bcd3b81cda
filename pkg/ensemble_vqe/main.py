"""
Command-line entry point.

    python -m ensemble_vqe.main run <config.json> [--seed N] [--threads N] [--out-dir DIR] [--smooth-sigma S]
    python -m ensemble_vqe.main stats <summary.csv> <summary.csv>... [--out-dir DIR] [--seed N]
    python -m ensemble_vqe.main oracle <fcidump|matrix> [--frozen ...] [--active ...] [--electrons N] [--states K]
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Type

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from .config import settings
from .exceptions import (
    EXIT_CONFIG,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_UNHANDLED,
    AppError,
    ConfigError,
)
from .fermion import fci_matrix, freeze_core, read_fcidump, s_squared_operator
from .harness import compare_summaries, load_scenario, run_scenario
from .models.active_space import ActiveSpaceSpec
from .operators import DenseHermitian, eigendecompose
from .qdft import read_matrix
from .utils import ensure_directory_exists, setup_logging, write_json

logger = logging.getLogger(__name__)


def parse_args(argv: Optional[Sequence[str]] = None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(
        prog="ensemble_vqe", description=f"{settings.PROJECT_NAME} {settings.VERSION}"
    )
    parser.add_argument("--debug", action="store_true", help="Verbose logging.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="Run a scenario file.")
    run.add_argument("config", type=Path, help="Scenario JSON file.")
    run.add_argument("--seed", type=int, default=None, help="Override the scenario seed.")
    run.add_argument("--threads", type=int, default=None, help="Worker threads (1 = deterministic order).")
    run.add_argument("--out-dir", type=Path, default=None, help="Output directory.")
    run.add_argument("--smooth-sigma", type=float, default=None, help="Gaussian width for smoothed plot exports.")

    stats = sub.add_parser("stats", help="Compare summary CSVs (first against each other).")
    stats.add_argument("summaries", type=Path, nargs="+", help="summary.csv files.")
    stats.add_argument("--column", default="trace_error", help="Error column to compare.")
    stats.add_argument("--out-dir", type=Path, default=None, help="Where to write the StatReport JSON.")
    stats.add_argument("--seed", type=int, default=0, help="Bootstrap seed.")

    oracle = sub.add_parser("oracle", help="Print the exact spectrum of an FCIDUMP or matrix file.")
    oracle.add_argument("source", type=Path, help="FCIDUMP or plain-text matrix file.")
    oracle.add_argument("--frozen", type=int, nargs="*", default=[], help="Frozen spatial orbitals (0-based).")
    oracle.add_argument("--active", type=int, nargs="*", default=None, help="Active spatial orbitals (0-based).")
    oracle.add_argument("--electrons", type=int, default=None, help="Active electrons.")
    oracle.add_argument("--states", type=int, default=4, help="Number of eigenvalues to print.")
    return parser.parse_args(argv)


def command_run(args: argparse.Namespace) -> int:
    config = load_scenario(args.config)
    if args.seed is not None:
        config = config.copy(update={"seed": args.seed})
    outcome = run_scenario(config, args.out_dir, args.threads, args.smooth_sigma)
    print(f"Wrote {len(outcome.points)} records to {outcome.out_dir}")
    return EXIT_OK


def command_stats(args: argparse.Namespace) -> int:
    reports = compare_summaries(args.summaries, args.column, args.seed)
    out_dir = ensure_directory_exists(args.out_dir or settings.OUT_DIR)
    for report in reports:
        path = write_json(out_dir / f"stats_{report.method_a}_vs_{report.method_b}.json", report)
        print(f"{report.method_a} vs {report.method_b}: AUC p = {report.auc_p_value} -> {path}")
    return EXIT_OK


def _is_matrix_file(path: Path) -> bool:
    with open(path, "r", encoding="utf-8") as fin:
        for line in fin:
            if line.strip():
                tokens = line.split()
                return not line.lstrip().startswith("&") and len(tokens) == 1
    return False


def command_oracle(args: argparse.Namespace) -> int:
    try:
        is_matrix = _is_matrix_file(args.source)
    except OSError as e:
        raise ConfigError(f"Cannot read {args.source}: {e}")

    if is_matrix:
        values, _ = eigendecompose(DenseHermitian(read_matrix(args.source).entries))
        for k, value in enumerate(values[: args.states]):
            print(f"{k:4d} {float(value)!r}")
        return EXIT_OK

    ints = read_fcidump(args.source)
    electrons = args.electrons if args.electrons is not None else ints.electron_count
    if electrons is None:
        raise ConfigError("Electron count missing from the FCIDUMP header; pass --electrons")
    active = args.active if args.active is not None else [
        i for i in range(ints.orbital_count) if i not in set(args.frozen)
    ]
    try:
        spec = ActiveSpaceSpec(frozen=args.frozen, active=active, active_electrons=electrons)
    except PydanticValidationError as e:
        raise ConfigError(f"Invalid active space: {e}")
    h = freeze_core(ints, spec)
    mat, dets = fci_matrix(h, electrons // 2, electrons // 2)
    values, vectors = eigendecompose(DenseHermitian(mat))
    s2 = s_squared_operator(h.orbital_count)
    full = np.zeros((1 << h.qubit_count, vectors.shape[1]), dtype=complex)
    full[dets] = vectors
    for k in range(min(args.states, values.size)):
        spin = float(np.real(np.vdot(full[:, k], s2.apply(full[:, k]))))
        print(f"{k:4d} {float(values[k])!r}  <S^2> = {spin:.6f}")
    return EXIT_OK


COMMANDS: Dict[str, Callable[[argparse.Namespace], int]] = {
    "run": command_run,
    "stats": command_stats,
    "oracle": command_oracle,
}


def _app_error_handler(exc: AppError) -> int:
    level = logging.ERROR if exc.exit_code == EXIT_NUMERICAL else logging.WARNING
    logger.log(level, f"{exc.error_code}: {exc.detail}")
    print(f"error ({exc.error_code}): {exc.detail}", file=sys.stderr)
    return exc.exit_code


def _pydantic_error_handler(exc: PydanticValidationError) -> int:
    logger.warning(f"Validation error: {exc.errors()}")
    print(f"error (config_error): {exc}", file=sys.stderr)
    return EXIT_CONFIG


def _global_exception_handler(exc: Exception) -> int:
    logger.critical(f"Unhandled exception: {str(exc)}", exc_info=True)
    print(f"error (internal): {exc}", file=sys.stderr)
    return EXIT_UNHANDLED


EXCEPTION_HANDLERS: List[Tuple[Type[Exception], Callable[..., int]]] = [
    (AppError, _app_error_handler),
    (PydanticValidationError, _pydantic_error_handler),
    (Exception, _global_exception_handler),
]


def handle_exception(exc: Exception) -> int:
    for exc_type, handler in EXCEPTION_HANDLERS:
        if isinstance(exc, exc_type):
            return handler(exc)
    raise exc


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = parse_args(argv)
    setup_logging(debug=True if args.debug else None)
    try:
        return COMMANDS[args.command](args)
    except Exception as exc:
        return handle_exception(exc)


if __name__ == "__main__":
    sys.exit(main())
