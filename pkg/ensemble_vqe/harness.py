"""
Scenario runner: scan points x trials, error metrics against the exact
reference, persisted convergence records, summaries and statistics.

Layout under <out_dir>/<scenario name>/:
    scenario.json                    resolved configuration
    records/point{P}_trial{T}.csv    one ConvergenceRecord per run
    records/..._smoothed.csv         Gaussian-smoothed errors (plot data only)
    summary.csv                      one row per (trial, scan point)
    trials.json                      TrialSummary per trial
    report.json                      StatReport, cost error vs trace error
"""

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from pydantic import ValidationError as PydanticValidationError

from .config import settings
from .ensemble import ExactReference, evaluate, post_diagonalize
from .exceptions import ConfigError, NumericalError
from .models.results import PointResult, StatReport, TrialSummary
from .models.scenario import ScenarioConfig
from .optimizer import ConvergenceRecord, initial_parameters, minimize
from .scenarios import build_problem
from .statistics import area_under_curve, compare_methods, gaussian_smooth
from .utils import ensure_directory_exists, read_csv, state_label, write_csv, write_json

logger = logging.getLogger(__name__)

SUMMARY_HEADER = [
    "trial", "seed", "scan_index", "scan_value", "iterations", "status",
    "final_cost", "final_trace", "cost_error", "trace_error",
    "max_state_error", "median_state_error", "swap_count",
]


def load_scenario(path: Union[str, Path]) -> ScenarioConfig:
    """Read and validate a JSON scenario file"""
    try:
        with open(path, "r", encoding="utf-8") as fin:
            raw = json.load(fin)
    except OSError as e:
        raise ConfigError(f"Cannot read scenario {path}: {e}")
    except json.JSONDecodeError as e:
        raise ConfigError(f"Scenario {path} is not valid JSON: {e}")
    try:
        return ScenarioConfig.parse_obj(raw)
    except PydanticValidationError as e:
        raise ConfigError(f"Invalid scenario {path}: {e}")


def run_seed(seed: int, trial: int, scan_index: int) -> int:
    """Independent, reproducible seed for one (trial, scan point)"""
    return int(np.random.SeedSequence([seed, trial, scan_index]).generate_state(1)[0])


@dataclass
class PointRun:
    result: PointResult
    record: ConvergenceRecord
    cost_errors: np.ndarray
    trace_errors: np.ndarray


@dataclass
class ScenarioRun:
    config: ScenarioConfig
    out_dir: Path
    points: List[PointRun] = field(default_factory=list)
    trials: List[TrialSummary] = field(default_factory=list)
    report: Optional[StatReport] = None

    def point(self, trial: int, scan_index: int) -> PointRun:
        for run in self.points:
            if run.result.trial == trial and run.result.scan_index == scan_index:
                return run
        raise KeyError((trial, scan_index))


def run_point(config: ScenarioConfig, scan_index: int, trial: int) -> PointRun:
    """Build, minimise and score one (scan point, trial)"""
    scan_value = config.scan_values[scan_index]
    built = build_problem(config, scan_value)
    problem = built.problem
    seed = run_seed(config.seed, trial, scan_index)

    try:
        reference = ExactReference.for_problem(problem)
    except NumericalError:
        logger.error("Exact reference failed for %s", problem.label)
        raise

    start = initial_parameters(built.initial_parameters, problem.parameter_count, seed)
    params, record = minimize(problem, start, config.optimizer)

    scheme_weights = problem.weights.as_array()
    exact_cost = float(scheme_weights @ reference.eigenvalues)
    cost_errors = np.array([abs(it.cost - exact_cost) for it in record.iterations])
    trace_errors = np.array([abs(it.trace - reference.trace) for it in record.iterations])

    final = evaluate(problem, params)
    recovered, _ = post_diagonalize(problem, params)
    state_errors = reference.state_errors(recovered)

    result = PointResult(
        scan_index=scan_index,
        scan_value=scan_value,
        trial=trial,
        seed=seed,
        iterations=record.iteration_count,
        status=record.status.value,
        final_cost=final.cost,
        final_trace=final.trace,
        cost_error=float(cost_errors[-1]),
        trace_error=float(trace_errors[-1]),
        exact_energies=reference.eigenvalues.tolist(),
        recovered_energies=np.asarray(recovered).tolist(),
        state_errors=state_errors.tolist(),
        swap_events=record.swap_events(),
    )
    logger.info(
        "Point %d trial %d done", scan_index, trial,
        extra={
            "scenario": config.name, "scan_value": scan_value, "trial": trial,
            "status": result.status, "iterations": result.iterations,
            "cost_error": result.cost_error, "trace_error": result.trace_error,
        },
    )
    return PointRun(result, record, cost_errors, trace_errors)


def record_filename(scan_index: int, trial: int, smoothed: bool = False) -> str:
    suffix = "_smoothed" if smoothed else ""
    return f"point{scan_index:03d}_trial{trial:03d}{suffix}.csv"


def write_record(directory: Path, run: PointRun, smooth_sigma: Optional[float] = None) -> Path:
    """Per-iteration CSV; a smoothed twin when smooth_sigma is given"""
    k = len(run.result.exact_energies)
    labels = [f"E_{state_label(j)}" for j in range(k)]
    header = ["iteration", "cost", "trace", "cost_error", "trace_error", "gradient_norm"] + labels
    rows = [
        [it.iteration, it.cost, it.trace, float(ce), float(te), it.gradient_norm, *it.per_state_energies]
        for it, ce, te in zip(run.record.iterations, run.cost_errors, run.trace_errors)
    ]
    path = write_csv(directory / record_filename(run.result.scan_index, run.result.trial), header, rows)
    if smooth_sigma:
        smoothed_cost = gaussian_smooth(run.cost_errors, smooth_sigma)
        smoothed_trace = gaussian_smooth(run.trace_errors, smooth_sigma)
        write_csv(
            directory / record_filename(run.result.scan_index, run.result.trial, smoothed=True),
            ["iteration", "cost_error", "trace_error"],
            [[it.iteration, float(c), float(t)]
             for it, c, t in zip(run.record.iterations, smoothed_cost, smoothed_trace)],
        )
    return path


def summarize_trials(config: ScenarioConfig, runs: Sequence[PointRun]) -> List[TrialSummary]:
    scan_axis = [v if v is not None else float(i) for i, v in enumerate(config.scan_values)]
    summaries = []
    for trial in range(config.trials):
        rows = sorted((r.result for r in runs if r.result.trial == trial), key=lambda r: r.scan_index)
        trace_errors = [r.trace_error for r in rows]
        cost_errors = [r.cost_error for r in rows]
        summaries.append(TrialSummary(
            trial=trial,
            seed=rows[0].seed if rows else config.seed,
            iterations=[r.iterations for r in rows],
            cost_errors=cost_errors,
            trace_errors=trace_errors,
            auc_trace_error=area_under_curve(trace_errors, scan_axis),
            auc_cost_error=area_under_curve(cost_errors, scan_axis),
            swap_events=[r.swap_events for r in rows],
        ))
    return summaries


def write_summary(path: Path, runs: Sequence[PointRun]) -> Path:
    rows = []
    for run in sorted(runs, key=lambda r: (r.result.trial, r.result.scan_index)):
        r = run.result
        errors = np.asarray(r.state_errors)
        rows.append([
            r.trial, r.seed, r.scan_index, "" if r.scan_value is None else float(r.scan_value),
            r.iterations, r.status, r.final_cost, r.final_trace, r.cost_error, r.trace_error,
            float(errors.max()), float(np.median(errors)), len(r.swap_events),
        ])
    return write_csv(path, SUMMARY_HEADER, rows)


def run_scenario(
    config: ScenarioConfig,
    out_dir: Optional[Union[str, Path]] = None,
    threads: Optional[int] = None,
    smooth_sigma: Optional[float] = None,
) -> ScenarioRun:
    """
    Run every (scan point, trial) and persist records, summaries and the report

    Runs execute on a thread pool; outputs are assembled in (trial, point)
    order after all runs finish, so files do not depend on scheduling.
    """
    threads = settings.THREADS if threads is None else threads
    if threads < 1:
        raise ConfigError("At least one worker thread is required")
    base = ensure_directory_exists(Path(out_dir or settings.OUT_DIR) / config.name)
    records_dir = ensure_directory_exists(base / "records")
    write_json(base / "scenario.json", config)

    jobs: List[Tuple[int, int]] = [
        (scan_index, trial)
        for trial in range(config.trials)
        for scan_index in range(len(config.scan_values))
    ]
    logger.info(
        "Running scenario %s: %d scan points x %d trials on %d threads",
        config.name, len(config.scan_values), config.trials, threads,
    )

    def job(key: Tuple[int, int]) -> PointRun:
        run = run_point(config, key[0], key[1])
        write_record(records_dir, run, smooth_sigma)
        return run

    if threads == 1:
        runs = [job(key) for key in jobs]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(job, jobs))

    outcome = ScenarioRun(config, base, runs)
    write_summary(base / "summary.csv", runs)
    outcome.trials = summarize_trials(config, runs)
    write_json(base / "trials.json", outcome.trials)

    if config.trials >= 2:
        scan_axis = [v if v is not None else float(i) for i, v in enumerate(config.scan_values)]
        cost = np.array([s.cost_errors for s in outcome.trials])
        trace = np.array([s.trace_errors for s in outcome.trials])
        outcome.report = compare_methods(cost, trace, scan_axis, "cost_error", "trace_error", seed=config.seed)
        write_json(base / "report.json", outcome.report)
    else:
        logger.info("Single trial: no statistical report for %s", config.name)
    return outcome


# ============================================
# Summary files
# ============================================

def load_summary_errors(path: Union[str, Path], column: str = "trace_error") -> Tuple[np.ndarray, List[float]]:
    """(trials, points) error array and scan axis from a summary.csv"""
    try:
        rows = read_csv(path)
    except OSError as e:
        raise ConfigError(f"Cannot read summary {path}: {e}")
    if not rows or column not in rows[0]:
        raise ConfigError(f"Summary {path} has no {column!r} column")
    trials = sorted({int(r["trial"]) for r in rows})
    points = sorted({int(r["scan_index"]) for r in rows})
    data = np.full((len(trials), len(points)), np.nan)
    axis: Dict[int, float] = {}
    for r in rows:
        t, p = trials.index(int(r["trial"])), points.index(int(r["scan_index"]))
        data[t, p] = float(r[column])
        axis[p] = float(r["scan_value"]) if r["scan_value"] != "" else float(p)
    if np.isnan(data).any():
        raise ConfigError(f"Summary {path} is missing (trial, point) rows")
    return data, [axis[p] for p in range(len(points))]


def compare_summaries(
    paths: Sequence[Union[str, Path]],
    column: str = "trace_error",
    seed: Optional[int] = None,
) -> List[StatReport]:
    """Compare the first summary against each of the others"""
    if len(paths) < 2:
        raise ConfigError("Need at least two summaries to compare")
    base_errors, base_axis = load_summary_errors(paths[0], column)
    base_name = Path(paths[0]).parent.name or Path(paths[0]).stem
    reports = []
    for other in paths[1:]:
        errors, axis = load_summary_errors(other, column)
        if errors.shape != base_errors.shape or not np.allclose(axis, base_axis):
            raise ConfigError(f"Summary {other} does not share the trials and scan of {paths[0]}")
        name = Path(other).parent.name or Path(other).stem
        reports.append(compare_methods(base_errors, errors, base_axis, base_name, name, seed=seed))
    return reports
