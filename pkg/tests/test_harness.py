"""
Tests for scenario loading, problem building, the scenario runner, summary
comparison and the command-line entry point.
"""

import json
from pathlib import Path

import numpy as np
import pytest
from pydantic import ValidationError as PydanticValidationError

from ensemble_vqe.ensemble import evaluate
from ensemble_vqe.exceptions import ConfigError, NumericalError
from ensemble_vqe.fermion import write_fcidump
from ensemble_vqe.harness import (
    compare_summaries,
    load_scenario,
    run_point,
    run_scenario,
    run_seed,
)
from ensemble_vqe.main import handle_exception, main
from ensemble_vqe.models.optimizer import InitialParameters
from ensemble_vqe.models.scenario import ScenarioConfig
from ensemble_vqe.qdft import OneBodyMatrix, write_matrix
from ensemble_vqe.scenarios import build_problem, formaldimine_integrals
from ensemble_vqe.utils import read_csv, read_json


SCENARIO_DIR = Path(__file__).resolve().parent.parent / "scenarios"


def synthetic_config(name="tiny", **overrides):
    raw = {
        "name": name,
        "synthetic": {"qubits": 2, "seed": 3},
        "ansatz": {"kind": "rycnot", "layers": 2},
        "weights": "equi",
        "states": 2,
        "trials": 1,
        "seed": 11,
        "optimizer": {"max_iterations": 200},
    }
    raw.update(overrides)
    return raw


def write_config(path, raw):
    path.write_text(json.dumps(raw))
    return path


def state_error_ratio(run):
    """Largest over median post-diagonalised state error"""
    errors = np.asarray(run.result.state_errors)
    return float(errors.max() / max(np.median(errors), 1e-12))


# ============================================
# Scenario Loading
# ============================================

class TestLoadScenario:
    """Test scenario files and their validation"""

    def test_valid_file(self, tmp_path):
        config = load_scenario(write_config(tmp_path / "s.json", synthetic_config()))
        assert config.source_name == "synthetic"
        assert config.scan_values == [None]

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(tmp_path / "absent.json")

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{name: ")
        with pytest.raises(ConfigError):
            load_scenario(path)

    def test_schema_violation(self, tmp_path):
        with pytest.raises(ConfigError):
            load_scenario(write_config(tmp_path / "s.json", synthetic_config(states=0)))

    def test_two_sources(self):
        with pytest.raises(PydanticValidationError):
            ScenarioConfig.parse_obj(synthetic_config(chain={"sites": 4}))

    def test_no_source(self):
        raw = synthetic_config()
        del raw["synthetic"]
        with pytest.raises(PydanticValidationError):
            ScenarioConfig.parse_obj(raw)

    def test_explicit_weights_need_one_per_state(self):
        with pytest.raises(PydanticValidationError):
            ScenarioConfig.parse_obj(synthetic_config(weights="explicit", explicit_weights=[1.0]))

    def test_scan_values_increasing(self):
        with pytest.raises(PydanticValidationError):
            ScenarioConfig.parse_obj(synthetic_config(scan={"variable": "gap", "values": [1.0, 0.5]}))

    def test_chain_sites_power_of_two(self):
        raw = synthetic_config(chain={"sites": 6})
        del raw["synthetic"]
        with pytest.raises(PydanticValidationError):
            ScenarioConfig.parse_obj(raw)

    @pytest.mark.parametrize("path", sorted(SCENARIO_DIR.glob("*.json")), ids=lambda p: p.stem)
    def test_bundled_scenarios(self, path):
        config = load_scenario(path)
        assert config.name == path.stem.replace("_", "-")

    def test_run_seed(self):
        assert run_seed(7, 0, 0) == run_seed(7, 0, 0)
        assert len({run_seed(7, 0, 0), run_seed(7, 1, 0), run_seed(7, 0, 1), run_seed(8, 0, 0)}) == 4


# ============================================
# Problem Building
# ============================================

class TestBuildProblem:
    """Test translation of scenarios into ensemble problems"""

    def test_synthetic_defaults(self):
        built = build_problem(ScenarioConfig.parse_obj(synthetic_config()))
        assert built.initial_parameters == InitialParameters.UNIFORM
        assert built.problem.penalty_strength == 0.0
        assert not built.problem.has_penalty
        assert built.problem.parameter_count == 6

    def test_formaldimine_defaults(self):
        config = ScenarioConfig.parse_obj({
            "name": "form", "formaldimine": {"alpha": 140.0},
            "ansatz": {"kind": "guccsd"}, "states": 2,
        })
        built = build_problem(config)
        assert built.initial_parameters == InitialParameters.ZEROS
        assert built.problem.penalty_strength == 1.0
        assert built.problem.particle_sector == (2, 2)
        assert built.problem.parameter_count == 24

    def test_fcidump_matches_builtin(self, tmp_path):
        """The same integrals read back from disk give the same initial energies"""
        path = write_fcidump(tmp_path / "FCIDUMP", formaldimine_integrals(140.0))
        fcidump = ScenarioConfig.parse_obj({
            "name": "disk",
            "fcidump": {
                "path": str(path),
                "active_space": {"frozen": [], "active": [0, 1, 2], "active_electrons": 4},
                "initial_states": ["hf(4)", "csf(1,2)"],
            },
            "ansatz": {"kind": "guccsd"}, "states": 2,
        })
        builtin = ScenarioConfig.parse_obj({
            "name": "builtin", "formaldimine": {"alpha": 140.0},
            "ansatz": {"kind": "guccsd"}, "states": 2,
        })
        a = evaluate(build_problem(fcidump).problem, np.zeros(24))
        b = evaluate(build_problem(builtin).problem, np.zeros(24))
        gap = 1.0 + 19.0 / 60.0
        assert np.allclose(a.per_state_energies, [-4.0, -5.0 + gap], atol=1e-12)
        assert np.allclose(a.per_state_energies, b.per_state_energies, atol=1e-12)

    def test_guccsd_needs_fermions(self):
        config = ScenarioConfig.parse_obj(synthetic_config(ansatz={"kind": "guccsd"}))
        with pytest.raises(ConfigError):
            build_problem(config)

    def test_bad_scan_variable(self):
        config = ScenarioConfig.parse_obj(synthetic_config(scan={"variable": "alpha", "values": [1.0]}))
        with pytest.raises(ConfigError):
            build_problem(config, 1.0)

    def test_scan_value_out_of_range(self):
        config = ScenarioConfig.parse_obj(synthetic_config(scan={"variable": "gap", "values": [-1.0, 0.5]}))
        with pytest.raises(ConfigError):
            build_problem(config, -1.0)
        assert build_problem(config, 0.5).problem.qubit_count == 2

    def test_chain_spacing_out_of_range(self):
        config = ScenarioConfig.parse_obj(synthetic_config(
            synthetic=None, chain={"sites": 4, "spacing": 0.74},
            scan={"variable": "spacing", "values": [-0.5, 1.0]},
        ))
        with pytest.raises(ConfigError):
            build_problem(config, -0.5)
        assert build_problem(config, 1.0).problem.qubit_count == 2

    def test_matrix_source(self, tmp_path):
        path = write_matrix(tmp_path / "h.txt", OneBodyMatrix(np.diag([0.0, 1.0, 2.0, 3.0])))
        config = ScenarioConfig.parse_obj(synthetic_config(synthetic=None, matrix={"path": str(path)}))
        problem = build_problem(config).problem
        assert problem.qubit_count == 2
        assert problem.particle_sector is None

    def test_too_many_states(self):
        config = ScenarioConfig.parse_obj(synthetic_config(synthetic={"qubits": 1}, states=3))
        with pytest.raises(ConfigError):
            build_problem(config)


# ============================================
# Scenario Runner
# ============================================

class TestRunScenario:
    """Test end-to-end runs on a small synthetic problem"""

    def test_outputs(self, tmp_path):
        outcome = run_scenario(ScenarioConfig.parse_obj(synthetic_config()), tmp_path, threads=1)
        base = tmp_path / "tiny"
        assert outcome.out_dir == base
        assert (base / "scenario.json").exists()
        assert (base / "trials.json").exists()
        assert (base / "records" / "point000_trial000.csv").exists()
        assert not (base / "report.json").exists()
        assert len(read_csv(base / "summary.csv")) == 1
        assert len(outcome.points) == 1

    def test_equi_cost_error_is_trace_error(self, tmp_path):
        outcome = run_scenario(ScenarioConfig.parse_obj(synthetic_config()), tmp_path, threads=1)
        run = outcome.point(0, 0)
        assert np.allclose(run.cost_errors, run.trace_errors, atol=1e-12)
        rows = read_csv(outcome.out_dir / "records" / "point000_trial000.csv")
        assert len(rows) == len(run.record.iterations)

    def test_byte_identical_reruns(self, tmp_path):
        config = ScenarioConfig.parse_obj(synthetic_config(trials=2))
        first = run_scenario(config, tmp_path / "a", threads=1)
        second = run_scenario(config, tmp_path / "b", threads=2)
        for name in ("summary.csv", "records/point000_trial001.csv", "trials.json"):
            assert (first.out_dir / name).read_bytes() == (second.out_dir / name).read_bytes()

    def test_trials_get_distinct_seeds(self, tmp_path):
        outcome = run_scenario(ScenarioConfig.parse_obj(synthetic_config(trials=2)), tmp_path, threads=1)
        assert outcome.point(0, 0).result.seed != outcome.point(1, 0).result.seed

    def test_smoothed_exports(self, tmp_path):
        outcome = run_scenario(ScenarioConfig.parse_obj(synthetic_config()), tmp_path, threads=1, smooth_sigma=2.0)
        smoothed = read_csv(outcome.out_dir / "records" / "point000_trial000_smoothed.csv")
        assert list(smoothed[0]) == ["iteration", "cost_error", "trace_error"]

    def test_report_with_several_trials(self, tmp_path):
        config = ScenarioConfig.parse_obj(synthetic_config(trials=2, weights="optimal"))
        outcome = run_scenario(config, tmp_path, threads=1)
        assert outcome.report is not None
        report = read_json(outcome.out_dir / "report.json")
        assert report["method_a"] == "cost_error"
        assert report["trials"] == 2

    def test_scan(self, tmp_path):
        config = ScenarioConfig.parse_obj(synthetic_config(scan={"variable": "gap", "values": [0.5, 1.0]}))
        outcome = run_scenario(config, tmp_path, threads=1)
        assert np.allclose(outcome.point(0, 0).result.exact_energies, [0.0, 0.5], atol=1e-12)
        assert np.allclose(outcome.point(0, 1).result.exact_energies, [0.0, 1.0], atol=1e-12)
        rows = read_csv(outcome.out_dir / "summary.csv")
        assert [float(r["scan_value"]) for r in rows] == [0.5, 1.0]
        assert len(outcome.trials[0].trace_errors) == 2

    def test_thread_count(self, tmp_path):
        with pytest.raises(ConfigError):
            run_scenario(ScenarioConfig.parse_obj(synthetic_config()), tmp_path, threads=0)

    def test_missing_point(self, tmp_path):
        outcome = run_scenario(ScenarioConfig.parse_obj(synthetic_config()), tmp_path, threads=1)
        with pytest.raises(KeyError):
            outcome.point(3, 0)


# ============================================
# Summary Comparison
# ============================================

class TestCompareSummaries:
    """Test the stats over two scenario summaries"""

    def test_two_methods(self, tmp_path):
        equi = run_scenario(ScenarioConfig.parse_obj(synthetic_config("equi", trials=2)), tmp_path, threads=1)
        optimal = run_scenario(
            ScenarioConfig.parse_obj(synthetic_config("optimal", trials=2, weights="optimal")), tmp_path, threads=1
        )
        reports = compare_summaries([optimal.out_dir / "summary.csv", equi.out_dir / "summary.csv"])
        assert len(reports) == 1
        assert reports[0].method_a == "optimal" and reports[0].method_b == "equi"
        assert reports[0].trials == 2

    def test_mismatched_trials(self, tmp_path):
        a = run_scenario(ScenarioConfig.parse_obj(synthetic_config("a", trials=2)), tmp_path, threads=1)
        b = run_scenario(ScenarioConfig.parse_obj(synthetic_config("b", trials=1)), tmp_path, threads=1)
        with pytest.raises(ConfigError):
            compare_summaries([a.out_dir / "summary.csv", b.out_dir / "summary.csv"])

    def test_single_summary(self, tmp_path):
        with pytest.raises(ConfigError):
            compare_summaries([tmp_path / "summary.csv"])

    def test_unknown_column(self, tmp_path):
        a = run_scenario(ScenarioConfig.parse_obj(synthetic_config("a")), tmp_path, threads=1)
        with pytest.raises(ConfigError):
            compare_summaries([a.out_dir / "summary.csv", a.out_dir / "summary.csv"], column="energy")


# ============================================
# Command Line
# ============================================

class TestCommandLine:
    """Test the CLI commands and exit codes"""

    def test_run(self, tmp_path, capsys):
        path = write_config(tmp_path / "s.json", synthetic_config())
        assert main(["run", str(path), "--out-dir", str(tmp_path / "out"), "--seed", "5"]) == 0
        assert "Wrote 1 records" in capsys.readouterr().out
        assert read_json(tmp_path / "out" / "tiny" / "scenario.json")["seed"] == 5

    def test_missing_config(self, tmp_path):
        assert main(["run", str(tmp_path / "absent.json")]) == 2

    def test_stats_needs_two_summaries(self, tmp_path):
        assert main(["stats", str(tmp_path / "summary.csv")]) == 2

    def test_stats_on_single_trial_summaries(self, tmp_path):
        a = run_scenario(ScenarioConfig.parse_obj(synthetic_config("a")), tmp_path, threads=1)
        b = run_scenario(
            ScenarioConfig.parse_obj(synthetic_config("b", weights="optimal")), tmp_path, threads=1
        )
        out = tmp_path / "stats"
        code = main([
            "stats", str(a.out_dir / "summary.csv"), str(b.out_dir / "summary.csv"), "--out-dir", str(out),
        ])
        assert code == 0
        reports = list(out.glob("stats_*.json"))
        assert len(reports) == 1
        report = read_json(reports[0])
        assert report["trials"] == 1
        assert report["band"] is None
        assert all(t["p_value"] == 1.0 for t in report["point_tests"])

    def test_oracle_matrix(self, tmp_path, capsys):
        path = write_matrix(tmp_path / "h.txt", OneBodyMatrix(np.array([[0.0, 1.0], [1.0, 0.0]])))
        assert main(["oracle", str(path), "--states", "2"]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert [float(line.split()[1]) for line in lines] == pytest.approx([-1.0, 1.0])

    def test_oracle_fcidump(self, tmp_path, capsys):
        path = write_fcidump(tmp_path / "FCIDUMP", formaldimine_integrals(121.0))
        assert main(["oracle", str(path), "--states", "2"]) == 0
        out = capsys.readouterr().out
        assert out.count("<S^2>") == 2

    def test_exit_codes(self):
        assert handle_exception(NumericalError("diverged")) == 3
        assert handle_exception(ConfigError("bad")) == 2
        assert handle_exception(RuntimeError("boom")) == 1


# ============================================
# Scenario-scale Checks
# ============================================

@pytest.mark.slow
class TestScenarioScale:
    """Full minimisations on the bundled scenario files"""

    @pytest.mark.parametrize("scan_index", range(7))
    def test_equi_guccsd_over_bending_scan(self, scan_index):
        config = load_scenario(SCENARIO_DIR / "formaldimine_equi.json")
        assert len(config.scan_values) == 7
        run = run_point(config, scan_index, 0)
        assert run.result.status != "max-iterations"
        assert run.result.trace_error <= 1e-6
        assert max(run.result.state_errors) <= 1e-6

    def test_chain_equi_errors_are_democratic(self):
        """Equal weights spread the orbital-energy errors; descending weights concentrate them"""
        equi = load_scenario(SCENARIO_DIR / "hchain_equi.json")
        weighted = load_scenario(SCENARIO_DIR / "hchain_weighted.json")
        assert equi.ansatz.layers == 10 and equi.states == 8
        assert build_problem(equi, equi.scan_values[1]).problem.parameter_count == 44

        equi_ratios, weighted_ratios = [], []
        for trial in range(3):
            run = run_point(equi, 1, trial)
            assert len(run.result.state_errors) == 8
            ratio = state_error_ratio(run)
            if run.record.converged:
                assert ratio <= 10.0
            equi_ratios.append(ratio)
            weighted_ratios.append(state_error_ratio(run_point(weighted, 1, trial)))
        assert np.median(weighted_ratios) > np.median(equi_ratios)


# ============================================
# Run Tests
# ============================================

if __name__ == "__main__":
    pytest.main([__file__, '-v', '--cov=ensemble_vqe', '--cov-report=html'])
