"""
End-to-end tests of the command-line entry point
"""
import json

import pandas as pd
import pytest

from sweepctl.main import main
from sweepctl.utils.constants import EXIT_CONFIG_ERROR, EXIT_OK, EXIT_VERIFICATION_FAILED


def _manifest(path):
    with open(path / "manifest.json", 'r') as f:
        return json.load(f)


def test_simulate_writes_trajectory_and_manifest(tmp_path):
    code = main(["simulate", "--scenario", "example1", "--policy", "u=1", "--h", "0.01", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    manifest = _manifest(tmp_path)
    assert manifest["command"] == "simulate"
    assert manifest["status"] == "ok"
    assert manifest["artifacts"] == ["trajectory.csv"]
    assert manifest["summary"]["status"] == "HIT"
    assert manifest["constants"]["L_C"] == 1.0
    # r is infinite for an interval
    assert manifest["constants"]["r"] is None
    assert manifest["wall_time_seconds"] is None
    frame = pd.read_csv(tmp_path / "trajectory.csv")
    assert list(frame.columns) == ["t", "x1", "g1", "xi1", "d_S", "d_C"]
    assert frame["t"].iloc[0] == 0.0


def test_simulate_from_an_explicit_start(tmp_path):
    code = main([
        "simulate", "--scenario", "example2", "--policy", "u=0,1", "--from=0,3,0",
        "--h", "0.01", "--output-dir", str(tmp_path)
    ])
    assert code == EXIT_OK
    summary = _manifest(tmp_path)["summary"]
    assert summary["hit_time"] == pytest.approx(4.0, abs=1e-6)
    assert summary["exact_T"] == pytest.approx(4.0)


def test_identical_runs_have_identical_manifests(tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        assert main(["simulate", "--scenario", "example1", "--h", "0.01", "--output-dir", str(out)]) == EXIT_OK
    assert (first / "manifest.json").read_text() == (second / "manifest.json").read_text()
    assert (first / "trajectory.csv").read_text() == (second / "trajectory.csv").read_text()


def test_timing_is_opt_in(tmp_path):
    main(["simulate", "--scenario", "example1", "--h", "0.01", "--timing", "--output-dir", str(tmp_path)])
    assert _manifest(tmp_path)["wall_time_seconds"] is not None


def test_mintime_writes_grid_and_probes(tmp_path):
    code = main(["mintime", "--scenario", "example1", "--dx", "0.05", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    manifest = _manifest(tmp_path)
    assert manifest["artifacts"] == ["grid.csv", "probes.csv"]
    grid = pd.read_csv(tmp_path / "grid.csv")
    assert list(grid.columns) == ["t", "x1", "T", "status"]
    probes = pd.read_csv(tmp_path / "probes.csv")
    assert len(probes) == 1


def test_hjcheck_exact_candidate_passes(tmp_path):
    code = main([
        "hjcheck", "--scenario", "example2", "--candidate", "exact", "--plan-dx", "0.25",
        "--output-dir", str(tmp_path)
    ])
    assert code == EXIT_OK
    manifest = _manifest(tmp_path)
    assert manifest["summary"]["passed"] is True
    assert set(manifest["artifacts"]) == {"hjcheck_report.json", "hjcheck_report_probes.csv"}
    with open(tmp_path / "hjcheck_report.json", 'r') as f:
        report = json.load(f)
    assert "records" not in report


def test_hjcheck_perturbed_candidate_fails(tmp_path):
    code = main([
        "hjcheck", "--scenario", "example1", "--candidate", "perturbed",
        "--plan-dx", "0.1", "--plan-dt", "0.1", "--output-dir", str(tmp_path)
    ])
    assert code == EXIT_VERIFICATION_FAILED
    manifest = _manifest(tmp_path)
    assert manifest["status"] == "verification_failed"
    assert manifest["summary"]["failures"] > 0


def test_perturbed_candidate_only_for_example1(tmp_path):
    code = main(["hjcheck", "--scenario", "example2", "--candidate", "perturbed", "--output-dir", str(tmp_path)])
    assert code == EXIT_CONFIG_ERROR


def test_invariance_exit_codes(tmp_path):
    holds = '{"kind":"halfspace","normal":[-1],"offset":-1.9}'
    fails = '{"kind":"halfspace","normal":[1],"offset":1.5}'
    assert main(["invariance", "--scenario", "example1", "--K", holds, "--output-dir", str(tmp_path / "ok")]) == EXIT_OK
    code = main([
        "invariance", "--scenario", "example1", "--K", fails, "--mode", "weak", "--output-dir", str(tmp_path / "bad")
    ])
    assert code == EXIT_VERIFICATION_FAILED
    assert _manifest(tmp_path / "bad")["artifacts"] == ["weak_invariance.json", "weak_invariance_probes.csv"]


def test_invariance_set_must_meet_the_constraint(tmp_path):
    far = '{"kind":"halfspace","normal":[-1],"offset":-5}'
    assert main(["invariance", "--scenario", "example1", "--K", far, "--output-dir", str(tmp_path)]) == EXIT_CONFIG_ERROR


def test_petrov_reports_bounds(tmp_path):
    code = main(["petrov", "--scenario", "example1", "--points", "10", "--mu", "const:0.5", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    manifest = _manifest(tmp_path)
    assert "petrov_report.json" in manifest["artifacts"]
    # start (0, -1) is 3 away from S: 2 * 3 / 0.5
    assert manifest["summary"]["reach_time_bound"] == pytest.approx(12.0)


def test_oracle_probe(tmp_path):
    code = main(["oracle", "--scenario", "example1", "--probe", "0,1", "--segments", "2", "--output-dir", str(tmp_path)])
    assert code == EXIT_OK
    rows = pd.read_csv(tmp_path / "oracle.csv")
    assert len(rows) == 1
    assert rows["best_time"].iloc[0] == pytest.approx(rows["exact_T"].iloc[0], abs=5e-3)


def test_oracle_over_budget(tmp_path):
    code = main([
        "oracle", "--scenario", "example2", "--probe", "0,0,0", "--segments", "10", "--output-dir", str(tmp_path)
    ])
    assert code == EXIT_CONFIG_ERROR


def test_missing_scenario_file(tmp_path):
    code = main(["simulate", "--scenario", str(tmp_path / "missing.json"), "--output-dir", str(tmp_path / "out")])
    assert code == EXIT_CONFIG_ERROR


def test_invalid_parameter_is_a_config_error(tmp_path):
    code = main(["simulate", "--scenario", "example1", "--h", "-0.1", "--output-dir", str(tmp_path)])
    assert code == EXIT_CONFIG_ERROR


def test_argument_errors_exit_through_argparse(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["petrov", "--scenario", "example1", "--mu", "bogus", "--output-dir", str(tmp_path)])
    assert exc.value.code == 2
