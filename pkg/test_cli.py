"""
Tests for the lab command line: exit codes, report files and the report lint
"""
import json
from pathlib import Path

import pandas as pd
import pytest
from click.testing import CliRunner

from app import __version__
from app.main import lab
from app.spectral.claims import CERTIFIED, EMPIRICAL
from app.storage import dumps_report, lint_report

DATA = Path(__file__).resolve().parent / "data"


@pytest.fixture
def runner():
    return CliRunner()


def run(runner, tmp_path, *args):
    return runner.invoke(lab, [*args, "--out", str(tmp_path)])


def read_report(tmp_path, name):
    return json.loads((tmp_path / f"{name}.json").read_text())


def write_model(tmp_path, name, model):
    path = tmp_path / name
    path.write_text(json.dumps(model))
    return str(path)


def test_version(runner):
    result = runner.invoke(lab, ["--version"])
    assert result.exit_code == 0
    assert __version__ in result.output


def test_fourier_reports_cantor_coefficients(runner, tmp_path):
    result = run(runner, tmp_path, "fourier", "--model", str(DATA / "cantor.json"), "--xi", "[1, 3, 9]",
                 "--format", "csv")
    assert result.exit_code == 0, result.output
    report = read_report(tmp_path, "fourier")
    assert report["experiment"] == "fourier"
    values = report["values"]
    assert len(values) == 3
    for entry in values:
        assert entry["tier"] == CERTIFIED
        assert entry["bound"] is not None
    # the Cantor coefficient is constant along powers of three
    assert values[1]["value"]["re"] == pytest.approx(values[0]["value"]["re"], abs=1e-9)
    assert values[2]["value"]["re"] == pytest.approx(values[0]["value"]["re"], abs=1e-9)
    table = pd.read_csv(tmp_path / "fourier_values.csv")
    assert list(table.columns) == ["xi", "re", "im", "bound"]
    assert list(table["xi"]) == [1, 3, 9]


def test_fourier_report_is_deterministic(runner, tmp_path):
    args = ("fourier", "--model", str(DATA / "cantor.json"), "--xi", "[2, 5]")
    first, second = tmp_path / "a", tmp_path / "b"
    assert run(runner, first, *args).exit_code == 0
    assert run(runner, second, *args).exit_code == 0
    assert (first / "fourier.json").read_bytes() == (second / "fourier.json").read_bytes()


def test_fourier_needs_frequencies(runner, tmp_path):
    result = run(runner, tmp_path, "fourier", "--model", str(DATA / "cantor.json"))
    assert result.exit_code == 1
    assert "error:" in result.output


def test_fourier_accepts_a_sequence(runner, tmp_path):
    seq = json.dumps({"form": "powers", "base": 3, "length": 4})
    result = run(runner, tmp_path, "fourier", "--model", str(DATA / "cantor.json"), "--seq", seq)
    assert result.exit_code == 0, result.output
    assert read_report(tmp_path, "fourier")["parameters"]["frequencies"] == [3, 9, 27, 81]


def test_classify_lebesgue_plus_shift(runner, tmp_path):
    result = run(runner, tmp_path, "classify", "--model", str(DATA / "lebesgue_shift.json"), "--format", "csv")
    assert result.exit_code == 0, result.output
    splitting = read_report(tmp_path, "classify")["splitting"]
    assert splitting["h_m"] == []
    assert splitting["h_w"] == [0, 1]
    labels = pd.read_csv(tmp_path / "classify_labels.csv")
    assert list(labels["label"]) == ["H_w", "H_w"]


def test_classify_exits_two_on_unknown_labels(runner, tmp_path):
    result = run(runner, tmp_path, "classify", "--model", str(DATA / "rotation_contraction.json"))
    assert result.exit_code == 2
    assert read_report(tmp_path, "classify")["splitting"]["unknown"] == [0]


def test_example56_splits_the_fixture(runner, tmp_path):
    result = run(runner, tmp_path, "example56", "--scan-windows", "4", "4")
    assert result.exit_code == 0, result.output
    report = read_report(tmp_path, "example56")
    assert report["h_m"] == [0]
    assert report["h_w"] == [1]
    assert report["failures"] == []
    assert report["policy"]["scan_windows"] == [4, 4]
    entanglement = report["entanglement"]
    assert entanglement["discrete"]["h_m"] == [0]
    assert entanglement["verdict"] == "entangled"
    assert len(entanglement["witnesses"]) == 1
    witness = entanglement["witnesses"][0]
    assert witness["passed"]
    assert [w["window"] for w in witness["windows"]] == list(range(1, 9))
    assert len(report["resolvent"]) == 1


def test_example56_mismatch_fixture_is_decoupled(runner, tmp_path):
    result = run(runner, tmp_path, "example56", "--model", str(DATA / "mismatch.json"))
    assert result.exit_code == 0, result.output
    report = read_report(tmp_path, "example56")
    assert report["entanglement"]["verdict"] == "decoupled"
    assert report["entanglement"]["synthetic_components"] == [0]
    assert report["resolvent"] == []


def test_oracle_on_rotation_plus_contraction(runner, tmp_path):
    result = run(runner, tmp_path, "oracle", "--model", str(DATA / "rotation_contraction.json"),
                 "--budget", "32", "--format", "csv")
    assert result.exit_code == 0, result.output
    entry = read_report(tmp_path, "oracle")["components"][0]
    assert entry["analysis"]["unitary_rank"] == 2
    assert entry["flight_rank"] == 1
    assert entry["limit_sample"]["coverage"]["tier"] == EMPIRICAL
    summary = pd.read_csv(tmp_path / "oracle_summary.csv")
    assert list(summary["unitary_rank"]) == [2]


def test_oracle_refuses_infinite_models(runner, tmp_path):
    result = run(runner, tmp_path, "oracle", "--model", str(DATA / "cantor.json"))
    assert result.exit_code == 1
    assert "error:" in result.output


def test_wander_on_shift_and_periodic_atom(runner, tmp_path):
    shift = write_model(tmp_path, "shift.json", {"kind": "shift", "truncation": 16})
    result = run(runner, tmp_path, "wander", "--model", shift)
    assert result.exit_code == 0, result.output
    assert read_report(tmp_path, "wander")["result"]["indices"] == [0, 1, 2, 3]

    result = run(runner, tmp_path, "wander", "--model", str(DATA / "quarter_atom.json"), "--n-max", "50")
    assert result.exit_code == 2
    assert read_report(tmp_path, "wander")["result"]["kind"] == "weakly_wandering_failure"


def test_resolvent_on_cantor(runner, tmp_path):
    result = run(runner, tmp_path, "resolvent", "--model", str(DATA / "cantor.json"), "--tol", "1e-6")
    assert result.exit_code == 0, result.output
    report = read_report(tmp_path, "resolvent")
    discrepancy = report["resolvent"]["discrepancy"]
    assert discrepancy["value"] <= discrepancy["bound"]
    assert report["cogenerator_atoms"] == []
    assert len(report["generator"]["quotients"]) == 3


def test_missing_model_file_is_an_error(runner, tmp_path):
    result = run(runner, tmp_path, "classify", "--model", str(tmp_path / "absent.json"))
    assert result.exit_code == 1
    assert "error:" in result.output


def test_invalid_models_are_errors(runner, tmp_path):
    bad = write_model(tmp_path, "bad.json", {"kind": "shift", "truncation": 0})
    result = run(runner, tmp_path, "classify", "--model", bad)
    assert result.exit_code == 1
    assert "error:" in result.output

    broken = tmp_path / "broken.json"
    broken.write_text('{"kind": ')
    result = run(runner, tmp_path, "classify", "--model", str(broken))
    assert result.exit_code == 1
    assert "line 1" in result.output


def test_lint_accepts_generated_reports(runner, tmp_path):
    assert run(runner, tmp_path, "fourier", "--model", str(DATA / "cantor.json"), "--xi", "[1, 2]").exit_code == 0
    assert run(runner, tmp_path, "classify", "--model", str(DATA / "lebesgue_shift.json")).exit_code == 0
    result = runner.invoke(lab, ["lint", "--out", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "2 report(s) checked, 0 problem(s)" in result.output


def test_lint_flags_bare_floats(runner, tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(dumps_report({"experiment": "bad", "value": 0.5}))
    result = runner.invoke(lab, ["lint", str(path)])
    assert result.exit_code == 1
    assert "bare float outside a claim" in result.output


def test_lint_needs_reports(runner, tmp_path):
    result = runner.invoke(lab, ["lint", "--out", str(tmp_path)])
    assert result.exit_code == 1


def test_lint_report_rules():
    assert lint_report({"parameters": {"tol": 1e-6}, "sequence": {"values": [0.5]}}) == []
    assert lint_report({"x": {"value": 0.1, "bound": None, "tier": EMPIRICAL}}) == []
    problems = lint_report({"x": {"value": 0.1, "bound": None, "tier": CERTIFIED}})
    assert problems == [("$.x", "certified claim without a bound")]
    assert lint_report({"rows": [1, 2.5]}) == [("$.rows[1]", "bare float outside a claim")]
    assert lint_report({"x": {"value": 1, "bound": 0.0, "tier": "guessed"}})[0][1] == "unknown tier 'guessed'"
