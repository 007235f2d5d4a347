import json
import math

import pytest

from config import settings
from main import dispatch
from schemas import CesaroReport, FixedPointsReport, PlanarLimit, PlanarLimitKind, SweepManifest, SweepResult

def _error(captured):
    return json.loads(captured.err.strip().splitlines()[-1])

def test_iterate_csv(capsys):
    assert dispatch(["iterate", "--a", "14", "--b", "0.4", "--x0", "0.5", "--n", "3", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "k,x,partial_sum"
    assert len(lines) == 4
    k, x, partial_sum = lines[2].split(",")
    assert int(k) == 1
    assert float(x) == pytest.approx(0.197816, abs=1e-6)
    assert float(partial_sum) == pytest.approx(0.1)

def test_cesaro_json(capsys):
    assert dispatch(["cesaro", "--a", "14", "--b", "0.4", "--x0", "0.5", "--n", "20000"]) == 0
    report = CesaroReport.model_validate_json(capsys.readouterr().out)
    assert report.within_bound

def test_game_parameters_are_echoed(capsys):
    assert dispatch(["fixed-points", "--alpha", "1", "--beta", "1", "--epsilon", "0.5"]) == 0
    captured = capsys.readouterr()
    assert "# params_from_game: a=" in captured.err
    report = FixedPointsReport.model_validate_json(captured.out)
    assert report.params.a == pytest.approx(2 * math.log(2))
    assert report.params.b == 0.5
    assert sum(fp.is_nash for fp in report.fixed_points) == 3

def test_cycles_csv(capsys):
    args = ["cycles", "--a", "4", "--b", "0.5", "--max-period", "3", "--include-boundary", "--format", "csv"]
    assert dispatch(args) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "period,index,point,multiplier,stability,center_of_mass"
    assert len(lines) == 4

def test_sigma(capsys):
    assert dispatch(["sigma", "--a", "12"]) == 0
    document = json.loads(capsys.readouterr().out)
    assert document["sigma"] == pytest.approx(0.0707, abs=1e-3)

def test_planar_round_trips(capsys):
    assert dispatch(["planar", "--a", "14", "--b", "0.4", "--x0", "0.7", "--y0", "0.2"]) == 0
    limit = PlanarLimit.model_validate_json(capsys.readouterr().out)
    assert limit.kind == PlanarLimitKind.converged
    assert limit.limit == (1.0, 0.0)

def test_planar_undecided_exit_code(capsys):
    args = ["planar", "--a", "14", "--b", "0.4", "--x0", "0.51", "--y0", "0.49", "--n-max", "1"]
    assert dispatch(args) == 4
    captured = capsys.readouterr()
    assert PlanarLimit.model_validate_json(captured.out).kind == PlanarLimitKind.undecided
    assert _error(captured)["code"] == "UNDECIDED"

def test_regions(capsys):
    assert dispatch(["regions", "--a", "14", "--b", "0.4", "--x0", "0.2", "--y0", "0.7", "--format", "csv"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split(",")[2] == "upper_mirror(V)"

def test_missing_witness_exit_code(capsys):
    assert dispatch(["chaos-witness", "--a", "5", "--b", "0.5"]) == 4
    captured = capsys.readouterr()
    assert json.loads(captured.out)["satisfied"] is False
    error = _error(captured)
    assert error["code"] == "NOT_FOUND"
    assert error["message"].startswith("not found")

def test_threshold_not_found(capsys):
    assert dispatch(["threshold", "--b", "0.5", "--a-max", "50"]) == 4

@pytest.mark.parametrize("argv", [
    [],
    ["iterate", "--a", "14", "--b", "0.4", "--x0", "0.5", "--n", "3", "--bogus"],
    ["stability", "--a", "14", "--b", "0.4", "--alpha", "1", "--beta", "1", "--epsilon", "0.5"],
    ["stability", "--a", "14"],
    ["stability", "--alpha", "1", "--beta", "1"],
    ["no-such-command"],
])
def test_usage_errors(capsys, argv):
    assert dispatch(argv) == 2

@pytest.mark.parametrize("argv", [
    ["stability", "--alpha", "1", "--beta", "0.4", "--epsilon", "0.5"],
    ["iterate", "--a", "14", "--b", "0.4", "--x0", "2", "--n", "3"],
    ["stability", "--a", "-1", "--b", "0.4"],
    ["sigma", "--a", "8"],
    ["lyapunov", "--a", "4", "--b", "0.5", "--x0", "0.3", "--n", "10"],
])
def test_domain_errors(capsys, argv):
    assert dispatch(argv) == 3
    assert _error(capsys.readouterr())["code"] in {"DOMAIN_ERROR", "DEGENERATE_GAME", "PRECONDITION_VIOLATED"}

@pytest.mark.parametrize("flag", ["--help", "--version"])
def test_help_and_version(capsys, flag):
    assert dispatch([flag]) == 0
    assert capsys.readouterr().out

def test_sweep_uses_configured_threads(capsys, monkeypatch):
    monkeypatch.setattr(settings, "THREADS", 3)
    args = ["sweep", "--b", "0.5", "--a-min", "5", "--a-max", "6", "--a-steps", "2",
            "--transient", "500", "--samples", "4"]
    assert dispatch(args) == 0
    result = SweepResult.model_validate_json(capsys.readouterr().out)
    assert result.manifest.workers == 3
    assert len(result.rows) == 12

def test_sweep_to_directory(capsys, tmp_path):
    out = tmp_path / "data"
    args = ["sweep", "--b", "0.4", "0.6", "--a-min", "10", "--a-max", "10", "--transient", "500",
            "--samples", "8", "--out", str(out), "--name", "mirror"]
    assert dispatch(args) == 0
    manifest = SweepManifest.model_validate_json(capsys.readouterr().out)
    assert manifest.rows == 16
    assert (out / "mirror.csv").read_bytes().startswith(b"cell,a,b,sample_index,value\r\n")
    assert (out / "mirror.manifest.json").exists()

def test_sweep_csv_to_stdout(capsys):
    args = ["sweep", "--b", "0.5", "--a-min", "5", "--a-max", "5", "--transient", "100", "--samples", "2",
            "--format", "csv"]
    assert dispatch(args) == 0
    assert capsys.readouterr().out.splitlines()[0] == "cell,a,b,sample_index,value"

def test_sweep_write_failure_exit_code(capsys, tmp_path):
    args = ["sweep", "--b", "0.5", "--a-min", "5", "--a-max", "5", "--transient", "100", "--samples", "2",
            "--out", str(tmp_path), "--name", "nope/x"]
    assert dispatch(args) == 1
    error = _error(capsys.readouterr())
    assert error["code"] == "IO_ERROR"
    assert error["details"]["path"].endswith("x.csv")
