import json
import subprocess
import sys

import pytest

from mpr2.cli import main
from mpr2.harness import PROFILE_COLUMNS, TAU_GRID, read_profile_csv


def test_solve_exit_codes(capsys):
    assert main(["solve", "booth"]) == 0
    out = capsys.readouterr().out
    assert "status=FirstOrder" in out
    assert main(["solve", "rosenbrock", "--max-iter", "3"]) == 3
    assert main(["solve", "himmelblau", "--eps", "1e-14"]) == 2


def test_solve_json_and_trace(tmp_path, capsys):
    trace = tmp_path / "t.jsonl"
    assert main(["solve", "quadratic", "-n", "3", "--mode", "relaxed", "--json", "--trace", str(trace)]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["status"] == "FirstOrder" and d["n"] == 3 and d["solver"] == "mpr2_relaxed"
    recs = [json.loads(line) for line in trace.read_text().splitlines()]
    assert len(recs) == d["iterations"]


@pytest.mark.parametrize("argv", [
    ["solve", "nonexistent"],
    ["solve", "beale", "-n", "5"],
    ["solve", "booth", "--eps", "-1"],
    ["solve", "booth", "--mode", "newton"],
    ["solve", "booth", "--formats", "half,quad"],
    ["bench", "--suite", "booth", "--report", "xml"],
])
def test_configuration_errors_exit_4(argv, capsys):
    assert main(argv) == 4
    assert "configuration error" in capsys.readouterr().err


def test_config_file(tmp_path):
    cfg = tmp_path / "s.cfg"
    cfg.write_text("mode = r2\nmax_iter = 2\n")
    assert main(["solve", "rosenbrock", "--config", str(cfg)]) == 3
    cfg.write_text("sigma0 = 3\n")
    assert main(["solve", "booth", "--config", str(cfg)]) == 4


def test_missing_inputs_exit_1(tmp_path):
    assert main(["solve", "booth", "--config", str(tmp_path / "missing.cfg")]) == 1
    assert main(["profile", "--in", str(tmp_path), "--out", str(tmp_path / "p.csv")]) == 1


def test_problems_listing(capsys):
    assert main(["problems"]) == 0
    out = capsys.readouterr().out
    assert "rosenbrock" in out and "quadratic" in out


def test_bench_then_profile(tmp_path, capsys):
    out = tmp_path / "bench"
    rc = main(["bench", "--suite", "booth,matyas,sphere:3", "--modes", "r2,relaxed", "--relax-a", "1,0.5",
               "--out", str(out), "--report", "csv,text"])
    assert rc == 0
    assert {p.name for p in out.iterdir()} == {"runs.csv", "evals.csv", "suite.json", "table.txt"}
    assert "== mpr2_relaxed(a=0.5)" in capsys.readouterr().out
    csv_path = tmp_path / "prof" / "profiles.csv"
    assert main(["profile", "--in", str(out), "--out", str(csv_path)]) == 0
    assert csv_path.read_text().splitlines()[0] == ",".join(PROFILE_COLUMNS)
    data = read_profile_csv(csv_path)
    assert set(data) == {"obj_time", "obj_energy", "grad_time", "grad_energy"}
    assert set(data["grad_time"]) == {"r2", "mpr2_relaxed", "mpr2_relaxed(a=0.5)"}
    assert len(data["grad_time"]["r2"]) == len(TAU_GRID)
    png = csv_path.with_suffix(".png")
    assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"


def test_profile_without_plot(tmp_path):
    out = tmp_path / "bench"
    assert main(["bench", "--suite", "booth", "--modes", "r2", "--out", str(out), "--report", "json"]) == 0
    csv_path = tmp_path / "p.csv"
    assert main(["profile", "--in", str(out / "suite.json"), "--out", str(csv_path), "--metrics", "obj_time",
                 "--no-plot"]) == 0
    assert not csv_path.with_suffix(".png").exists()
    assert set(read_profile_csv(csv_path)) == {"obj_time"}


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "mpr2.cli", "solve", "booth"], capture_output=True, text=True)
    assert r.returncode == 0 and "FirstOrder" in r.stdout
