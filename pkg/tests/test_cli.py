import json
import os
import subprocess
import sys

import pytest

from composedc import __version__
from composedc.cli import build_parser, run_cli


def run(capsys, *argv):
    code = run_cli(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_compare_defaults_to_json_on_stdout(capsys):
    code, out, _ = run(capsys, "compare")
    assert code == 0
    doc = json.loads(out)
    assert doc["config"]["seed"] == 1 and doc["config"]["n_workloads"] == 20
    assert set(doc["architectures"]) == {"traditional", "rackscale", "podscale"}


def test_solve_zero_workloads(capsys):
    code, out, _ = run(capsys, "solve", "--arch", "traditional", "--workloads", "0")
    assert code == 0
    power = json.loads(out)["power"]
    assert power["total_w"] == power["tcpc_w"] == power["tmpc_w"] == power["tnpc_w"] == 0.0


def test_export_lp(tmp_path, capsys):
    out = tmp_path / "m.lp"
    code, _, _ = run(capsys, "export-lp", "--arch", "podscale", "--workloads", "2", "--out", str(out))
    assert code == 0
    assert out.read_text().split("\n", 1)[0] == "Minimize"


def test_gen(capsys):
    code, out, _ = run(capsys, "gen", "--seed", "5", "--workloads", "3")
    assert code == 0
    doc = json.loads(out)
    assert [w["id"] for w in doc["workloads"]] == [0, 1, 2]


def test_version(capsys):
    code, out, _ = run(capsys, "version")
    assert code == 0 and __version__ in out


@pytest.mark.parametrize(
    "argv",
    [
        ["frobnicate"],
        ["compare", "--bogus"],
        [],
        ["solve"],  # needs --arch
        ["export-lp"],
        ["compare", "--format", "csv"],  # needs --out
        ["gen", "--format", "csv"],
        ["compare", "--workloads", "-3"],
        ["compare", "--seed", "x"],
        ["compare", "--config", "/nonexistent/c.json"],
    ],
)
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert err


def test_infeasible_exit_3(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "n_cpu": 1, "n_mem": 1, "racks": {"traditional": 1}}))
    code, out, _ = run(capsys, "solve", "--config", str(cfg), "--arch", "traditional", "--workloads", "4")
    assert code == 3
    assert json.loads(out)["status"] == "infeasible"


def test_unwritable_out_exit_2(tmp_path, capsys):
    code, _, err = run(capsys, "gen", "--out", str(tmp_path / "missing" / "w.json"))
    assert code == 2 and "cannot write" in err


def test_budget_exit_4(capsys):
    code, out, _ = run(capsys, "compare", "--node-budget", "3")
    assert code == 4
    assert any(r["status"] == "feasible" for r in json.loads(out)["architectures"].values())


def test_greedy_exit_0(capsys):
    code, _, _ = run(capsys, "compare", "--solver", "greedy")
    assert code == 0


def test_precedence_and_idempotent_overrides(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"schema_version": 1, "seed": 9, "n_workloads": 4}))
    _, a, _ = run(capsys, "gen", "--config", str(cfg))
    _, b, _ = run(capsys, "gen", "--config", str(cfg), "--seed", "2")
    _, c, _ = run(capsys, "gen", "--config", str(cfg), "--seed", "2", "--seed", "2")
    assert json.loads(a)["seed"] == 9 and len(json.loads(a)["workloads"]) == 4
    assert json.loads(b)["seed"] == 2 and b == c


def test_csv_output(tmp_path, capsys):
    code, _, _ = run(capsys, "compare", "--format", "csv", "--out", str(tmp_path / "rep"))
    assert code == 0
    assert (tmp_path / "rep" / "summary.csv").read_text().startswith("architecture,tcpc_w")


def test_help_lists_everything():
    parser = build_parser()
    top = parser.format_help()
    for cmd in ("gen", "solve", "compare", "export-lp", "version"):
        assert cmd in top
    sub = parser._subparsers._group_actions[0].choices["compare"].format_help()
    for flag in ("--config", "--seed", "--workloads", "--arch", "--policy", "--solver",
                 "--node-budget", "--time-budget", "--format", "--out"):
        assert flag in sub


def test_module_entry_point_pure_python():
    env = dict(os.environ, COMPOSEDC_PURE_PYTHON="1")
    got = subprocess.run(
        [sys.executable, "-c", "from composedc.optimizer import KERNEL; print(KERNEL)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert got.stdout.strip() == "python"
    res = subprocess.run([sys.executable, "-m", "composedc", "version"], capture_output=True, text=True)
    assert res.returncode == 0 and __version__ in res.stdout
