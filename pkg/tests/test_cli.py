import csv
import io
import json
import subprocess
import sys
import time
from pathlib import Path

import pytest

from parallel_guess.cli import main

GOLDEN = Path(__file__).parent / "golden"
KEYS = json.loads((GOLDEN / "json_keys.json").read_text())


def run(capsys, *argv):
    status = main(list(argv))
    out, err = capsys.readouterr()
    return status, out, err


def run_json(capsys, *argv):
    status, out, err = run(capsys, *argv, "--format", "json")
    return status, json.loads(out), err


def csv_rows(text):
    return list(csv.reader(io.StringIO(text)))


@pytest.mark.parametrize("command,argv", [
    ("alpha", ["--k", "2", "--l", "3"]),
    ("beta", ["--k", "2", "--l", "100"]),
    ("usum", ["--m", "2", "--n", "5"]),
    ("simulate", ["--k", "2", "--l", "2", "--trials", "100"]),
    ("sweep", ["--k", "2", "--l", "10"]),
    ("validate", ["--quick"]),
])
def test_csv_header_golden(capsys, command, argv):
    status, out, _ = run(capsys, command, *argv, "--format", "csv")
    assert status == 0
    header = (GOLDEN / f"{command}.header").read_text().strip()
    assert out.split("\r\n")[0] == header
    assert out.endswith("\r\n")


def test_json_schema_golden(capsys):
    status, doc, _ = run_json(capsys, "alpha", "--k", "2", "--l", "3")
    assert status == 0
    assert list(doc) == KEYS["top"]
    assert list(doc["config_echo"]) == KEYS["config_echo"]
    assert [list(r) for r in doc["rows"]] == [KEYS["alpha_row"]] * 3
    status, _, err = run(capsys, "simulate", "--k", "2", "--l", "2", "--trials", "100", "--check")
    assert status == 3  # 100 trials is too few for the chi-square check
    assert json.loads(err)["error"]["code"] == "too-few-trials"
    status, doc, _ = run_json(capsys, "simulate", "--k", "2", "--l", "2", "--trials", "20000", "--check")
    assert list(doc["rows"][0]) == KEYS["simulate_row"]
    status, doc, _ = run_json(capsys, "validate", "--quick")
    assert list(doc) == KEYS["validate_top"]
    assert [list(c) for c in doc["checks"]] == [KEYS["check"]] * len(doc["checks"])


def test_alpha_headline_three_methods(capsys):
    status, doc, _ = run_json(capsys, "alpha", "--k", "40", "--l", "20000", "--method", "survival,asymptotic,simple")
    assert status == 0
    rows = {r["method"]: r for r in doc["rows"]}
    assert list(rows) == ["survival", "asymptotic", "simple"]
    assert abs(rows["survival"]["value"] - rows["asymptotic"]["value"]) <= 0.01
    assert all(r["consistency"] == "ok" for r in doc["rows"])


def test_alpha_exact_rational(capsys):
    status, doc, _ = run_json(capsys, "alpha", "--k", "2", "--l", "2", "--method", "exact-rational")
    row = doc["rows"][0]
    assert row["rational"] == "8/3"
    assert row["value"] == pytest.approx(8 / 3, rel=1e-16)
    status, out, _ = run(capsys, "alpha", "--k", "2", "--l", "2", "--method", "exact-rational")
    assert "8/3" in out and "2.66667" in out


def test_alpha_flags_instability(capsys):
    status, doc, _ = run_json(capsys, "alpha", "--k", "40", "--l", "20000", "--method", "survival,alternating-float")
    bad = doc["rows"][1]
    assert bad["consistency"] == "mismatch"
    assert bad["log10_cancellation_ratio"] > 100
    assert bad["value"] is None  # nan is emitted as null


def test_invalid_alphabet_exit_status(capsys):
    status, out, err = run(capsys, "alpha", "--k", "1", "--l", "5")
    assert status == 3
    assert json.loads(err)["error"]["code"] == "invalid-alphabet"


def test_size_limit_is_domain_error(capsys):
    status, _, err = run(capsys, "alpha", "--k", "2", "--l", "400", "--method", "exact-rational")
    assert status == 3
    assert json.loads(err)["error"]["code"] == "size-limit"


@pytest.mark.parametrize("argv", [
    ["alpha", "--l", "3"],
    ["alpha", "--k", "x", "--l", "3"],
    ["alpha", "--k", "2", "--l", "3", "--method", ""],
    ["alpha", "--k", "2", "--l", "3", "--method", "magic"],
    ["sweep", "--k", "2"],
    ["usum", "--m", "2"],
])
def test_usage_errors(capsys, argv):
    status, _, err = run(capsys, *argv)
    assert status == 2
    assert json.loads(err)["error"]["code"] == "usage"


def test_argparse_usage_exit(capsys):
    with pytest.raises(SystemExit) as info:
        main(["alpha", "--bogus"])
    assert info.value.code == 2


def test_machine_float_digits(capsys):
    _, out, _ = run(capsys, "beta", "--k", "2", "--l", "1000", "--format", "csv")
    row = dict(zip(*csv_rows(out)))
    for col in ("leading", "beta_constant", "beta_fluctuation", "total"):
        text = row[col]
        assert text == format(float(text), "#.17g")
        assert len(text.split("e")[0].replace("-", "").replace(".", "").lstrip("0")) == 17
    _, out, _ = run(capsys, "beta", "--k", "2", "--l", "1000")
    assert "1.33275" in out


def test_json_floats_parse(capsys):
    _, out, _ = run(capsys, "sweep", "--k", "2", "--l", "10000000000000000", "--format", "json")
    row = json.loads(out)["rows"][0]
    assert isinstance(row["exact"], float)


def test_beta_row(capsys):
    status, doc, _ = run_json(capsys, "beta", "--k", "2", "--l", "1000")
    row = doc["rows"][0]
    assert row["total"] == row["leading"] + row["beta_value"]
    assert abs(row["beta_fluctuation"]) <= row["amplitude"] <= 2e-6
    assert row["residual_order"] == "O(1/L)"


def test_usum_rows(capsys):
    status, doc, _ = run_json(capsys, "usum", "--m", "2", "--n", "3")
    rows = {r["method"]: r for r in doc["rows"]}
    assert rows["exact"]["rational"] == "8/3"
    assert rows["asymptotic"]["rational"] is None


def test_simulate_serial_infeasible(capsys):
    status, _, err = run(capsys, "simulate", "--k", "40", "--l", "20000", "--model", "serial")
    assert status == 3
    payload = json.loads(err)["error"]
    assert payload["code"] == "infeasible-serial"
    assert round(payload["log10_mean"]) == 32041


def test_simulate_deterministic(capsys):
    argv = ["simulate", "--k", "3", "--l", "4", "--trials", "5000", "--seed", "17"]
    _, a, _ = run_json(capsys, *argv)
    _, b, _ = run_json(capsys, *argv, "--workers", "3")
    assert a["rows"] == b["rows"]
    assert sum(a["rows"][0]["histogram"].values()) == 5000


def test_sweep_grid(capsys):
    status, doc, _ = run_json(capsys, "sweep", "--k", "2,40", "--l-range", "100:100000:4")
    assert status == 0
    rows = doc["rows"]
    assert [(r["k"], r["l"]) for r in rows] == [(k, l) for k in (2, 40) for l in (100, 1000, 10000, 100000)]
    for k, limit in ((2, 1.0), (40, 25.0)):
        scaled = [abs(r["residual_times_l"]) for r in rows if r["k"] == k]
        assert max(scaled) <= limit


def test_sweep_parallel_matches_serial(capsys):
    _, a, _ = run_json(capsys, "sweep", "--k", "2,3,5", "--l", "10,100")
    _, b, _ = run_json(capsys, "sweep", "--k", "2,3,5", "--l", "10,100", "--workers", "4")
    assert a["rows"] == b["rows"]


def test_sweep_single_cell_matches_alpha(capsys):
    _, sw, _ = run_json(capsys, "sweep", "--k", "3", "--l", "250")
    _, al, _ = run_json(capsys, "alpha", "--k", "3", "--l", "250", "--method", "survival,asymptotic")
    cell = sw["rows"][0]
    rows = {r["method"]: r for r in al["rows"]}
    assert cell["exact"] == rows["survival"]["value"]
    assert cell["asymptotic_total"] == rows["asymptotic"]["value"]


def test_sweep_oversized(capsys):
    status, _, err = run(capsys, "sweep", "--k", "2,3", "--l-range", "10:1000:50", "--max-cells", "20")
    assert status == 2
    assert "chunks" in json.loads(err)["error"]["message"]


def test_validate_quick_fast(capsys):
    t0 = time.perf_counter()
    status, doc, _ = run_json(capsys, "validate", "--quick")
    assert time.perf_counter() - t0 < 10
    assert status == 0
    assert all(c["passed"] for c in doc["checks"])
    names = {c["check"] for c in doc["checks"]}
    assert {"knuth-identity", "survival-vs-rational", "gamma-oracle", "periodicity",
            "amplitude-bound", "simulation-chi-square"} <= names


def test_validate_fault_injection(capsys):
    status, doc, err = run_json(capsys, "validate", "--quick", "--perturb-gamma", "1e-6")
    assert status == 4
    failed = [c["check"] for c in doc["checks"] if not c["passed"]]
    assert failed == ["gamma-oracle"]
    assert "gamma-oracle" in err


@pytest.mark.slow
def test_validate_full(capsys):
    status, doc, _ = run_json(capsys, "validate")
    assert status == 0, [c for c in doc["checks"] if not c["passed"]]


def test_params_file_and_override(capsys, tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "alpha", "k": 2, "l": 2, "method": "exact-rational,survival", "format": "csv"}))
    status, out, _ = run(capsys, "alpha", "--params-file", str(cfg))
    assert status == 0
    assert out.startswith("k,l,method")
    assert "8/3" in out
    status, doc, _ = run_json(capsys, "alpha", "--params-file", str(cfg), "--l", "1")
    assert doc["rows"][0]["rational"] == "2"
    assert doc["config_echo"]["l"] == "1"


def test_params_file_errors(capsys, tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"command": "beta", "k": 2}))
    assert run(capsys, "alpha", "--params-file", str(bad))[0] == 2
    bad.write_text(json.dumps({"kk": 2}))
    assert run(capsys, "alpha", "--params-file", str(bad))[0] == 2
    assert run(capsys, "alpha", "--params-file", str(tmp_path / "missing.json"))[0] == 2


def test_out_file(capsys, tmp_path):
    target = tmp_path / "o.csv"
    status, out, _ = run(capsys, "usum", "--m", "3/2", "--n", "4", "--format", "csv", "--out", str(target))
    assert status == 0 and out == ""
    assert target.read_text().startswith("m,n,method")


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "parallel_guess", "alpha", "--k", "2", "--l", "1", "--method", "exact-rational", "--format", "csv"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert csv_rows(proc.stdout)[1][4] == "2"
