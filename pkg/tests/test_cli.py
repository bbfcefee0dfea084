import subprocess
import sys

import pytest

from nm01 import cli, data_io
from nm01.onebit import OneBitConfig

SMALL = ["--m", "60", "--n", "40", "--s", "3", "--trials", "3"]


def run(argv, capsys):
    code = cli.main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


def test_svm_outlier(capsys):
    code, out, _ = run(["svm", "--synthetic-outlier", "100"], capsys)
    assert code == 0
    assert out.startswith("Acc=1.000 ")


def test_svm_data_file_writes_csv(tmp_path, capsys):
    data = tmp_path / "small.libsvm"
    data.write_text("1 1:0.1 2:1\n2 1:0.9 2:0.2\n1 1:0.2 2:0.8\n0 1:0.7\n")
    out_csv = tmp_path / "svm.csv"
    code, out, _ = run(["svm", "--data", str(data), "--out", str(out_csv)], capsys)
    assert code == 0
    acc = float(out.split()[0].split("=")[1])
    assert 0.0 <= acc <= 1.0
    rows = data_io.read_csv_report(out_csv)
    assert list(rows[0]) == cli.SVM_FIELDS
    assert rows[0]["name"] == "small.libsvm" and rows[0]["m"] == 4 and rows[0]["n"] == 3


def test_svm_needs_a_source(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["svm"])
    assert info.value.code == 2


def test_svm_bad_flag_value(capsys):
    with pytest.raises(SystemExit) as info:
        cli.main(["svm", "--synthetic-outlier", "1", "--tau", "-1"])
    assert info.value.code == 2


def test_svm_parse_error_exits_3(tmp_path, capsys):
    bad = tmp_path / "bad.libsvm"
    bad.write_text("1 1:1\n1 2:1 1:3\n")
    code, _, err = run(["svm", "--data", str(bad)], capsys)
    assert code == 3
    assert "line 2" in err
    code, _, _ = run(["svm", "--data", str(tmp_path / "absent")], capsys)
    assert code == 3


def test_onebit_s_above_n(capsys):
    code, _, err = run(["onebit", "--n", "5", "--s", "6"], capsys)
    assert code == 2 and "exceeds" in err


def test_onebit_noiseless_unflipped_hd_equals_he(tmp_path, capsys):
    out_csv = tmp_path / "o.csv"
    code, _, _ = run(["onebit", "--m", "60", "--n", "40", "--s", "3", "--r", "0", "--noise-sd", "0",
                      "--trials", "1", "--out", str(out_csv)], capsys)
    assert code == 0
    row = data_io.read_csv_report(out_csv)[0]
    assert row["hd"] == row["he"]


def _metric_columns(path):
    return [{k: v for k, v in r.items() if not k.endswith("time")} for r in data_io.read_csv_report(path)]


def test_onebit_is_deterministic(tmp_path, capsys, monkeypatch):
    monkeypatch.setenv("NM01_THREADS", "1")
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(["onebit", *SMALL, "--baseline", "biht", "--out", str(a)], capsys)[0] == 0
    assert run(["onebit", *SMALL, "--baseline", "biht", "--out", str(b)], capsys)[0] == 0
    assert _metric_columns(a) == _metric_columns(b)
    header = a.read_text().splitlines()[0].split(",")
    assert header == cli.ONEBIT_FIELDS + cli.BIHT_FIELDS


def test_serial_and_parallel_agree():
    cfg = OneBitConfig(m=60, n=40, s=3)
    serial = cli.run_onebit_trials(cfg, 3, 11, workers=1)
    parallel = cli.run_onebit_trials(cfg, 3, 11, workers=2)
    strip = lambda rows: [{k: v for k, v in r.items() if k != "time"} for r in rows]
    assert strip(serial) == strip(parallel)


def test_check_all_suites(capsys):
    code, out, _ = run(["check"], capsys)
    assert code == 0
    assert "all 4 suites passed" in out


def test_check_single_suite(capsys):
    code, out, _ = run(["check", "--suite", "prox"], capsys)
    assert code == 0
    assert "all 1 suites passed" in out
    assert "saddle" not in out


def test_check_injected_fault_fails(capsys):
    code, out, _ = run(["check", "--inject-fault"], capsys)
    assert code == 1
    assert "4 of 4 suites failed" in out


def test_console_entry_point():
    proc = subprocess.run([sys.executable, "-m", "nm01.cli", "check", "--suite", "fd"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "all 1 suites passed" in proc.stdout
