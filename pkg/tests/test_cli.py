import csv
import io
import json
import math
import subprocess
import sys

import pytest

from digitlaw.cli import FIXED_COLUMNS, fmt_number, main, parse_bias, parse_prior, UsageError
from digitlaw.constants import digit_string


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def read_csv(text):
    rows = [line for line in text.splitlines() if not line.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(rows))))


def comments(text):
    return [line[2:] for line in text.splitlines() if line.startswith("# ")]


# --- analyze -------------------------------------------------------------------


def test_analyze_pi_1e6(tmp_path, capsys):
    out_file = tmp_path / "pi.csv"
    code, out, _ = run(["analyze", "--constant", "pi", "--max-digits", "1000000", "--priors", "a1,a50",
                        "--out", str(out_file)], capsys)
    assert code == 0
    rows = read_csv(out_file.read_text())
    assert len(rows) == 1000
    assert list(rows[0])[:6] == FIXED_COLUMNS
    last = rows[-1]
    assert int(last["N"]) == 10**6
    assert last["log_bf_mix"] == ""
    assert float(last["gap"]) == pytest.approx(18.39, abs=0.01)
    # stdout carries the per-prior summary at two decimals
    lines = out.strip().splitlines()
    assert len(lines) == 2
    assert f"log BF01 = {float(last['log_bf_a1']):.2f}" in lines[0]
    assert "[a50]" in lines[1]


def test_analyze_csv_to_stdout_ends_with_summary(capsys):
    code, out, _ = run(["analyze", "--constant", "e", "--max-digits", "3000"], capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("# digitlaw points schema v1")
    assert out.splitlines()[-1].startswith("# N = 3000  [a50]  log BF01 = ")
    assert len(read_csv(out)) == 3


def test_csv_and_json_carry_identical_numbers(tmp_path, capsys):
    args = ["analyze", "--constant", "sqrt2", "--max-digits", "20500", "--priors", "a1,a50,mix:5:0.2:0.5,a3"]
    assert main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "a.json"), "--format", "json"]) == 0
    capsys.readouterr()
    rows = read_csv((tmp_path / "a.csv").read_text())
    doc = json.loads((tmp_path / "a.json").read_text())
    assert doc["columns"] == list(rows[0])
    assert len(doc["points"]) == len(rows) == 21
    assert rows[-1]["partial"] == "true" and doc["points"][-1]["partial"] is True
    for row, point in zip(rows, doc["points"]):
        for col, text in row.items():
            val = point[col]
            if text == "":
                assert val is None
            elif col == "partial":
                assert (text == "true") == val
            else:
                assert float(text) == val
    assert "log_bf_a3" in doc["columns"] and "log_bf_threshold_mix" in doc["columns"]
    assert doc["final_log_bf01"]["a3"] == pytest.approx(doc["points"][-1]["log_bf_a3"])


def test_numbers_round_trip_losslessly(tmp_path, capsys):
    out_file = tmp_path / "x.csv"
    assert main(["analyze", "--constant", "ln2", "--max-digits", "5000", "--out", str(out_file)]) == 0
    capsys.readouterr()
    for row in read_csv(out_file.read_text()):
        for col, text in row.items():
            if not text or col == "partial":
                continue
            value = int(text) if col == "N" else float(text)
            assert fmt_number(value) == text
            assert float(f"{float(text):.17g}") == float(text)


def test_metadata_is_sufficient_to_rerun(tmp_path, capsys):
    out_file = tmp_path / "m.json"
    argv = ["analyze", "--constant", "e", "--max-digits", "4000", "--block", "500", "--alpha", "0.01",
            "--format", "json", "--out", str(out_file)]
    assert main(argv) == 0
    meta = json.loads(out_file.read_text())["metadata"]
    assert meta["argv"] == argv
    assert meta["software"] == "digitlaw" and meta["version"]
    assert meta["block_size"] == 500 and meta["alpha"] == 0.01 and meta["constant"] == "e"
    rerun = tmp_path / "m2.json"
    argv2 = list(meta["argv"])
    argv2[argv2.index("--out") + 1] = str(rerun)
    assert main(argv2) == 0
    capsys.readouterr()
    a = json.loads(out_file.read_text())
    b = json.loads(rerun.read_text())
    assert a["points"] == b["points"]


def test_analyze_digit_file(tmp_path, capsys):
    p = tmp_path / "pi.txt"
    p.write_text("3." + digit_string("pi", 2500) + "\n")
    code, out, _ = run(["analyze", "--digits", str(p), "--priors", "a1"], capsys)
    assert code == 0
    rows = read_csv(out)
    assert [r["N"] for r in rows] == ["1000", "2000", "2500"]
    assert rows[0]["log_bf_a50"] == ""


def test_analyze_counts_entry_point(capsys):
    counts = "99999485134,99999945664,100000480057,99999787805,100000357857," \
             "99999671008,99999807503,99999818723,100000791469,99999854780"
    code, out, _ = run(["analyze", "--counts", counts], capsys)
    assert code == 0
    row = read_csv(out)[0]
    assert float(row["log_bf_a1"]) == pytest.approx(107.29, abs=0.01)
    assert float(row["log_bf_a50"]) == pytest.approx(88.90, abs=0.01)
    assert "[a1]  log BF01 = 107.29" in out


@pytest.mark.parametrize(
    "argv",
    [
        ["analyze", "--constant", "e", "--max-digits", "0"],
        ["analyze", "--constant", "e", "--digits", "x.txt"],
        ["analyze"],
        ["analyze", "--constant", "tau"],
        ["analyze", "--constant", "e", "--priors", "b7"],
        ["analyze", "--constant", "e", "--priors", "mix:5:0.2"],
        ["analyze", "--constant", "e", "--priors", "a0"],
        ["analyze", "--constant", "e", "--alpha", "1.5"],
        ["analyze", "--counts", "1,2,3"],
        ["analyze", "--counts", "0,0,0,0,0,0,0,0,0,0"],
        ["simulate", "--bias", "0:0.11,0:0.2"],
        ["simulate", "--bias", "0-0.11"],
        ["simulate", "--bias", "0:0.6,1:0.6"],
        ["simulate", "--bias", "10:0.1"],
        ["simulate", "--reps", "0"],
        ["threshold", "--n", "15", "--alpha", "0.05"],
        ["threshold", "--n", "20"],
        ["generate", "--constant", "pi", "--length", "0", "--out", "x"],
        ["nonsense"],
    ],
)
def test_usage_errors_exit_2(argv, capsys):
    code, _, err = run(argv, capsys)
    assert code == 2
    assert err


def test_malformed_digit_file_exit_3(tmp_path, capsys):
    p = tmp_path / "bad.txt"
    p.write_text("3.1415\n92x6")
    code, _, err = run(["analyze", "--digits", str(p)], capsys)
    assert code == 3
    assert "byte offset 9" in err
    code, _, _ = run(["analyze", "--digits", str(tmp_path / "absent.txt")], capsys)
    assert code == 3


def test_generation_ceiling_exit_4(tmp_path, capsys):
    code, _, err = run(["analyze", "--constant", "pi", "--max-digits", "20000000"], capsys)
    assert code == 4 and "ceiling" in err
    code, _, _ = run(["generate", "--constant", "e", "--length", "50", "--ceiling", "49",
                      "--out", str(tmp_path / "e.txt")], capsys)
    assert code == 4


# --- generate / threshold ---------------------------------------------------------


def test_generate_e(tmp_path, capsys):
    p = tmp_path / "e.txt"
    code, out, _ = run(["generate", "--constant", "e", "--length", "100", "--out", str(p)], capsys)
    assert code == 0
    assert p.read_text() == digit_string("e", 100) + "\n"
    assert p.read_text()[:10] == "7182818284"


def test_threshold_n1000(capsys):
    code, out, _ = run(["threshold", "--n", "1000", "--alpha", "0.05", "--prior", "a1"], capsys)
    assert code == 0
    lines = dict(line.split(": ", 1) for line in out.strip().splitlines())
    assert lines["counts"] == ",".join(["100"] * 8 + ["129", "71"])
    assert float(lines["chisq"]) == pytest.approx(16.82)
    assert float(lines["critical"]) == pytest.approx(16.9190, abs=1e-4)
    assert float(lines["log_bf01[a1]"]) == pytest.approx(13.073894917160716, abs=1e-9)


# --- simulate -------------------------------------------------------------------------


def test_simulate_output_and_determinism(tmp_path, capsys):
    out_file = tmp_path / "a.csv"
    argv = ["simulate", "--reps", "10", "--digits-per-rep", "1000", "--bias", "0:0.1", "--seed", "1",
            "--out", str(out_file)]
    assert main(argv) == 0
    first = out_file.read_bytes()
    assert main(argv) == 0
    capsys.readouterr()
    assert out_file.read_bytes() == first
    text = first.decode()
    rows = read_csv(text)
    assert len(rows) == 10
    assert [r["rep"] for r in rows] == [str(i) for i in range(10)]
    finals = sorted(-float(r["log_bf10_a1"]) for r in rows)
    assert (finals[4] + finals[5]) / 2 > 0
    summary = json.loads(next(c for c in comments(text) if c.startswith("summary: "))[len("summary: "):])
    assert summary["a1"]["mean_log_bf10"] == pytest.approx(sum(float(r["log_bf10_a1"]) for r in rows) / 10)


def test_simulate_jobs_do_not_change_output(tmp_path, capsys):
    base = ["simulate", "--reps", "6", "--digits-per-rep", "3000", "--seed", "5", "--format", "json"]
    assert main(base + ["--jobs", "1", "--out", str(tmp_path / "1.json")]) == 0
    assert main(base + ["--jobs", "2", "--out", str(tmp_path / "2.json")]) == 0
    capsys.readouterr()
    a = json.loads((tmp_path / "1.json").read_text())
    b = json.loads((tmp_path / "2.json").read_text())
    assert a["replications"] == b["replications"] and a["summary"] == b["summary"]


def test_simulate_summary_on_stdout(tmp_path, capsys):
    code, out, _ = run(["simulate", "--reps", "3", "--digits-per-rep", "2000", "--out", str(tmp_path / "s.csv")],
                       capsys)
    assert code == 0
    assert out.splitlines()[0].startswith("[a1] mean log BF10 = ")


# --- parsers ---------------------------------------------------------------------------


def test_parse_bias_spreads_remainder():
    p = parse_bias("0:0.11")
    assert p[0] == pytest.approx(0.11)
    assert all(v == pytest.approx(0.89 / 9) for v in p[1:])
    assert sum(p) == pytest.approx(1.0, abs=1e-15)
    p = parse_bias("3:0.5,7:0.3")
    assert p[3] == pytest.approx(0.5) and p[7] == pytest.approx(0.3) and p[0] == pytest.approx(0.025)


def test_parse_prior():
    label, prior = parse_prior("mix:5:0.2:0.5")
    assert label == "mix" and prior.weight == 0.5 and prior.second.a[0] == 0.2
    assert parse_prior("a50")[0] == "a50"
    with pytest.raises(UsageError):
        parse_prior("mix:5:0.2:1.5")


@pytest.mark.parametrize("value, text", [(None, ""), (math.nan, ""), (True, "true"), (3, "3"), (0.1, "0.1")])
def test_fmt_number(value, text):
    assert fmt_number(value) == text


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "digitlaw", "threshold", "--n", "1000"], capture_output=True, text=True
    )
    assert proc.returncode == 0 and "129,71" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "digitlaw", "threshold", "--n", "15"], capture_output=True)
    assert proc.returncode == 2
