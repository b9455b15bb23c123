import csv
import io
import json
import subprocess
import sys

import pytest

from ksep.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_census_n3_perturbed_golden(capsys):
    code, out, err = run(capsys, "census", "--n", "3", "--set", "perturbed-canonical", "--golden")
    assert code == 0, err
    d = json.loads(out)
    assert d["census"]["histogram"] == {"1": 2, "2": 102, "3": 126, "4": 26}
    assert d["seed"] == 0 and "golden: match" in err


def test_census_n5_rejected(capsys):
    code, _, err = run(capsys, "census", "--n", "5", "--set", "grid")
    assert code == 2 and "2**32" in err


def test_census_fixed_golden_and_csv(capsys):
    code, out, _ = run(capsys, "census", "--n", "3", "--set", "fixed", "--dir", "1,2,4",
                       "--golden", "--format", "csv")
    assert code == 0
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["k", "count"] and rows[1] == ["1", "2"] and rows[-1] == ["unresolved", "0"]


def test_census_golden_mismatch_exits_1(capsys):
    code, _, err = run(capsys, "census", "--n", "4", "--set", "perturbed-canonical", "--golden")
    assert code == 1 and "golden mismatch" in err and "k=2: expected 1228, got 1230" in err


def test_census_golden_binary_perturbation(capsys):
    code, _, err = run(capsys, "census", "--n", "4", "--set", "perturbed-canonical",
                       "--perturbation", "binary", "--golden")
    assert code == 0, err


def test_convention_sweep_reports_match(capsys):
    code, out, err = run(capsys, "census", "--n", "4", "--set", "canonical",
                         "--convention-sweep", "--golden")
    assert code == 0
    d = json.loads(out)
    assert d["matching_convention"] == ["perturbed-binary"]
    assert set(d["conventions"]) == {"pure", "perturbed-linear", "perturbed-binary"}


def test_census_bad_args(capsys):
    assert run(capsys, "census", "--n", "3", "--set", "fixed")[0] == 2
    assert run(capsys, "census", "--n", "3", "--set", "grid", "--golden")[0] == 2
    assert run(capsys, "census", "--n", "3", "--set", "fixed", "--dir", "1,1")[0] == 2
    assert run(capsys, "census", "--n", "3", "--set", "fixed", "--dir", "1,1,1",
               "--golden")[0] == 2
    assert run(capsys, "census", "--n", "3", "--threads", "0")[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["census"])
    assert exc.value.code == 2


def test_census_records_csv_and_file_set(capsys, tmp_path):
    dirs = tmp_path / "dirs.txt"
    dirs.write_text("# axes\n1,0,0\n0,1,0\n0,0,1\n1,2,4\n")
    out_path = tmp_path / "rec.csv"
    code, _, _ = run(capsys, "census", "--n", "3", "--set", "file", "--directions", str(dirs),
                     "--records", "--format", "csv", "--output", str(out_path))
    assert code == 0
    rows = list(csv.reader(out_path.open()))
    assert rows[0] == ["index", "k", "direction", "min_gap"] and len(rows) == 257
    assert rows[1][:2] == ["0", "1"]


def test_census_output_is_deterministic(capsys):
    a = run(capsys, "census", "--n", "3", "--set", "canonical", "--records", "--threads", "1")[1]
    b = run(capsys, "census", "--n", "3", "--set", "canonical", "--records", "--threads", "1")[1]
    assert a == b and json.loads(a)["census"]["records"][5]["index"] == 5


def test_analyze_function_27(capsys):
    code, out, err = run(capsys, "analyze", "--n", "3", "--fn", "27", "--dir", "3/4,1,-1/4")
    assert code == 0
    d = json.loads(out)
    assert d["profile"]["k"] == 4 and d["profile"]["min_gap"] == "1/4"
    assert d["truth_table"] == "00011011"


def test_analyze_xor_and_constant(capsys):
    code, out, _ = run(capsys, "analyze", "--n", "2", "--fn", "6", "--dir", "1,1")
    assert code == 0 and json.loads(out)["profile"]["k"] == 3
    code, out, _ = run(capsys, "analyze", "--n", "3", "--fn", "0")
    assert code == 0 and json.loads(out)["k"] == 1


def test_analyze_search_best_margin(capsys):
    code, out, _ = run(capsys, "analyze", "--n", "3", "--fn", "27", "--format", "csv", "--top", "3")
    rows = list(csv.reader(io.StringIO(out)))
    assert code == 0 and len(rows) == 4
    assert rows[1][1] == "4"
    gap = rows[1][2].split("/")
    assert int(gap[0]) / int(gap[1]) >= 0.25


def test_analyze_csv_dataset(capsys, tmp_path):
    p = tmp_path / "xor.csv"
    p.write_text("x1,x2,label\n0,0,0\n0,1,1\n1,0,1\n1,1,0\n")
    code, out, _ = run(capsys, "analyze", "--csv", str(p), "--dir", "1,1")
    assert code == 0 and json.loads(out)["profile"]["min_gap"] == "1"
    code, out, _ = run(capsys, "analyze", "--csv", str(p))
    assert code == 0 and json.loads(out)["complexity"]["k"] == 3


def test_analyze_bad_input(capsys):
    assert run(capsys, "analyze", "--n", "3")[0] == 2
    assert run(capsys, "analyze", "--n", "3", "--fn", "999")[0] == 2
    assert run(capsys, "analyze", "--n", "3", "--fn", "1", "--dir", "1,a,1")[0] == 2
    assert run(capsys, "analyze", "--n", "5", "--fn", "1")[0] == 2


def test_learn_xor(capsys, tmp_path):
    model = tmp_path / "m.json"
    code, out, err = run(capsys, "learn", "--fn-n", "2", "--fn", "6", "--model-out", str(model))
    assert code == 0
    d = json.loads(out)
    assert d["report"]["k"] == 3 and d["model"]["pure"]
    assert json.loads(model.read_text())["k"] == 3


def test_learn_parity4_seed7(capsys):
    code, out, _ = run(capsys, "learn", "--parity", "4", "--restarts", "20", "--seed", "7")
    d = json.loads(out)
    assert code == 0 and d["report"]["k"] == 5 and d["report"]["accuracy"] == 1.0
    assert d["model"]["meta"]["seed"] == 7


def test_learn_one_class_csv(capsys, tmp_path):
    p = tmp_path / "one_class.csv"
    p.write_text("x1,x2,label\n0,0,a\n1,1,a\n")
    code, _, err = run(capsys, "learn", "--csv", str(p))
    assert code == 2 and "one class" in err


def test_learn_non_pure_exit_1(capsys, tmp_path):
    p = tmp_path / "dup.csv"
    p.write_text("x,label\n0,a\n0,b\n1,a\n")
    model = tmp_path / "m.json"
    code, out, err = run(capsys, "learn", "--csv", str(p), "--model-out", str(model))
    assert code == 1 and not json.loads(model.read_text())["pure"]


def test_learn_cv(capsys):
    with pytest.warns(UserWarning, match="weakly informative"):
        code, out, _ = run(capsys, "learn", "--parity", "2", "--cv", "loo")
    assert code == 0 and len(json.loads(out)["cv"]["fold_accuracy"]) == 4


def test_learn_bad_args(capsys):
    assert run(capsys, "learn")[0] == 2
    assert run(capsys, "learn", "--fn", "6")[0] == 2
    assert run(capsys, "learn", "--parity", "3", "--restarts", "0")[0] == 2


def test_table1(capsys):
    code, out, err = run(capsys, "table1", "--golden")
    assert code == 0
    d = json.loads(out)
    assert d["rows"][9] == {"direction": "111", "k2": 6, "k3": 6, "k4": 2}
    assert d["totals"] == {"k2": 54, "k3": 36, "k4": 8}
    code, out, _ = run(capsys, "table1", "--format", "csv")
    rows = list(csv.reader(io.StringIO(out)))
    assert rows[0] == ["direction", "k2", "k3", "k4"] and len(rows) == 14


def test_parity_check(capsys):
    code, out, _ = run(capsys, "parity-check", "--n-max", "6", "--learn-max", "3")
    d = json.loads(out)
    assert code == 0 and d["ok"]
    assert d["results"][2] == {"n": 3, "parity_cos_matches": True, "k_main_diagonal": 4,
                               "learned_k": 4, "learned_accuracy": 1.0, "ok": True}


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "ksep", "table1", "--format", "csv"],
                       capture_output=True, text=True)
    assert r.returncode == 0 and r.stdout.startswith("direction,k2,k3,k4")
    r = subprocess.run([sys.executable, "-m", "ksep", "--help"], capture_output=True, text=True)
    assert "parity-check" in r.stdout
