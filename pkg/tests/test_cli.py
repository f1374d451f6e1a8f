import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from fairkm.cli import FRONT_HEADER, main, read_labels
from fairkm.datasets import load_csv
from fairkm.metrics import balance_of_labels, cost_of_labels


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    assert main(["gen-data", "--preset", "syn_equal_ds1", "--seed", "1", "-o", str(d / "d.csv")]) == 0
    return d / "d.csv"


def _rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def test_gen_data_presets_and_hash(tmp_path):
    for name, ratio in (("syn_equal_ds1", [200, 200]), ("syn_unequal_ds2", [100, 300])):
        a, b = tmp_path / f"{name}_a.csv", tmp_path / f"{name}_b.csv"
        assert main(["gen-data", "--preset", name, "--seed", "5", "-o", str(a)]) == 0
        assert main(["gen-data", "--preset", name, "--seed", "5", "-o", str(b)]) == 0
        assert a.read_bytes() == b.read_bytes()
        assert load_csv(a).group_sizes().tolist() == ratio
        m = json.loads((tmp_path / f"{name}_a.csv.manifest.json").read_text())
        assert m["dataset_hash"] == load_csv(a).content_hash()


def test_gen_data_from_spec_file(tmp_path):
    spec = {"components": [{"mean": [0, 0], "var": [1, 1], "counts": [30, 10]},
                           {"mean": [5, 5], "var": [1, 1], "counts": [0, 20]}]}
    (tmp_path / "s.json").write_text(json.dumps(spec))
    assert main(["gen-data", "--spec", str(tmp_path / "s.json"), "-o", str(tmp_path / "o.csv")]) == 0
    assert load_csv(tmp_path / "o.csv").group_sizes().tolist() == [30, 30]


def test_run_extremes(data, tmp_path):
    for na, nb, check in ((4, 0, lambda b: b <= 0.05), (0, 4, lambda b: b >= 0.95)):
        out = tmp_path / f"r{na}{nb}"
        assert main(["run", str(data), "--na", str(na), "--nb", str(nb), "--seed", "3",
                     "-o", str(out)]) == 0
        rows = _rows(out / "trace.csv")
        assert rows[0] == ["iter", "cost", "balance"]
        assert len(rows) == 402
        assert check(float(rows[-1][2]))
        ds = load_csv(data)
        labels = read_labels(out / "labels.txt")
        assert float(rows[-1][1]) == cost_of_labels(ds.points, labels, 2)


def test_pareto_front_is_self_consistent(data, tmp_path):
    out = tmp_path / "pf"
    assert main(["pareto", str(data), "--list-size", "6", "--max-iter", "8", "--seed", "2",
                 "--threads", "1", "--gnuplot", "-o", str(out)]) == 0
    rows = _rows(out / "front.csv")
    assert rows[0] == FRONT_HEADER
    ds = load_csv(data)
    prev_cost, prev_bal = -np.inf, -np.inf
    for r in rows[1:]:
        cost, bal = float(r[0]), float(r[1])
        assert cost >= prev_cost and bal > prev_bal
        prev_cost, prev_bal = cost, bal
        labels = read_labels(out / r[6])
        assert cost == pytest.approx(cost_of_labels(ds.points, labels, 2), rel=1e-12)
        assert bal == balance_of_labels(ds.group_of, labels, 2, 2)
    assert (out / "front.gp").exists()
    hist = _rows(out / "history.csv")
    assert hist[0] == ["iteration", "size", "added", "removed"] and len(hist) == 10


def test_verify_round_trip_and_thread_override(data, tmp_path, capsys):
    out = tmp_path / "pf"
    assert main(["pareto", str(data), "--list-size", "4", "--max-iter", "3", "--threads", "1",
                 "-o", str(out)]) == 0
    assert main(["verify", str(out / "manifest.json")]) == 0
    assert main(["verify", str(out / "manifest.json"), "--threads", "3"]) == 0
    (out / "front.csv").write_text("tampered\n")
    assert main(["verify", str(out / "manifest.json")]) == 3
    assert "MISMATCH" in capsys.readouterr().err


def test_verify_run_and_gen_data(data, tmp_path):
    out = tmp_path / "r"
    assert main(["run", str(data), "--na", "2", "--nb", "2", "--iters", "20", "-o", str(out)]) == 0
    assert main(["verify", str(out / "manifest.json")]) == 0
    assert main(["verify", str(data) + ".manifest.json"]) == 0


def test_sa2gd_outputs(tmp_path):
    out = tmp_path / "s"
    assert main(["sa2gd", "--T", "10,32,100,316", "--seeds", "3", "-o", str(out)]) == 0
    rows = _rows(out / "rate.csv")
    assert rows[0] == ["T", "seed", "min_gap"] and len(rows) == 1 + 4 * 3
    summary = json.loads((out / "summary.json").read_text())
    assert {"slope", "ci", "x_star", "noiseless_distance"} <= set(summary)
    assert main(["verify", str(out / "manifest.json")]) == 0


@pytest.mark.parametrize("argv,code", [
    (["run"], 1),
    (["run", "missing.csv"], 2),
    (["gen-data", "--preset", "nope", "-o", "x.csv"], 1),
    (["sa2gd", "--problem", "cubic"], 1),
    (["pareto", "DATA", "--pairs", "4-0"], 1),
    (["run", "DATA", "-K", "1"], 1),
    (["run", "DATA", "--group-column", "sex"], 1),
])
def test_exit_codes(argv, code, data, tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    argv = [str(data) if a == "DATA" else a for a in argv]
    try:
        got = main(argv)
    except SystemExit as e:
        got = e.code
    assert got == code


def test_bad_rows_exit_with_data_error(tmp_path):
    f = tmp_path / "bad.csv"
    f.write_text("x,group\n1,a\nnan?,b\n")
    assert main(["run", str(f), "-o", str(tmp_path / "o")]) == 2


def test_failed_run_leaves_no_partial_output(tmp_path):
    f = tmp_path / "one.csv"
    f.write_text("x,group\n1,a\n2,b\n")
    out = tmp_path / "o"
    # three clusters cannot be formed from two points: a data error
    assert main(["run", str(f), "-K", "3", "-o", str(out)]) == 2
    assert not out.exists()
    assert [p.name for p in tmp_path.iterdir()] == ["one.csv"]


def test_console_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "fairkm.cli", "--version"], capture_output=True, text=True)
    assert r.returncode == 0 and "fairkm" in r.stdout
