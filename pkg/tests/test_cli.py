import csv
import json

import pytest

from lpbm.cli import TABLE_COLUMNS, main
from lpbm.front import Front
from lpbm.model import load_instance


def run(*args):
    return main([str(a) for a in args])


def test_gen_is_deterministic(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    assert run("gen", "mokp", "--n", 10, "--seed", 3, "--out", a) == 0
    assert run("gen", "mokp", "--n", 10, "--seed", 3, "--out", b) == 0
    assert a.read_bytes() == b.read_bytes()


def test_gen_sizes(tmp_path):
    run("gen", "toflp", "--facilities", 5, "--out", tmp_path / "f.json")
    inst = load_instance(tmp_path / "f.json")
    assert inst.n == 5 * 10 + 5 + 10
    run("gen", "moap", "--tasks", 5, "--out", tmp_path / "m.json")
    assert load_instance(tmp_path / "m.json").n == 25


def test_unknown_family_exits_2(capsys):
    with pytest.raises(SystemExit) as exc:
        run("gen", "tsp")
    assert exc.value.code == 2


@pytest.mark.parametrize("family,size,branch", [("mokp", ["--n", 10], "FPGPR"), ("moap", ["--tasks", 3], "FP+")])
def test_solve_reports_branch(tmp_path, family, size, branch):
    inst = tmp_path / "i.json"
    run("gen", family, *size, "--seed", 1, "--out", inst)
    out = tmp_path / "front.json"
    assert run("solve", inst, "--time-limit", 1, "--seed", 1, "--out", out) == 0
    front = Front.from_json(out.read_text())
    assert front.stats["branch"] == branch
    assert "time_s" not in front.stats
    assert run("solve", inst, "--time-limit", 1, "--record-time", "--out", out) == 0
    assert "time_s" in json.loads(out.read_text())["stats"]


def test_solve_missing_file_exits_2(tmp_path, capsys):
    assert run("solve", tmp_path / "nope.json") == 2
    assert "no such file" in capsys.readouterr().err


def test_solve_infeasible_instance_fails(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps({"n": 2, "objectives": [[1, 0], [0, 1], [1, 1]],
                             "constraints": [{"coeffs": [[0, 1], [1, 1]], "sense": ">=", "rhs": 3}]}))
    assert run("solve", p) != 0
    assert "infeasible" in capsys.readouterr().err


def test_exact_and_indicators(tmp_path, capsys):
    inst = tmp_path / "k.json"
    run("gen", "mokp", "--n", 6, "--seed", 2, "--out", inst)
    assert run("exact", inst, "--out", tmp_path / "e.json") == 0
    capsys.readouterr()
    table = tmp_path / "rows.csv"
    assert run("indicators", "--approx", tmp_path / "e.json", "--ref", tmp_path / "e.json", "--csv", table) == 0
    rep = json.loads(capsys.readouterr().out)
    assert rep["hv_pct"] == pytest.approx(100) and rep["epsilon"] == 1.0
    run("indicators", "--approx", tmp_path / "e.json", "--ref", tmp_path / "e.json", "--csv", table)
    rows = list(csv.reader(table.open()))
    assert rows[0] == ["|Y|", "time_s", "hv_pct", "epsilon"] and len(rows) == 3


def test_exact_refuses_large(tmp_path):
    inst = tmp_path / "k.json"
    run("gen", "mokp", "--n", 30, "--out", inst)
    assert run("exact", inst) == 2


def test_table_counts_rows(tmp_path):
    d = tmp_path / "bench"
    run("gen", "moap", "--tasks", 3, "--seed", 1, "--out", d / "a.json")
    run("gen", "moap", "--tasks", 3, "--seed", 2, "--out", d / "b.json")
    out = tmp_path / "t.csv"
    assert run("table", d, "--runs", 2, "--time-limit", 1, "--out", out) == 0
    rows = list(csv.reader(out.open()))
    assert rows[0] == TABLE_COLUMNS
    data = [r for r in rows[1:] if r[2] != "avg"]
    avg = [r for r in rows[1:] if r[2] == "avg"]
    assert len(data) == 4 and len(avg) == 1
    # cached fronts are reused on a second pass
    assert run("table", d, "--runs", 2, "--out", out) == 0


def test_table_combined_reference_without_exact(tmp_path):
    d = tmp_path / "bench"
    run("gen", "mokp", "--n", 6, "--seed", 1, "--out", d / "k.json")
    out = tmp_path / "t.csv"
    assert run("table", d, "--runs", 2, "--time-limit", 1, "--ref", "combined", "--out", out) == 0
    assert not (d / "k.exact.json").exists()
    rows = list(csv.DictReader(out.open()))
    assert all(float(r["hv_pct"]) <= 100 + 1e-9 for r in rows)


def test_table_rejects_foreign_front(tmp_path):
    d = tmp_path / "bench"
    run("gen", "moap", "--tasks", 3, "--seed", 1, "--out", d / "a.json")
    (d / "a.seed0.front.json").write_text(json.dumps({"points": [], "solutions": [],
                                                       "stats": {"instance": "other", "n": 9}}))
    assert run("table", d, "--runs", 1) == 2


def test_table_empty_dir_exits_2(tmp_path):
    assert run("table", tmp_path) == 2
