from __future__ import annotations

import csv
import io
import json

import pytest

from mwtm import io as mio
from mwtm.cli import main
from mwtm.reduction import CNFFormula, evaluate, format_dimacs

FOUR_VAR_DIMACS = "c example\np cnf 4 3\n1 -2 -1 0\n1 3 -4 0\n2 3 4 0\n"


@pytest.fixture
def six_node_file(tmp_path, six_node):
    path = tmp_path / "six_node.json"
    mio.write_instance(six_node, path)
    return path


def _last_line(capsys):
    return capsys.readouterr().out.strip().splitlines()[-1]


@pytest.mark.parametrize("method,expected", [("boa", "16"), ("ilp", "18"), ("lp", "19"), ("brute", "18")])
def test_solve_six_node(six_node_file, capsys, method, expected):
    assert main(["solve", "--input", str(six_node_file), "--method", method]) == 0
    assert _last_line(capsys) == expected


def test_solve_outputs(six_node_file, tmp_path, capsys):
    out, trace, lp = tmp_path / "r.json", tmp_path / "t.json", tmp_path / "m.lp"
    assert main(["solve", "--input", str(six_node_file), "--out", str(out), "--trace", str(trace),
                 "--dump-lp", str(lp)]) == 0
    r = json.loads(out.read_text())
    assert r["objective"] == 16 and r["lp_calls"] == 2
    assert sorted(map(tuple, r["assignment"])) == [(3, 1), (4, 3), (5, 2)]
    assert len(json.loads(trace.read_text())) == 2
    assert "\nMaximize\n" in lp.read_text()


def test_solve_infeasible(tmp_path, chain_m2, capsys):
    path = tmp_path / "chain.json"
    mio.write_instance(chain_m2, path)
    out = tmp_path / "r.json"
    assert main(["solve", "--input", str(path), "--method", "brute", "--out", str(out)]) == 2
    assert json.loads(out.read_text())["status"] == "infeasible"


def test_solve_bad_input(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["solve", "--input", str(bad)]) == 1
    assert main(["solve", "--input", str(tmp_path / "missing.json")]) == 1


def test_solve_node_limit(tmp_path, capsys):
    assert main(["gen", "--nodes", "32", "--degree", "2.5", "--ratio", "0.5", "--dist", "decreasing",
                 "--seed", "0", "--out", str(tmp_path / "g.json")]) == 0
    assert main(["solve", "--input", str(tmp_path / "g.json"), "--method", "ilp", "--node-limit", "1"]) == 3


def test_usage_errors(capsys):
    with pytest.raises(SystemExit) as e:
        main(["solve", "--bogus"])
    assert e.value.code == 64
    with pytest.raises(SystemExit) as e:
        main([])
    assert e.value.code == 64


def test_gen_deterministic(tmp_path, capsys, monkeypatch):
    args = ["gen", "--nodes", "16", "--degree", "2", "--ratio", "0.25", "--dist", "random", "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a.json")]) == 0
    assert main(args + ["--out", str(tmp_path / "b.json")]) == 0
    assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()
    inst = mio.read_instance(tmp_path / "a.json")
    assert inst.node_count == 16 and inst.task_count == 4
    monkeypatch.setenv("MWTM_SEED", "99")
    assert main(args + ["--out", str(tmp_path / "c.json")]) == 0
    assert (tmp_path / "c.json").read_text() != (tmp_path / "a.json").read_text()
    assert main(args[:-1] + ["99", "--out", str(tmp_path / "d.json")]) == 0
    assert (tmp_path / "c.json").read_text() == (tmp_path / "d.json").read_text()


def test_gen_bad_params(capsys):
    assert main(["gen", "--nodes", "1", "--degree", "2", "--ratio", "0.25", "--dist", "random"]) == 1


def test_reduce_and_decode(tmp_path, capsys):
    cnf, inst, meta, res = (tmp_path / n for n in ("f.cnf", "i.json", "m.json", "r.json"))
    cnf.write_text(FOUR_VAR_DIMACS)
    assert main(["reduce", "--cnf", str(cnf), "--out", str(inst), "--meta", str(meta)]) == 0
    assert "nodes=18 tasks=7" in capsys.readouterr().err
    assert main(["solve", "--input", str(inst), "--method", "ilp", "--out", str(res)]) == 0
    assert _last_line(capsys) == "7"
    assert main(["reduce", "--decode", str(res), "--meta", str(meta)]) == 0
    cap = capsys.readouterr()
    lits = [int(t) for t in cap.out.split()]
    assert lits[-1] == 0 and len(lits) == 5
    truth = [l > 0 for l in lits[:-1]]
    assert evaluate(CNFFormula(4, ((1, -2, -1), (1, 3, -4), (2, 3, 4))), truth)
    assert "satisfied 3/3" in cap.err


def test_reduce_max(tmp_path, capsys):
    cnf, inst = tmp_path / "f.cnf", tmp_path / "i.json"
    cnf.write_text(FOUR_VAR_DIMACS)
    assert main(["reduce", "--cnf", str(cnf), "--out", str(inst), "--max"]) == 0
    assert main(["solve", "--input", str(inst), "--method", "ilp"]) == 0
    assert _last_line(capsys) == "15"


def test_reduce_unsat_decode(tmp_path, capsys):
    cnf, inst, meta, res = (tmp_path / n for n in ("f.cnf", "i.json", "m.json", "r.json"))
    cnf.write_text(format_dimacs(CNFFormula(1, ((1, 1, 1), (-1, -1, -1)))))
    assert main(["reduce", "--cnf", str(cnf), "--out", str(inst), "--meta", str(meta)]) == 0
    assert main(["solve", "--input", str(inst), "--method", "ilp", "--out", str(res)]) == 0
    assert main(["reduce", "--decode", str(res), "--meta", str(meta)]) == 2


def test_reduce_padding(tmp_path, capsys):
    cnf, inst = tmp_path / "f.cnf", tmp_path / "i.json"
    cnf.write_text("p cnf 2 2\n1 2 0\n-1 0\n")
    assert main(["reduce", "--cnf", str(cnf), "--out", str(inst)]) == 2
    assert main(["reduce", "--cnf", str(cnf), "--out", str(inst), "--pad"]) == 0
    i = mio.read_instance(inst)
    assert i.task_count == 2 + 7 + 5     # clauses + padding clauses + variables


def test_reduce_errors(tmp_path, capsys):
    cnf = tmp_path / "f.cnf"
    cnf.write_text("p cnf 2 1\n1 x 0\n")
    assert main(["reduce", "--cnf", str(cnf), "--out", str(tmp_path / "i.json")]) == 1
    cnf.write_text("p cnf 4 1\n1 2 3 4 0\n")
    assert main(["reduce", "--cnf", str(cnf), "--out", str(tmp_path / "i.json"), "--pad"]) == 2
    assert main(["reduce", "--decode", str(tmp_path / "r.json")]) == 64


def test_bench_mini(tmp_path, capsys):
    out = tmp_path / "r.csv"
    args = ["bench", "--grid", "mini", "--trials", "1", "--methods", "boa,lp", "--seed", "1", "--out", str(out)]
    assert main(args) == 0
    rows = list(csv.reader(io.StringIO(out.read_text())))
    assert len(rows) == 1 + 54 * 2
    assert rows[0][:3] == ["node_count", "avg_degree", "task_ratio"]
    # with one trial other sparse cells may also be all-infeasible
    sparse = [r for r in rows[1:] if r[:3] == ["16", "1.5", "0.5"]]
    assert len(sparse) == 6 and all(r[8] == "1" for r in sparse)


def test_bench_bad_method(capsys):
    assert main(["bench", "--grid", "mini", "--trials", "1", "--methods", "gurobi"]) == 64
