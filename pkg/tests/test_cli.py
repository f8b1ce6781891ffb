import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from seriagraph import io
from seriagraph.cli import main
from seriagraph.diagram import bar, bar_width
from seriagraph.model import canonicalize
from seriagraph.planted import planted_order, planted_two_groups, shuffled

DATA = Path(__file__).parent / "data"


def run(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_count_table_one(capsys):
    code, out, _ = run(capsys, "count", "--table", "1")
    assert code == 0
    rows = [line.split("|") for line in out.splitlines()[2:]]
    assert len(rows) == 14
    assert [c.strip() for c in rows[5]] == ["13", "3.1e+09", "2.4e+05", "0.0077"]


def test_count_table_is_byte_stable(capsys):
    outs = {run(capsys, "count", "--table", str(t))[1] for t in (3, 3)}
    assert len(outs) == 1


def test_count_stirling(capsys):
    assert run(capsys, "count", 20, 10)[1] == "5.9e+12\n"
    code, out, _ = run(capsys, "count", 20, 10, "--format", "json")
    assert json.loads(out)["stirling2"] == 5917584964655


def test_count_single_assemblage(capsys):
    code, out, _ = run(capsys, "count", 1)
    assert code == 0
    fields = dict(line.split() for line in out.splitlines())
    assert fields["unique_seriations"] == "1"
    assert fields["seconds"] == "0" and fields["years"] == "0"


def test_count_json_is_exact(capsys):
    code, out, _ = run(capsys, "count", 40, "--format", "json")
    doc = json.loads(out)
    assert doc["partitions"] == 157450588391204931289324344702531067


@pytest.mark.parametrize("argv", [["count", 0], ["count", 600], ["count", 5, 6]])
def test_count_rejects_out_of_range(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_estimate(capsys):
    code, out, _ = run(capsys, "estimate", 14)
    assert code == 3
    assert "3.4e+06" in out and "infeasible" in out
    code, out, _ = run(capsys, "estimate", 2)
    assert code == 0 and "comfortable" in out
    code, out, _ = run(capsys, "estimate", 14, "--per-test-seconds", "0.0005")
    assert "3.4e+05" in out
    code, out, _ = run(capsys, "estimate", 10, "--format", "json")
    assert json.loads(out)["tier"] == "comfortable"


def test_estimate_rejects_bad_flags(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["estimate", "5", "--cores", "0"])
    assert exc.value.code == 2


def _write(tmp_path, matrix, name="data.csv"):
    path = tmp_path / name
    path.write_text(io.write_table(matrix))
    return path


def test_seriate_planted(capsys, tmp_path):
    rng = np.random.default_rng(6)
    m, where = shuffled(planted_order(6, 4, rng), rng)
    path = _write(tmp_path, m)
    code, out, _ = run(capsys, "seriate", path, "--workers", 2)
    assert code == 0
    doc = io.loads(out)
    assert doc["search"]["tested_count"] == 360
    orders = [s["groups"][0]["ordering"] for s in doc["solutions"]]
    assert list(canonicalize(where).perm) in orders
    assert doc["instance"]["digest"] == io.instance_block(m)["digest"]


def test_seriate_no_valid_solution_exits_4(capsys, tmp_path):
    # class 0: 0.2, 0.6, 0.2, 0.6 forces a valley in any order of the four rows
    path = tmp_path / "bad.csv"
    path.write_text("id,a,b,c\nw,1,4,0\nx,3,0,2\ny,1,0,4\nz,3,2,0\n")
    code, out, _ = run(capsys, "seriate", path)
    # either there is a valid ordering or the exit code says there is none
    doc = io.loads(out)
    assert (code == 0) == bool(doc["solutions"])
    code, out, _ = run(capsys, "seriate", path, "--mode", "best-scoring")
    doc = io.loads(out)
    assert doc["solutions"]
    assert code == (0 if doc["solutions"][0]["groups"][0]["valid"] else 4)


def test_seriate_unseriatable_instance(capsys, tmp_path):
    path = tmp_path / "x.csv"
    # three-way cycle: every ordering of four rows breaks some class
    path.write_text("id,a,b,c,d\np,6,0,0,1\nq,0,6,0,1\nr,0,0,6,1\ns,1,1,1,0\n")
    code, out, _ = run(capsys, "seriate", path)
    assert code == 4
    assert io.loads(out)["solutions"] == []


def test_seriate_negative_count(capsys, tmp_path):
    path = tmp_path / "neg.csv"
    path.write_text("id,a,b\nx,1,2\ny,3,-1\n")
    code, _, err = run(capsys, "seriate", path)
    assert code == 2
    assert "line 3" in err and "'b'" in err


@pytest.mark.parametrize("text, fragment", [
    ("name,a\nx,1\n", "header"),
    ("id,a\nx,1\nx,2\n", "duplicate"),
    ("id,a,b\nx,0,0\n", "no specimens"),
    ("id,a\nx,1.5\n", "not an integer"),
    ("id,a,b\nx,1\n", "expected 3 fields"),
])
def test_parse_errors(capsys, tmp_path, text, fragment):
    path = tmp_path / "bad.csv"
    path.write_text(text)
    code, _, err = run(capsys, "seriate", path)
    assert code == 2 and fragment in err


def test_seriate_feasibility_gate(capsys, tmp_path):
    path = _write(tmp_path, planted_order(14, 3, np.random.default_rng(1)))
    code, _, err = run(capsys, "seriate", path)
    assert code == 3
    assert "4.4e+10" in err and "3.4e+06" in err


def test_multigroup_exact_and_heuristic(capsys, tmp_path):
    m, labels = planted_two_groups((5, 3), np.random.default_rng(3))
    path = _write(tmp_path, m)
    code, out, _ = run(capsys, "multigroup", path, "--mode", "exact", "--workers", 1)
    assert code == 0
    top = io.loads(out)["solutions"][0]
    assert len(top["groups"]) == 2
    planted = {frozenset(i for i, l in enumerate(labels) if l == g) for g in (0, 1)}
    assert {frozenset(g["members"]) for g in top["groups"]} == planted

    code, out, _ = run(capsys, "multigroup", path, "--mode", "heuristic")
    assert code == 0
    [sol] = io.loads(out)["solutions"]
    assert all(g["valid"] for g in sol["groups"])
    assert sorted(i for g in sol["groups"] for i in g["members"]) == list(range(8))


def test_multigroup_flags(capsys, tmp_path):
    path = DATA / "two_groups.csv"
    code, out, _ = run(capsys, "multigroup", path, "--min-group-size", 2, "--max-groups", 3,
                       "--all-orderings", "--limit", 4)
    doc = io.loads(out)
    assert code == 0 and len(doc["solutions"]) == 4
    for sol in doc["solutions"]:
        assert len(sol["groups"]) <= 3
        assert all(len(g["members"]) >= 2 and g["alternatives"] for g in sol["groups"])


def test_multigroup_single_assemblage(capsys, tmp_path):
    path = tmp_path / "one.csv"
    path.write_text("id,a,b\nonly,3,4\n")
    for mode in ("exact", "heuristic"):
        code, out, _ = run(capsys, "multigroup", path, "--mode", mode)
        assert code == 0
        groups = io.loads(out)["solutions"][0]["groups"]
        assert [g["members"] for g in groups] == [[0]]


def test_multigroup_scale_gate(capsys, tmp_path):
    path = _write(tmp_path, planted_order(13, 3, np.random.default_rng(2)))
    assert run(capsys, "multigroup", path)[0] == 3


def test_document_round_trip(capsys, tmp_path):
    out_path = tmp_path / "doc.json"
    code, _, _ = run(capsys, "multigroup", DATA / "two_groups.csv", "--out", out_path)
    text = out_path.read_text()
    assert io.dumps(io.loads(text)) == text
    assert io.matrix_from_document(io.loads(text)) == io.read_table(DATA / "two_groups.csv")


def test_workers_env_default(capsys, monkeypatch):
    monkeypatch.setenv("SERIAGRAPH_WORKERS", "2")
    a = run(capsys, "seriate", DATA / "planted6.csv")[1]
    monkeypatch.setenv("SERIAGRAPH_WORKERS", "1")
    b = run(capsys, "seriate", DATA / "planted6.csv")[1]
    assert a == b


def test_bootstrap_flags(capsys):
    code, out, _ = run(capsys, "seriate", DATA / "planted6.csv", "--criterion", "bootstrap",
                       "--alpha", "0.1", "--replicates", "200", "--seed", "5")
    doc = io.loads(out)
    assert doc["criterion"] == {"mode": "bootstrap", "alpha": 0.1, "replicates": 200, "seed": 5}
    strict = io.loads(run(capsys, "seriate", DATA / "planted6.csv")[1])
    assert len(doc["solutions"]) >= len(strict["solutions"])


# -- diagrams -----------------------------------------------------------------

def test_bars():
    assert bar(1.0, 20) == "#" * 20
    assert bar(0.0, 20).strip() == "." and len(bar(0.0, 20)) == 20
    assert bar(0.5, 20) == " " * 5 + "#" * 10 + " " * 5
    assert bar_width(0.125, 20) == 3  # round half up


def test_diagram_planted_column(capsys, tmp_path):
    doc_path = tmp_path / "doc.json"
    run(capsys, "seriate", DATA / "planted6.csv", "--out", doc_path)
    code, out, _ = run(capsys, "diagram", doc_path, "--width", 20)
    assert code == 0
    again = run(capsys, "diagram", doc_path, "--width", 20)[1]
    assert out == again
    lines = out.splitlines()[2:8]
    doc = io.loads(doc_path.read_text())
    classes = doc["instance"]["classes"]
    for j in range(len(classes)):
        widths = [line[10 + j * 22: 10 + j * 22 + 20].count("#") for line in lines]
        assert _unimodal(widths), widths


def _unimodal(seq):
    peak = seq.index(max(seq))
    return (all(a <= b for a, b in zip(seq[:peak], seq[1:peak + 1]))
            and all(a >= b for a, b in zip(seq[peak:], seq[peak + 1:])))


def test_diagram_empty_document(capsys, tmp_path):
    path = tmp_path / "empty.json"
    doc = io.loads(io.dumps({"schema_version": "1", "kind": "seriate",
                             "instance": {"ids": [], "classes": [], "counts": []},
                             "solutions": []}))
    path.write_text(io.dumps(doc))
    assert run(capsys, "diagram", path)[0] == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "seriagraph.cli", "count", "10", "3"],
                          capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout == "9.3e+03\n"
