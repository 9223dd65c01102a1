import csv
import io
import json
import subprocess
import sys

import pytest

from hampack.cli import main
from hampack.graph import read_graph


def run(args, tmp_path, name="out"):
    out = tmp_path / name
    code = main([*args, "--out", str(out)])
    return code, out.read_bytes()


@pytest.fixture
def graph_file(tmp_path):
    path = tmp_path / "g.txt"
    assert main(["gen", "--n", "64", "--p", "0.7", "--seed", "2", "--graph-out", str(path),
                 "--out", str(tmp_path / "gen.json")]) == 0
    return path


COMMANDS = [
    ["gen", "--n", "40", "--p", "0.3"],
    ["split", "--gnp", "40,0.5", "--weights", "0.1,0.2", "--p0", "0.5"],
    ["check", "--gnp", "60,0.5", "--clause", "simplicity", "--clause", "jumbled"],
    ["factor", "--gnp", "30,0.6", "--r", "4"],
    ["twofactor", "--gnp", "30,0.6", "--r", "6", "--budget"],
    ["pack", "--gnp", "64,0.7"],
    ["mc", "--n", "80", "--p", "0.5", "--trials", "4"],
]


@pytest.mark.parametrize("args", COMMANDS, ids=[c[0] for c in COMMANDS])
@pytest.mark.parametrize("fmt", ["json", "csv"])
def test_deterministic_output(args, fmt, tmp_path):
    full = [*args, "--seed", "7", "--format", fmt]
    _, a = run(full, tmp_path, "a")
    _, b = run(full, tmp_path, "b")
    assert a == b and a
    if fmt == "json":
        doc = json.loads(a)
        assert doc["schema"] == 1
    else:
        rows = list(csv.reader(io.StringIO(a.decode())))
        assert len(rows) >= 1


def test_gen_writes_graph(graph_file, tmp_path):
    g = read_graph(graph_file)
    doc = json.loads((tmp_path / "gen.json").read_text())
    assert doc["m"] == g.m and doc["n"] == 64


def test_pack_then_verify(graph_file, tmp_path):
    code, data = run(["pack", "--graph", str(graph_file), "--seed", "1"], tmp_path, "pk.json")
    assert code == 0
    assert json.loads(data)["complete"]
    code, data = run(["verify", "--graph", str(graph_file), "--packing", str(tmp_path / "pk.json")], tmp_path)
    assert code == 0 and json.loads(data)["complete"]


def test_verify_flags_tampering(graph_file, tmp_path):
    run(["pack", "--graph", str(graph_file)], tmp_path, "pk.json")
    doc = json.loads((tmp_path / "pk.json").read_text())
    doc["cycles"][1] = doc["cycles"][0]
    (tmp_path / "bad.json").write_text(json.dumps(doc))
    code, data = run(["verify", "--graph", str(graph_file), "--packing", str(tmp_path / "bad.json")], tmp_path)
    assert code == 1
    assert any(e["check"] == "disjoint" for e in json.loads(data)["errors"])


def test_check_exit_code(tmp_path):
    code, data = run(["check", "--gnp", "40,0.5", "--clause", "strongly_2_jumping"], tmp_path)
    verdict = json.loads(data)["clauses"]["strongly_2_jumping"]["verdict"]
    assert code == (1 if verdict == "violated" else 0)
    code, _ = run(["check", "--gnp", "40,0.5", "--clause", "simplicity"], tmp_path)
    assert code == 0


def test_factor_infeasible(tmp_path):
    path = tmp_path / "p3.txt"
    path.write_text("3 2\n0 1\n1 2\n")
    code, data = run(["factor", "--graph", str(path), "--r", "2"], tmp_path)
    doc = json.loads(data)
    assert code == 1 and doc["found"] is False and doc["certificate"]["R"] < doc["certificate"]["Q"]


def test_pack_infeasible_is_labelled(tmp_path):
    code, data = run(["pack", "--gnp", "100,0.01"], tmp_path)
    doc = json.loads(data)
    assert code == 1 and not doc["complete"] and doc["diagnostics"][0]["stage"] == "plan"


def test_missing_source(tmp_path, capsys):
    assert main(["factor", "--r", "2", "--out", str(tmp_path / "x")]) == 2
    assert "--graph" in capsys.readouterr().err


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "hampack.cli", "gen", "--n", "5", "--p", "1.0"],
                          capture_output=True, text=True, check=True)
    assert json.loads(proc.stdout)["m"] == 10
