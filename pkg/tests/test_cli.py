import json

import pytest

from ttdyn.cli import main
from ttdyn.inputs import corpus_path


def run(tmp_path, *args):
    out = tmp_path / "reports"
    code = main(["--quiet", "--out", str(out), *args])
    return code, out


def report(out, command):
    (path,) = out.glob(f"{command}-*.report.json")
    return json.loads(path.read_text())


def body(out, command):
    return report(out, command)["body"]


def test_strata(tmp_path):
    code, out = run(tmp_path, "strata", "f3gold.json")
    assert code == 0
    strata = body(out, "strata")["strata"]
    assert strata[1]["class"] == "EG"
    assert strata[1]["lambda"] == pytest.approx(1.618034, abs=1e-6)
    assert len(list(out.glob("strata-*.report.txt"))) == 1


def test_sink(tmp_path):
    code, out = run(tmp_path, "sink", "f3gold.json")
    assert code == 0
    rep = body(out, "sink")
    assert rep["components"] == [["a"]]
    assert rep["checks"]["malnormal"]


def test_rerun_is_deterministic(tmp_path):
    _, out = run(tmp_path, "sink", "f3gold.json")
    a = report(out, "sink")
    run(tmp_path, "sink", "f3gold.json")
    b = report(out, "sink")
    assert a["body"] == b["body"]
    assert a["manifest"]["body_sha256"] == b["manifest"]["body_sha256"]
    logs = list((out / "runlog").glob("*.jsonl"))
    assert len(logs) == 1 and len(logs[0].read_text().splitlines()) == 2


def test_manifest(tmp_path):
    out = tmp_path / "r"
    main(["--quiet", "--seed", "7", "--out", str(out), "validate", "f3gold.json"])
    man = report(out, "validate")["manifest"]
    assert man["command"] == "validate" and man["seed"] == 7
    assert set(man) >= {"inputs", "params", "version", "timestamp"}
    assert len(man["inputs"]["f3gold.json"]) == 64


def test_exit_codes(tmp_path):
    assert run(tmp_path, "admissible", "f3gold.json", "f3gold_inv.json", "k_a.json",
               "--maxlen", "4", "--maxiter", "20")[0] == 1
    assert run(tmp_path, "flare", "conj", "f3gold.json", "k_a.json",
               "--classes", "b", "ab", "--n-max", "10")[0] == 0
    assert run(tmp_path, "flare", "conj", "f3gold.json", "k_a.json",
               "--classes", "a")[0] == 2


def test_input_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"edges": [\n  {"id": "a",}\n]}')
    assert run(tmp_path, "validate", str(bad))[0] == 3
    assert "line 2" in capsys.readouterr().err
    data = json.loads(corpus_path("f3gold.json").read_text())
    data["edge_map"]["z"] = "a"
    odd = tmp_path / "odd.json"
    odd.write_text(json.dumps(data))
    assert run(tmp_path, "validate", str(odd))[0] == 3
    assert "unknown edges" in capsys.readouterr().err
    assert run(tmp_path, "strata", str(tmp_path / "missing.json"))[0] == 3


def test_electro(tmp_path):
    code, out = run(tmp_path, "electro", "k_a.json", "--word", "aaaaabaaac", "--rank", "3")
    assert code == 0
    rep = body(out, "electro")
    assert rep["dp"] == 4 and rep["exact"] == 4


def test_electro_rank_from_word(tmp_path):
    # without --rank the word's own letters must be reachable
    code, out = run(tmp_path, "electro", "k_a.json", "--word", "aab")
    assert code == 0
    assert body(out, "electro")["exact"] == 2


def test_invert(tmp_path):
    code, out = run(tmp_path, "invert-aut", "f3gold.json")
    assert code == 0
    assert body(out, "invert")["images"] == ["a", "c", "Cb"]


def test_other_commands(tmp_path):
    assert run(tmp_path, "rtt", "f3gold.json")[0] == 0
    assert run(tmp_path, "nielsen", "f3gold.json", "--max-len", "3")[0] == 0
    assert run(tmp_path, "meet", "k_a.json", "whole3.json")[0] == 0
    assert run(tmp_path, "malnormal", "k_a_b.json")[0] == 0
    assert run(tmp_path, "legality", "f3gold.json", "k_a.json", "--circuit", "aaab",
               "--inv", "f3gold_inv.json")[0] == 0
    assert run(tmp_path, "flare", "cone", "cone4.json", "--n-max", "8")[0] == 0
    assert run(tmp_path, "flare", "hall", "f3gold.json", "k_a.json",
               "--words", "b", "abc", "--n-max", "8")[0] == 0


def test_iteration_cap(tmp_path, monkeypatch):
    monkeypatch.setenv("TTDYN_ITER_CAP", "20")
    code = run(tmp_path, "flare", "conj", "f3gold.json", "k_a.json", "--classes", "b")[0]
    assert code == 2
