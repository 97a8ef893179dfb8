import json
import subprocess
import sys

import numpy as np
import pytest

from weatdebias.cli import main
from weatdebias.lexicon import load_lexicon, sample_embedding_path, sample_lexicon_path
from weatdebias.synthetic import sample_lexicon_dict
from weatdebias.vecspace import load_embedding, nearest_neighbors
from weatdebias.weat import bias_levels_from_dict

EMB = str(sample_embedding_path())
LEX = str(sample_lexicon_path())


def test_audit_complete(tmp_path, capsys):
    out = tmp_path / "audit.json"
    assert main(["audit", EMB, LEX, "--json", str(out), "--n-samples", "200"]) == 0
    doc = json.loads(out.read_text())
    lex = load_lexicon(LEX)
    keys = [(r["class"], r["x"], r["y"], r["a"], r["b"]) for r in doc["per_test"]]
    assert sorted(keys) == sorted((t.class_name, t.x, t.y, t.a, t.b) for t in lex.weat_tests)
    assert bias_levels_from_dict(doc) == doc["per_class"]
    table = capsys.readouterr().out
    assert "bias levels" in table
    manifest = json.loads((tmp_path / "audit.json.manifest.json").read_text())
    assert manifest["command"][:2] == ["weatdebias", "audit"] and manifest["seed"] == 0


def test_audit_invalid_lexicon(tmp_path, capsys):
    doc = sample_lexicon_dict()
    doc["weat_tests"][0]["a"] = "missing_set"
    doc["weat_tests"][1]["x"] = "nobody"
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(doc))
    assert main(["audit", EMB, str(p)]) == 1
    err = capsys.readouterr().err
    assert "missing_set" in err and "nobody" in err


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as ei:
        main(["audit"])
    assert ei.value.code == 1


def test_missing_file(tmp_path):
    assert main(["audit", str(tmp_path / "nope.txt"), LEX]) == 2


def test_debias_hard_deterministic(tmp_path, capsys):
    outs = []
    for name in ("a.txt", "b.txt"):
        o = tmp_path / name
        assert main(["debias", "hard", EMB, LEX, "-o", str(o), "--seed", "7", "--n-samples", "100"]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]
    rep = json.loads((tmp_path / "a.txt.report.json").read_text())
    assert rep["iterations"] >= 1 and "before" in rep and "after" in rep
    assert all(abs(r["d"]) <= 0.1 for r in rep["after"]["per_test"])
    assert (tmp_path / "a.txt.manifest.json").exists()


def test_debias_hard_unequal_sizes(tmp_path):
    doc = sample_lexicon_dict()
    doc["classes"][0]["subclasses"][0]["words"].pop()
    p = tmp_path / "lex.json"
    p.write_text(json.dumps(doc))
    assert main(["debias", "hard", EMB, str(p), "-o", str(tmp_path / "o.txt")]) == 1
    assert not (tmp_path / "o.txt").exists()


def test_debias_soft_identity(tmp_path):
    o = tmp_path / "soft.txt"
    assert main(["debias", "soft", EMB, LEX, "-o", str(o), "--lambda", "0", "--no-normalize",
                 "--n-samples", "50"]) == 0
    a, b = load_embedding(EMB), load_embedding(o)
    assert a.words == b.words and a.vectors.tobytes() == b.vectors.tobytes()


def test_debias_soft_reduces(tmp_path):
    o = tmp_path / "soft.txt"
    assert main(["debias", "soft", EMB, LEX, "-o", str(o), "--lambda", "1", "--n-samples", "50"]) == 0
    rep = json.loads((tmp_path / "soft.txt.report.json").read_text())
    mean_d = lambda r: np.mean([abs(x["d"]) for x in r["per_test"]])  # noqa: E731
    assert mean_d(rep["after"]) < mean_d(rep["before"])
    assert rep["plans"] and all("psi" in p for p in rep["plans"])


def test_debias_soft_deterministic(tmp_path):
    outs = []
    for name in ("a.txt", "b.txt"):
        o = tmp_path / name
        assert main(["debias", "soft", EMB, LEX, "-o", str(o), "--lambda", "0.5", "--seed", "7",
                     "--n-samples", "50"]) == 0
        outs.append(o.read_bytes())
    assert outs[0] == outs[1]


def test_debias_soft_needs_lambda(tmp_path):
    assert main(["debias", "soft", EMB, LEX, "-o", str(tmp_path / "o.txt")]) == 1


def _write_quality(tmp_path):
    e = load_embedding(EMB)
    words = list(e.words[:12])
    u = e.unit_vectors()
    pairs = [(words[0], w) for w in words[1:11]]
    cos = [float(u[e.find(a)] @ u[e.find(b)]) for a, b in pairs]
    good = tmp_path / "good.txt"
    good.write_text("".join(f"{a}\t{b}\t{c}\n" for (a, b), c in zip(pairs, cos)))
    other = tmp_path / "other.txt"
    other.write_text("".join(f"{a}\t{b}\t{i % 3}\n" for i, (a, b) in enumerate(pairs)) + "x\ty\t1\n")
    ana = tmp_path / "ana.txt"
    ana.write_text(": s\n" + " ".join(words[:4]) + "\n" + " ".join(words[4:8]) + "\n")
    return good, other, ana


def test_eval_rows(tmp_path, capsys):
    good, other, ana = _write_quality(tmp_path)
    out = tmp_path / "q.json"
    assert main(["eval", EMB, "--similarity", str(good), "--similarity", str(other),
                 "--analogy", str(ana), "--json", str(out)]) == 0
    doc = json.loads(out.read_text())["results"]
    assert [r["dataset"] for r in doc] == ["good", "other", "ana"]
    assert doc[0]["score"] == 100.0
    assert doc[1]["skipped"] == 1
    stdout = capsys.readouterr().out
    for r in doc:
        assert f"{r['score']:8.2f}" in stdout


def test_eval_per_dataset_error(tmp_path, capsys):
    good, _, _ = _write_quality(tmp_path)
    assert main(["eval", EMB, "--similarity", str(good), "--similarity", str(tmp_path / "nope.txt")]) == 0
    assert "error" in capsys.readouterr().out
    assert main(["eval", EMB]) == 1


def test_neighbors(capsys):
    e = load_embedding(EMB)
    w = e.words[3]
    assert main(["neighbors", EMB, w, "-k", "2"]) == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert [ln.split("\t")[0] for ln in lines] == [n for n, _ in nearest_neighbors(e, w, 2)]


def test_neighbors_clamp(tmp_path, capsys):
    p = tmp_path / "tiny.txt"
    p.write_text("a 1 0\nb 0 1\nc 1 1\n")
    assert main(["neighbors", str(p), "a", "-k", "10"]) == 0
    assert len(capsys.readouterr().out.strip().splitlines()) == 2


def test_neighbors_missing():
    assert main(["neighbors", EMB, "definitely_not_a_word"]) == 2


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "weatdebias", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip()
