import json
import subprocess
import sys

import pytest

from conftest import college_record, koenig_record, write_annotated_corpus, write_registry
from regkit.cli import main


@pytest.fixture
def corpus(tmp_path):
    src = write_annotated_corpus(tmp_path / "ann.jsonl", seed=1, n_docs=40)
    reg = write_registry(tmp_path / "reg.json")
    out = tmp_path / "corpus.jsonl"
    assert main(["build-corpus", "--input", str(src), "--registry", str(reg), "--k", "2",
                 "--registry-out", str(tmp_path / "reg_out.json"), "--output", str(out)]) == 0
    return tmp_path, out


def test_build_corpus_koenig(tmp_path):
    src = tmp_path / "t7.jsonl"
    src.write_text(json.dumps(koenig_record()) + "\n")
    out = tmp_path / "c.jsonl"
    assert main(["build-corpus", "--input", str(src), "--output", str(out), "--k", "2"]) == 0
    rec = json.loads(out.read_text())
    assert rec["sentences"][1][0] == "Mr._Koenig" and rec["k"] == 2
    assert main(["build-corpus", "--input", str(src), "--output", str(out), "--middle-initial"]) == 0
    assert json.loads(out.read_text())["sentences"][0][0] == "Ronald_B._Koenig"


def test_rule_pipeline(corpus, capsys):
    tmp, path = corpus
    preds = tmp / "p.jsonl"
    dec = tmp / "dec.jsonl"
    assert main(["generate", "--corpus", str(path), "--registry", str(tmp / "reg_out.json"), "--system", "rreg-l",
                 "--output", str(preds), "--decisions-out", str(dec)]) == 0
    rows = [json.loads(x) for x in preds.read_text().splitlines()]
    assert rows and all(r["form"] in ("pronominal", "non_pronominal") and r["re"] for r in rows)
    assert all(json.loads(x)["rationale"].startswith("l:") for x in dec.read_text().splitlines())
    rep = tmp / "r.json"
    assert main(["evaluate", "--corpus", str(path), "--predictions", str(preds), "--output", str(rep),
                 "--diagnostics"]) == 0
    d = json.loads(rep.read_text())
    assert set(d["by_domain"]) == {"seen", "unseen"} and len(d["diagnostics"]) == len(rows)
    assert main(["report", f"RREG-L={rep}", "--split-view"]) == 0
    assert "cells: seen/unseen" in capsys.readouterr().out


def test_ml_pipeline_and_external(corpus, capsys):
    tmp, path = corpus
    model = tmp / "m.json"
    assert main(["train", "--corpus", str(path), "--schema", "ml-s", "--classifier", "nb", "--output", str(model)]) == 0
    preds = tmp / "p.jsonl"
    assert main(["generate", "--corpus", str(path), "--system", "ml-s", "--model", str(model),
                 "--output", str(preds), "--jobs", "2"]) == 0
    assert main(["generate", "--corpus", str(path), "--system", "ml-l", "--model", str(model),
                 "--output", str(tmp / "x")]) == 2
    ext = tmp / "ext.jsonl"
    assert main(["generate", "--corpus", str(path), "--system", "external", "--predictions", str(preds),
                 "--output", str(ext)]) == 0
    assert ext.read_text() == preds.read_text()
    assert main(["evaluate", "--corpus", str(path), "--predictions", str(ext), "--text-level", "sentence"]) == 0
    assert "RE Acc" in capsys.readouterr().out


def test_exit_codes(corpus, tmp_path):
    tmp, path = corpus
    assert main(["generate", "--corpus", str(path), "--system", "ml-l"]) == 1  # no --model
    with pytest.raises(SystemExit) as e:
        main(["generate", "--corpus", str(path), "--system", "nope"])
    assert e.value.code == 1
    bad = tmp_path / "bad.jsonl"
    bad.write_text("{not json\n")
    assert main(["evaluate", "--corpus", str(bad), "--predictions", str(bad)]) == 2
    short = tmp_path / "short.jsonl"
    short.write_text(json.dumps({"doc_id": "doc004", "slot_index": 0, "re": ["x"]}) + "\n")
    assert main(["evaluate", "--corpus", str(path), "--predictions", str(short)]) == 2
    assert main(["generate", "--corpus", str(tmp_path / "missing.jsonl"), "--system", "rreg-s"]) == 2


def test_config_defaults(corpus, tmp_path):
    tmp, path = corpus
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"corpus": str(path), "system": "rreg-s", "split": "dev"}))
    out = tmp_path / "p.jsonl"
    assert main(["--config", str(cfg), "generate", "--output", str(out)]) == 0
    ids = {json.loads(x)["doc_id"] for x in out.read_text().splitlines()}
    corpus_dev = {json.loads(x)["doc_id"] for x in path.read_text().splitlines() if json.loads(x)["split"] == "dev"}
    assert ids == corpus_dev
    assert main(["--config", str(cfg), "generate", "--split", "test", "--output", str(out)]) == 0
    assert {json.loads(x)["doc_id"] for x in out.read_text().splitlines()} != corpus_dev


def test_college_generate_rreg_s(tmp_path):
    c = tmp_path / "t1.jsonl"
    c.write_text(json.dumps(college_record()) + "\n")
    out = tmp_path / "p.jsonl"
    assert main(["generate", "--corpus", str(c), "--system", "rreg-s", "--output", str(out)]) == 0
    rows = [json.loads(x) for x in out.read_text().splitlines()]
    assert " ".join(rows[4]["re"]) == "AWH Engineering College"


def test_module_entry_point():
    r = subprocess.run([sys.executable, "-m", "regkit", "--help"], capture_output=True, text=True)
    assert r.returncode == 0
    for cmd in ("build-corpus", "train", "generate", "evaluate", "report"):
        assert cmd in r.stdout


def test_experiment_config(tmp_path):
    from regkit.config import ExperimentConfig

    p = tmp_path / "exp.json"
    p.write_text(json.dumps({"corpus": "c.jsonl", "systems": ["rreg-s", "ml-l"], "ml_l_schema": "ml-l-wsj"}))
    cfg = ExperimentConfig.from_json(p)
    assert cfg.schema_for("ml-l") == "ml-l-wsj" and cfg.schema_for("ml-s") == "ml-s"
    p.write_text(json.dumps({"corpus": "c.jsonl", "sistems": []}))
    with pytest.raises(ValueError):
        ExperimentConfig.from_json(p)
    with pytest.raises(ValueError):
        ExperimentConfig("c.jsonl", systems=["external"])
